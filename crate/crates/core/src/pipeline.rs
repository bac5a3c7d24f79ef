//! End-to-end runs: sparsity analysis, assembly and solving for each sparse
//! order of the selected hierarchy.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::correlative::{decompose, decompose_merged, CliqueDecomposition};
use crate::error::{Error, Result};
use crate::graph::{Extension, Heuristic};
use crate::poly::PopInstance;
use crate::relaxation::{assemble_cs, assemble_cs_ts, assemble_dense, assemble_ts, MomentSdp};
use crate::scalar::Scalar;
use crate::sdp::{solve_ipm, to_standard_form, IpmOptions, SolveStatus};
use crate::term_sparsity::{BlockStructure, TermSparsity, TsOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TsMode {
    None,
    /// Maximal chordal extension (connected components).
    Block,
    MinDegree,
    MinFill,
}

impl TsMode {
    fn extension(self) -> Option<Extension> {
        match self {
            TsMode::None => None,
            TsMode::Block => Some(Extension::Maximal),
            TsMode::MinDegree => Some(Extension::Heuristic(Heuristic::MinDegree)),
            TsMode::MinFill => Some(Extension::Heuristic(Heuristic::MinFill)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CsMode {
    None,
    MinDegree,
    MinFill,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub order: u32,
    pub sparse_order: usize,
    pub ts: TsMode,
    pub cs: CsMode,
    pub moment_one: bool,
    /// Merge overlapping term-sparsity blocks, or variable cliques when term
    /// sparsity is off.
    pub merge: bool,
    pub md: usize,
    /// See [`TsOptions::localizing_support`].
    pub localizing_support: bool,
    pub ipm: IpmOptions<T>,
}

impl<T: Scalar> RunConfig<T> {
    pub fn new(order: u32) -> Self {
        Self {
            order,
            sparse_order: 1,
            ts: TsMode::None,
            cs: CsMode::None,
            moment_one: false,
            merge: false,
            md: 3,
            localizing_support: false,
            ipm: IpmOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidInput("relaxation order must be at least 1".into()));
        }
        if self.sparse_order == 0 {
            return Err(Error::InvalidInput("sparse order must be at least 1".into()));
        }
        if self.md < 2 {
            return Err(Error::InvalidInput("merge strength md must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub sparse_order: usize,
    pub optimum: f64,
    pub dual_bound: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub mb: usize,
    /// PSD block size -> count, scalar constraints as size 1.
    pub block_sizes: BTreeMap<usize, usize>,
    pub stabilized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub optimum: f64,
    pub status: SolveStatus,
    pub mc: usize,
    pub mb: usize,
    pub steps: Vec<StepReport>,
    pub time_s: f64,
    pub stabilized: bool,
}

/// Relaxations of successive sparse orders for one configuration.
pub struct Hierarchy<T> {
    pop: PopInstance<T>,
    config: RunConfig<T>,
    decomposition: Option<CliqueDecomposition>,
    ts: Option<TermSparsity<T>>,
    step: usize,
}

impl<T: Scalar> Hierarchy<T> {
    pub fn new(pop: &PopInstance<T>, config: RunConfig<T>) -> Result<Self> {
        config.validate()?;
        pop.check_order(config.order)?;
        let merge_cliques = config.merge && config.ts == TsMode::None;
        let decomposition = match config.cs {
            CsMode::None => None,
            CsMode::MinDegree | CsMode::MinFill => {
                let h = if config.cs == CsMode::MinDegree {
                    Heuristic::MinDegree
                } else {
                    Heuristic::MinFill
                };
                Some(if merge_cliques {
                    decompose_merged(pop, config.order, h, config.md)?
                } else {
                    decompose(pop, config.order, h)?
                })
            }
        };
        let ts = match config.ts.extension() {
            None => None,
            Some(extension) => {
                let options = TsOptions {
                    extension,
                    merge: config.merge.then_some(config.md),
                    moment_basis: None,
                    localizing_support: config.localizing_support,
                };
                Some(TermSparsity::new(pop, config.order, options, decomposition.as_ref())?)
            }
        };
        Ok(Self {
            pop: pop.clone(),
            config,
            decomposition,
            ts,
            step: 0,
        })
    }

    pub fn decomposition(&self) -> Option<&CliqueDecomposition> {
        self.decomposition.as_ref()
    }

    /// Largest variable clique (`mc`).
    pub fn max_clique_size(&self) -> usize {
        self.decomposition
            .as_ref()
            .map_or(self.pop.nvars(), CliqueDecomposition::max_clique_size)
    }

    /// Assembles the relaxation of the next sparse order. Without term
    /// sparsity every order gives the same relaxation, flagged as stabilized.
    pub fn next_relaxation(&mut self) -> Result<(MomentSdp<T>, Option<BlockStructure>, bool)> {
        self.step += 1;
        let order = self.config.order;
        match &mut self.ts {
            None => {
                let msdp = match &self.decomposition {
                    None => assemble_dense(&self.pop, order)?,
                    Some(dec) => assemble_cs(&self.pop, order, dec)?,
                };
                Ok((msdp, None, true))
            }
            Some(ts) => {
                let bs = ts.step()?;
                let msdp = match &self.decomposition {
                    None => assemble_ts(&self.pop, order, &bs)?,
                    Some(dec) => assemble_cs_ts(&self.pop, order, dec, &bs, self.config.moment_one)?,
                };
                let stable = bs.stabilized;
                Ok((msdp, Some(bs), stable))
            }
        }
    }
}

fn histogram<T: Scalar>(msdp: &MomentSdp<T>) -> BTreeMap<usize, usize> {
    let r = msdp.report();
    let mut h = r.block_sizes;
    if r.num_scalar_ineqs > 0 {
        *h.entry(1).or_insert(0) += r.num_scalar_ineqs;
    }
    h
}

/// Solves one assembled relaxation.
pub fn solve_relaxation<T: Scalar>(
    msdp: &MomentSdp<T>,
    opts: &IpmOptions<T>,
) -> Result<(SolveStatus, f64, f64, usize)> {
    match to_standard_form(msdp) {
        Ok(sdp) => {
            let r = solve_ipm(&sdp, opts)?;
            Ok((
                r.status,
                r.primal_objective.to_f64_lossy(),
                r.dual_objective.to_f64_lossy(),
                r.iterations,
            ))
        }
        Err(Error::InconsistentEqualities) => {
            Ok((SolveStatus::Infeasible, f64::INFINITY, f64::INFINITY, 0))
        }
        Err(e) => Err(e),
    }
}

/// Runs sparse orders `1..=sparse_order`, reusing the support between steps.
/// Once the support stabilizes the remaining orders repeat the last result.
pub fn run<T: Scalar>(pop: &PopInstance<T>, config: &RunConfig<T>) -> Result<RunReport> {
    let start = Instant::now();
    let mut h = Hierarchy::new(pop, config.clone())?;
    let mut steps: Vec<StepReport> = Vec::new();
    for k in 1..=config.sparse_order {
        if let Some(prev) = steps.last().filter(|s| s.stabilized) {
            let mut s = prev.clone();
            s.sparse_order = k;
            steps.push(s);
            continue;
        }
        let (msdp, _, stabilized) = h.next_relaxation()?;
        let (status, optimum, dual_bound, iterations) = solve_relaxation(&msdp, &config.ipm)
            .map_err(|e| Error::Solver { step: k, msg: e.to_string() })?;
        let block_sizes = histogram(&msdp);
        steps.push(StepReport {
            sparse_order: k,
            optimum,
            dual_bound,
            status,
            iterations,
            mb: block_sizes.keys().next_back().copied().unwrap_or(0),
            block_sizes,
            stabilized,
        });
    }
    let last = steps.last().expect("at least one step");
    Ok(RunReport {
        optimum: last.optimum,
        status: last.status,
        mc: h.max_clique_size(),
        mb: last.mb,
        stabilized: last.stabilized,
        steps: steps.clone(),
        time_s: start.elapsed().as_secs_f64(),
    })
}

/// Optimality gap `(ac - opt) / ac` in percent.
pub fn compute_gap(ac: f64, opt: f64) -> Result<f64> {
    if ac == 0.0 {
        return Err(Error::UndefinedGap);
    }
    Ok((ac - opt) / ac * 100.0)
}
