use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sparsemom::pipeline::{compute_gap, run, CsMode, Hierarchy, RunConfig, RunReport, TsMode};
use sparsemom::poly::io::read_pop;
use sparsemom::poly::PopInstance;
use sparsemom::sdp::{to_standard_form, write_sdpa, IpmOptions};
use sparsemom::Error;

#[derive(Parser)]
#[command(name = "sparsemom", version, about = "Sparse moment-SOS relaxations of polynomial optimization problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the relaxations of sparse orders 1..=k and report the bounds.
    Solve {
        #[command(flatten)]
        opts: RelaxOpts,
        /// Local optimum, to report the optimality gap of the final bound.
        #[arg(long, allow_hyphen_values = true)]
        ac: Option<f64>,
    },
    /// Write the relaxation of sparse order k as SDPA sparse data plus a JSON
    /// structure summary next to it.
    Relax {
        #[command(flatten)]
        opts: RelaxOpts,
        /// Output `.dat-s` path.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Print cliques and block structures without solving.
    Blocks {
        #[command(flatten)]
        opts: RelaxOpts,
    },
    /// Optimality gap (ac - opt) / ac in percent.
    Gap {
        #[arg(long, allow_hyphen_values = true)]
        ac: f64,
        #[arg(long, allow_hyphen_values = true)]
        opt: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TsArg {
    None,
    Block,
    Md,
    Mf,
    /// Minimum fill-in.
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum CsArg {
    None,
    Md,
    Mf,
    /// Minimum degree.
    Heuristic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Internal,
    SdpaExport,
}

#[derive(Args)]
struct RelaxOpts {
    /// Problem file (JSON).
    file: PathBuf,
    /// Relaxation order; defaults to the minimal order.
    #[arg(long, short = 'd')]
    order: Option<u32>,
    /// Number of term-sparsity steps.
    #[arg(long, short = 'k', default_value_t = 1)]
    sparse_order: usize,
    #[arg(long, value_enum, default_value = "none")]
    ts: TsArg,
    #[arg(long, value_enum, default_value = "none")]
    cs: CsArg,
    /// Add a full first-order moment matrix per clique.
    #[arg(long)]
    moment_one: bool,
    /// Merge overlapping blocks (cliques when term sparsity is off).
    #[arg(long)]
    merge: bool,
    /// Merge strength.
    #[arg(long, default_value_t = 3)]
    md: usize,
    /// Treat the first NB variables as binary (x^2 = 1).
    #[arg(long)]
    nb: Option<usize>,
    /// Number of trailing constraints in the file that are equalities.
    #[arg(long)]
    numeq: Option<usize>,
    #[arg(long, value_enum, default_value = "internal")]
    solver: SolverArg,
    /// Relative gap and feasibility tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Also write the SDPA data of the last relaxation here.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Write a JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl RelaxOpts {
    fn load(&self) -> Result<(PopInstance<f64>, RunConfig<f64>), Failure> {
        let mut pop: PopInstance<f64> = read_pop(&self.file)
            .map_err(|e| Failure::Input(format!("{}: {e}", self.file.display())))?;
        if let Some(numeq) = self.numeq {
            pop = pop.split_trailing_equalities(numeq)?;
        }
        if let Some(nb) = self.nb {
            pop = pop.with_binary(nb)?;
        }
        if !(self.tol > 0.0) {
            return Err(Failure::Input("--tol must be positive".into()));
        }
        let order = self.order.unwrap_or(pop.half_degrees().min_order.max(1));
        let mut cfg = RunConfig::new(order);
        cfg.sparse_order = self.sparse_order;
        cfg.ts = match self.ts {
            TsArg::None => TsMode::None,
            TsArg::Block => TsMode::Block,
            TsArg::Md => TsMode::MinDegree,
            TsArg::Mf | TsArg::Heuristic => TsMode::MinFill,
        };
        cfg.cs = match self.cs {
            CsArg::None => CsMode::None,
            CsArg::Md | CsArg::Heuristic => CsMode::MinDegree,
            CsArg::Mf => CsMode::MinFill,
        };
        cfg.moment_one = self.moment_one;
        cfg.merge = self.merge;
        cfg.md = self.md;
        cfg.ipm = IpmOptions::with_tol(self.tol);
        cfg.validate()?;
        Ok((pop, cfg))
    }
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("serializable report");
    std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Assembles sparse orders 1..=k and returns the last relaxation.
fn last_relaxation(
    pop: &PopInstance<f64>,
    cfg: &RunConfig<f64>,
) -> Result<(sparsemom::relaxation::MomentSdp<f64>, usize), Failure> {
    let mut h = Hierarchy::new(pop, cfg.clone())?;
    let mut last = h.next_relaxation()?;
    for _ in 1..cfg.sparse_order {
        if last.2 {
            break;
        }
        last = h.next_relaxation()?;
    }
    Ok((last.0, h.max_clique_size()))
}

fn export(msdp: &sparsemom::relaxation::MomentSdp<f64>, path: &Path) -> Result<(), Failure> {
    let sdp = to_standard_form(msdp)?;
    write_sdpa(&sdp, path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print_report(r: &RunReport, gap: Option<f64>) {
    for s in &r.steps {
        println!(
            "step {}: optimum = {:.12} ({}, {} iterations, mb = {}{})",
            s.sparse_order,
            s.optimum,
            s.status,
            s.iterations,
            s.mb,
            if s.stabilized { ", stabilized" } else { "" }
        );
    }
    println!("optimum = {:.17}", r.optimum);
    println!("status  = {}", r.status);
    println!("mc = {}, mb = {}, time = {:.3} s", r.mc, r.mb, r.time_s);
    if let Some(g) = gap {
        println!("gap = {g:.2}%");
    }
}

fn cmd_solve(opts: &RelaxOpts, ac: Option<f64>) -> Result<(), Failure> {
    let (pop, cfg) = opts.load()?;
    if opts.solver == SolverArg::SdpaExport {
        let path = opts
            .export
            .as_ref()
            .ok_or_else(|| Failure::Input("--solver sdpa-export needs --export PATH".into()))?;
        let (msdp, _) = last_relaxation(&pop, &cfg)?;
        export(&msdp, path)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    if let Some(path) = &opts.export {
        let (msdp, _) = last_relaxation(&pop, &cfg)?;
        export(&msdp, path)?;
    }
    let report = run(&pop, &cfg)?;
    let gap = match ac {
        Some(ac) => Some(compute_gap(ac, report.optimum)?),
        None => None,
    };
    print_report(&report, gap);
    if let Some(path) = &opts.json {
        let mut v = serde_json::to_value(&report).expect("serializable report");
        if let Some(g) = gap {
            v["gap"] = json!(g);
        }
        write_json(path, &v)?;
    }
    if report.status.is_success() {
        Ok(())
    } else {
        Err(Failure::Solver(format!("solver status {}", report.status)))
    }
}

fn cmd_relax(opts: &RelaxOpts, out: &Path) -> Result<(), Failure> {
    let (pop, cfg) = opts.load()?;
    let (msdp, mc) = last_relaxation(&pop, &cfg)?;
    export(&msdp, out)?;
    let mut summary = serde_json::to_value(msdp.report()).expect("serializable report");
    summary["mc"] = json!(mc);
    let path = opts.json.clone().unwrap_or_else(|| out.with_extension("json"));
    write_json(&path, &summary)?;
    println!("wrote {} and {}", out.display(), path.display());
    Ok(())
}

fn cmd_blocks(opts: &RelaxOpts) -> Result<(), Failure> {
    let (pop, cfg) = opts.load()?;
    let mut h = Hierarchy::new(&pop, cfg.clone())?;
    let mut out = json!({ "mc": h.max_clique_size() });
    if let Some(dec) = h.decomposition() {
        for (l, c) in dec.cliques.iter().enumerate() {
            let vars: Vec<String> = c.iter().map(|v| format!("x{}", v + 1)).collect();
            println!("clique {}: {{{}}}", l + 1, vars.join(", "));
        }
        println!("scalar constraints: {:?}", dec.scalar_ineqs);
        out["cliques"] = json!(dec.cliques);
        out["scalar_constraints"] = json!(dec.scalar_ineqs);
    }
    let mut steps = Vec::new();
    let mut stabilized_at = None;
    for k in 1..=cfg.sparse_order {
        let (msdp, _, stable) = h.next_relaxation()?;
        let r = msdp.report();
        println!("step {k}: block sizes {:?}, scalar constraints {}, mb = {}", r.block_sizes, r.num_scalar_ineqs, r.max_block_size);
        steps.push(json!({ "sparse_order": k, "block_sizes": r.block_sizes, "num_scalar_ineqs": r.num_scalar_ineqs, "mb": r.max_block_size }));
        if stable {
            stabilized_at = Some(k);
            println!("stabilized at step {k}");
            break;
        }
    }
    out["steps"] = json!(steps);
    out["stabilized_at"] = json!(stabilized_at);
    if let Some(path) = &opts.json {
        write_json(path, &out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { opts, ac } => cmd_solve(opts, *ac),
        Command::Relax { opts, out } => cmd_relax(opts, out),
        Command::Blocks { opts } => cmd_blocks(opts),
        Command::Gap { ac, opt } => compute_gap(*ac, *opt)
            .map(|g| println!("{g:.2}%"))
            .map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
