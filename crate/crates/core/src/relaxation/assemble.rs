use std::collections::BTreeSet;

use super::{BlockOrigin, LinearForm, MomentIndex, MomentSdp, PsdBlock};
use crate::correlative::CliqueDecomposition;
use crate::error::{Error, Result};
use crate::poly::{monomial_basis, reduce_binary, Exponent, Polynomial, PopInstance};
use crate::scalar::Scalar;
use crate::term_sparsity::{BlockStructure, CliqueBlocks, MatrixBlocks, MatrixKind};

/// `g * x^beta` with binary reduction.
fn shifted<T: Scalar>(g: &Polynomial<T>, beta: &Exponent, nb: usize) -> Polynomial<T> {
    Polynomial::canonicalize(
        g.nvars(),
        g.terms().map(|(a, c)| (reduce_binary(&a.add(beta), nb), c)),
    )
    .expect("consistent variable count")
}

/// Entries `g * x^{b_i + b_j}` of the localizing matrix of `g` on `basis`,
/// row-major. Use the constant polynomial 1 for a moment matrix.
pub fn moment_block<T: Scalar>(
    basis: &[Exponent],
    g: &Polynomial<T>,
    nb: usize,
) -> Vec<Polynomial<T>> {
    let r = basis.len();
    let mut out = vec![Polynomial::zero(g.nvars()); r * r];
    for i in 0..r {
        for j in i..r {
            let p = shifted(g, &basis[i].add(&basis[j]), nb);
            out[j * r + i] = p.clone();
            out[i * r + j] = p;
        }
    }
    out
}

/// Monomials `x^alpha` in `vars` with `deg(h) + |alpha| <= 2 * order`.
pub fn equality_multipliers<T: Scalar>(
    h: &Polynomial<T>,
    vars: &[usize],
    order: u32,
    nb: usize,
) -> Vec<Exponent> {
    let room = (2 * order).saturating_sub(h.degree());
    monomial_basis(h.nvars(), vars, room, nb)
}

struct Raw<T> {
    blocks: Vec<(BlockOrigin, Vec<Exponent>, Vec<Polynomial<T>>)>,
    scalars: Vec<Polynomial<T>>,
    eqs: Vec<Polynomial<T>>,
    objective: Polynomial<T>,
}

impl<T: Scalar> Raw<T> {
    fn finish(self, nvars: usize) -> MomentSdp<T> {
        let mut used = BTreeSet::new();
        let all = self
            .blocks
            .iter()
            .flat_map(|b| &b.2)
            .chain(&self.scalars)
            .chain(&self.eqs)
            .chain(std::iter::once(&self.objective));
        for p in all {
            used.extend(p.supp().iter().cloned());
        }
        let index = MomentIndex::from_set(nvars, used);
        let lf = |p: &Polynomial<T>| LinearForm::from_poly(p, &index);
        let psd_blocks = self
            .blocks
            .iter()
            .map(|(origin, basis, entries)| PsdBlock {
                origin: *origin,
                basis: basis.clone(),
                entries: entries.iter().map(lf).collect(),
            })
            .collect();
        let scalar_ineqs = self.scalars.iter().map(lf).collect();
        let moment_eqs = self.eqs.iter().map(lf).filter(|f| !f.is_zero()).collect();
        let objective = lf(&self.objective);
        MomentSdp {
            index,
            psd_blocks,
            scalar_ineqs,
            moment_eqs,
            objective,
        }
    }
}

/// Where each equality lives: its variable scope.
enum EqScope<'a> {
    Global,
    Cliques(&'a CliqueDecomposition),
}

fn assemble<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    structure: &[CliqueBlocks],
    eq_scope: EqScope<'_>,
    moment_one: bool,
) -> Result<MomentSdp<T>> {
    pop.check_order(order)?;
    let pop = pop.binary_reduced();
    let n = pop.nvars();
    let nb = pop.nbinary();
    let one = Polynomial::constant(n, T::one());
    let mut raw = Raw {
        blocks: Vec::new(),
        scalars: Vec::new(),
        eqs: Vec::new(),
        objective: pop.objective().clone(),
    };
    let mut localized = vec![false; pop.ineqs().len()];
    for (l, clique) in structure.iter().enumerate() {
        for m in &clique.matrices {
            let (g, origin) = match m.kind {
                MatrixKind::Moment => (&one, BlockOrigin::Moment { clique: l }),
                MatrixKind::Localizing(j) => {
                    let g = pop.ineqs().get(j).ok_or_else(|| {
                        Error::InvalidInput(format!("block structure names missing constraint {j}"))
                    })?;
                    localized[j] = true;
                    (g, BlockOrigin::Localizing { clique: l, ineq: j })
                }
            };
            for b in 0..m.blocks.len() {
                let basis = m.block_basis(b);
                if basis.len() == 1 {
                    raw.scalars.push(shifted(g, &basis[0].doubled(), nb));
                } else {
                    let entries = moment_block(&basis, g, nb);
                    raw.blocks.push((origin, basis, entries));
                }
            }
        }
        if moment_one {
            let mut basis = vec![Exponent::zero(n)];
            basis.extend(clique.vars.iter().map(|&v| Exponent::unit(n, v)));
            if basis.len() > 1 {
                let entries = moment_block(&basis, &one, nb);
                raw.blocks.push((BlockOrigin::FirstOrder { clique: l }, basis, entries));
            }
        }
    }
    // constraints not covered by any clique matrix are imposed as L(g) >= 0
    for (j, g) in pop.ineqs().iter().enumerate() {
        if !localized[j] {
            raw.scalars.push(g.clone());
        }
    }
    let all: Vec<usize> = (0..n).collect();
    for (k, h) in pop.eqs().iter().enumerate() {
        let vars: &[usize] = match &eq_scope {
            EqScope::Global => &all,
            EqScope::Cliques(dec) => {
                let l = dec
                    .eq_assignment
                    .iter()
                    .position(|js| js.contains(&k))
                    .ok_or_else(|| Error::InvalidInput(format!("equality {k} has no clique")))?;
                &dec.cliques[l]
            }
        };
        for alpha in equality_multipliers(h, vars, order, nb) {
            raw.eqs.push(shifted(h, &alpha, nb));
        }
    }
    Ok(raw.finish(n))
}

fn full_structure<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    dec: &CliqueDecomposition,
) -> Vec<CliqueBlocks> {
    let n = pop.nvars();
    let nb = pop.nbinary();
    let hd = pop.half_degrees();
    let full = |kind, basis: Vec<Exponent>| MatrixBlocks {
        kind,
        blocks: vec![(0..basis.len()).collect()],
        basis,
    };
    dec.cliques
        .iter()
        .enumerate()
        .map(|(l, vars)| {
            let mut matrices = vec![full(MatrixKind::Moment, monomial_basis(n, vars, order, nb))];
            for &j in &dec.ineq_assignment[l] {
                let basis = monomial_basis(n, vars, order - hd.ineq[j], nb);
                matrices.push(full(MatrixKind::Localizing(j), basis));
            }
            CliqueBlocks {
                vars: vars.clone(),
                matrices,
            }
        })
        .collect()
}

/// Dense moment relaxation of order `order`.
pub fn assemble_dense<T: Scalar>(pop: &PopInstance<T>, order: u32) -> Result<MomentSdp<T>> {
    let reduced = pop.binary_reduced();
    let dec = CliqueDecomposition::trivial(&reduced, order)?;
    let structure = full_structure(&reduced, order, &dec);
    assemble(pop, order, &structure, EqScope::Global, false)
}

/// Correlative-sparse relaxation: full moment and localizing matrices per
/// variable clique.
pub fn assemble_cs<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    dec: &CliqueDecomposition,
) -> Result<MomentSdp<T>> {
    let structure = full_structure(&pop.binary_reduced(), order, dec);
    assemble(pop, order, &structure, EqScope::Cliques(dec), false)
}

/// Term-sparse relaxation from a block structure without cliques.
pub fn assemble_ts<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    blocks: &BlockStructure,
) -> Result<MomentSdp<T>> {
    if blocks.cliques.len() != 1 {
        return Err(Error::InvalidInput(
            "term-sparse assembly expects a single variable clique".into(),
        ));
    }
    assemble(pop, order, &blocks.cliques, EqScope::Global, false)
}

/// Combined correlative and term-sparse relaxation. With `moment_one`, every
/// clique also gets its full first-order moment matrix.
pub fn assemble_cs_ts<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    dec: &CliqueDecomposition,
    blocks: &BlockStructure,
    moment_one: bool,
) -> Result<MomentSdp<T>> {
    if blocks.cliques.len() != dec.cliques.len() {
        return Err(Error::InvalidInput(format!(
            "block structure has {} cliques, decomposition has {}",
            blocks.cliques.len(),
            dec.cliques.len()
        )));
    }
    assemble(pop, order, &blocks.cliques, EqScope::Cliques(dec), moment_one)
}
