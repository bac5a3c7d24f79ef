//! Term sparsity: block structures of moment and localizing matrices from
//! iterated support extension.
//!
//! Each step builds, for every constraint `j` (with `g_0 = 1` for the moment
//! matrix), the graph on its monomial basis linking `b` and `c` when
//! `b + c + a` lies in the current support for some `a` in `supp(g_j)`. The
//! chosen chordal extension of that graph gives the PSD blocks, and the
//! blocks in turn enlarge the support used by the next step.

use std::collections::{BTreeMap, BTreeSet};

use crate::correlative::CliqueDecomposition;
use crate::error::{Error, Result};
use crate::graph::{chordal_extension, merge_cliques, Extension, Graph};
use crate::poly::{monomial_basis, reduce_binary, Exponent, Polynomial, PopInstance};
use crate::scalar::Scalar;

pub type SupportSet = BTreeSet<Exponent>;

/// Which matrix a basis belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatrixKind {
    Moment,
    /// Localizing matrix of inequality `j`.
    Localizing(usize),
}

/// Blocks of one moment or localizing matrix: index sets into `basis`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixBlocks {
    pub kind: MatrixKind,
    pub basis: Vec<Exponent>,
    pub blocks: Vec<Vec<usize>>,
}

impl MatrixBlocks {
    /// Basis monomials of one block.
    pub fn block_basis(&self, b: usize) -> Vec<Exponent> {
        self.blocks[b].iter().map(|&i| self.basis[i].clone()).collect()
    }
}

/// Block structure of one variable clique (the whole variable set when no
/// correlative decomposition is used).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueBlocks {
    pub vars: Vec<usize>,
    pub matrices: Vec<MatrixBlocks>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    pub cliques: Vec<CliqueBlocks>,
    pub sparse_order: usize,
    pub stabilized: bool,
}

impl BlockStructure {
    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.cliques
            .iter()
            .flat_map(|c| &c.matrices)
            .flat_map(|m| m.blocks.iter().map(Vec::len))
    }

    /// Largest PSD block (`mb`).
    pub fn max_block_size(&self) -> usize {
        self.block_sizes().max().unwrap_or(0)
    }

    /// Block size -> number of blocks.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for s in self.block_sizes() {
            *h.entry(s).or_insert(0) += 1;
        }
        h
    }
}

/// Options of the term-sparsity iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsOptions {
    pub extension: Extension,
    /// Merge strength for overlapping blocks; `None` disables merging.
    pub merge: Option<usize>,
    /// Replaces the default moment basis (all monomials of degree at most
    /// the relaxation order). Only valid without a clique decomposition.
    pub moment_basis: Option<Vec<Exponent>>,
    /// Let localizing-matrix blocks enlarge the support as well. By default
    /// only the moment-matrix blocks do.
    pub localizing_support: bool,
}

impl TsOptions {
    pub fn new(extension: Extension) -> Self {
        Self {
            extension,
            merge: None,
            moment_basis: None,
            localizing_support: false,
        }
    }
}

/// Initial support: the supports of every polynomial of the problem together
/// with the doubled moment basis.
pub fn initial_support<T: Scalar>(pop: &PopInstance<T>, moment_basis: &[Exponent]) -> SupportSet {
    let nb = pop.nbinary();
    let polys = std::iter::once(pop.objective())
        .chain(pop.ineqs())
        .chain(pop.eqs());
    polys
        .flat_map(|p| p.supp().iter())
        .cloned()
        .chain(moment_basis.iter().map(Exponent::doubled))
        .map(|a| reduce_binary(&a, nb))
        .collect()
}

/// Term sparsity pattern graph of `g` on `basis` with respect to `support`.
pub fn tsp_graph<T: Scalar>(
    support: &SupportSet,
    g: &Polynomial<T>,
    basis: &[Exponent],
    nb: usize,
) -> Graph {
    let mut graph = Graph::new(basis.len());
    for (i, b) in basis.iter().enumerate() {
        for (j, c) in basis.iter().enumerate().skip(i + 1) {
            let bc = b.add(c);
            if g
                .supp()
                .iter()
                .any(|a| support.contains(&reduce_binary(&a.add(&bc), nb)))
            {
                graph.add_edge(i, j);
            }
        }
    }
    graph
}

/// Monomials `a + b + c` for `a` in `supp(g)` and `b`, `c` in a common block
/// (including `b = c`).
pub fn block_support<T: Scalar>(
    g: &Polynomial<T>,
    basis: &[Exponent],
    blocks: &[Vec<usize>],
    nb: usize,
    out: &mut SupportSet,
) {
    for block in blocks {
        for (p, &i) in block.iter().enumerate() {
            for &j in &block[p..] {
                let bc = basis[i].add(&basis[j]);
                for a in g.supp() {
                    out.insert(reduce_binary(&a.add(&bc), nb));
                }
            }
        }
    }
}

/// Support generated by chordal graphs on the given bases: the union over
/// all edges `{b, c}` and diagonal pairs of `supp(g) + b + c`.
pub fn extend_support<T: Scalar>(
    parts: &[(&Polynomial<T>, &[Exponent], &Graph)],
    nb: usize,
) -> SupportSet {
    let mut out = SupportSet::new();
    for (g, basis, graph) in parts {
        let mut pairs: Vec<Vec<usize>> = graph.edges().map(|(u, v)| vec![u, v]).collect();
        pairs.extend((0..basis.len()).map(|i| vec![i]));
        block_support(g, basis, &pairs, nb, &mut out);
    }
    out
}

#[derive(Debug, Clone)]
struct CliqueSpec {
    vars: Vec<usize>,
    matrices: Vec<(MatrixKind, Vec<Exponent>)>,
}

/// Stateful term-sparsity iteration; each call to [`TermSparsity::step`]
/// produces the next sparse order.
#[derive(Debug, Clone)]
pub struct TermSparsity<T> {
    pop: PopInstance<T>,
    options: TsOptions,
    cliques: Vec<CliqueSpec>,
    support: SupportSet,
    step: usize,
    stabilized: bool,
}

impl<T: Scalar> TermSparsity<T> {
    pub fn new(
        pop: &PopInstance<T>,
        order: u32,
        options: TsOptions,
        decomposition: Option<&CliqueDecomposition>,
    ) -> Result<Self> {
        pop.check_order(order)?;
        let pop = pop.binary_reduced();
        let n = pop.nvars();
        let nb = pop.nbinary();
        let hd = pop.half_degrees();
        let mut cliques = Vec::new();
        match decomposition {
            None => {
                let vars: Vec<usize> = (0..n).collect();
                let moment = match &options.moment_basis {
                    Some(b) => {
                        if b.is_empty() || b.iter().any(|e| e.nvars() != n) {
                            return Err(Error::InvalidInput("custom moment basis is malformed".into()));
                        }
                        let mut b: Vec<Exponent> =
                            b.iter().map(|e| reduce_binary(e, nb)).collect();
                        b.sort();
                        b.dedup();
                        b
                    }
                    None => monomial_basis(n, &vars, order, nb),
                };
                let mut matrices = vec![(MatrixKind::Moment, moment)];
                for j in 0..pop.ineqs().len() {
                    let basis = monomial_basis(n, &vars, order - hd.ineq[j], nb);
                    matrices.push((MatrixKind::Localizing(j), basis));
                }
                cliques.push(CliqueSpec { vars, matrices });
            }
            Some(dec) => {
                if options.moment_basis.is_some() {
                    return Err(Error::InvalidInput(
                        "a custom moment basis cannot be combined with cliques".into(),
                    ));
                }
                for (l, vars) in dec.cliques.iter().enumerate() {
                    let mut matrices =
                        vec![(MatrixKind::Moment, monomial_basis(n, vars, order, nb))];
                    for &j in &dec.ineq_assignment[l] {
                        let basis = monomial_basis(n, vars, order - hd.ineq[j], nb);
                        matrices.push((MatrixKind::Localizing(j), basis));
                    }
                    cliques.push(CliqueSpec {
                        vars: vars.clone(),
                        matrices,
                    });
                }
            }
        }
        let doubled: Vec<Exponent> = cliques
            .iter()
            .flat_map(|c| c.matrices[0].1.iter().cloned())
            .collect();
        let support = initial_support(&pop, &doubled);
        Ok(Self {
            pop,
            options,
            cliques,
            support,
            step: 0,
            stabilized: false,
        })
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn sparse_order(&self) -> usize {
        self.step
    }

    pub fn is_stabilized(&self) -> bool {
        self.stabilized
    }

    fn poly_of(&self, kind: MatrixKind) -> Polynomial<T> {
        match kind {
            MatrixKind::Moment => Polynomial::constant(self.pop.nvars(), T::one()),
            MatrixKind::Localizing(j) => self.pop.ineqs()[j].clone(),
        }
    }

    /// Advances one sparse order and returns its block structure.
    pub fn step(&mut self) -> Result<BlockStructure> {
        let nb = self.pop.nbinary();
        let mut next = self.support.clone();
        let mut out = Vec::with_capacity(self.cliques.len());
        for clique in &self.cliques {
            let mut matrices = Vec::with_capacity(clique.matrices.len());
            for (kind, basis) in &clique.matrices {
                let g = self.poly_of(*kind);
                let tsp = tsp_graph(&self.support, &g, basis, nb);
                let ext = chordal_extension(&tsp, self.options.extension);
                let blocks = match self.options.merge {
                    Some(md) => merge_cliques(&ext.cliques, md)?,
                    None => ext.cliques,
                };
                if *kind == MatrixKind::Moment || self.options.localizing_support {
                    block_support(&g, basis, &blocks, nb, &mut next);
                }
                matrices.push(MatrixBlocks {
                    kind: *kind,
                    basis: basis.clone(),
                    blocks,
                });
            }
            out.push(CliqueBlocks {
                vars: clique.vars.clone(),
                matrices,
            });
        }
        self.stabilized = next == self.support;
        self.support = next;
        self.step += 1;
        Ok(BlockStructure {
            cliques: out,
            sparse_order: self.step,
            stabilized: self.stabilized,
        })
    }
}

/// Runs `k` steps of the iteration from scratch.
pub fn iterate<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    k: usize,
    options: TsOptions,
    decomposition: Option<&CliqueDecomposition>,
) -> Result<BlockStructure> {
    if k == 0 {
        return Err(Error::InvalidInput("sparse order must be at least 1".into()));
    }
    let mut ts = TermSparsity::new(pop, order, options, decomposition)?;
    let mut last = ts.step()?;
    for _ in 1..k {
        last = ts.step()?;
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Heuristic;
    use crate::poly::io::parse_pop;

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    fn example_one() -> PopInstance<f64> {
        parse_pop(include_str!("../data/example1.json")).unwrap()
    }

    fn example_one_basis() -> Vec<Exponent> {
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [0, 1, 1]]
            .iter()
            .map(|v| e(v))
            .collect()
    }

    /// Independent evaluation of the tsp rule over an explicit pair list.
    fn naive_tsp_edges(s: &SupportSet, basis: &[Exponent]) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i < j {
                    let sum: Vec<u32> = basis[i]
                        .entries()
                        .iter()
                        .zip(basis[j].entries())
                        .map(|(a, b)| a + b)
                        .collect();
                    if s.contains(&Exponent::new(sum)) {
                        out.insert((i, j));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn example_one_initial_support() {
        let pop = example_one();
        let s0 = initial_support(&pop, &example_one_basis());
        assert_eq!(s0.len(), 11);
        assert!(s0.contains(&e(&[0, 0, 0])));
        assert!(s0.contains(&e(&[2, 2, 0])));
    }

    #[test]
    fn example_one_tsp_graph_edges() {
        let pop = example_one();
        let basis = example_one_basis();
        let s0 = initial_support(&pop, &basis);
        let one = Polynomial::constant(3, 1.0);
        let g = tsp_graph(&s0, &one, &basis, 0);
        // labels: 0 = 1, 1 = x1, 2 = x2, 3 = x3, 4 = x1x2, 5 = x2x3
        let expected: BTreeSet<(usize, usize)> =
            [(1, 2), (2, 3), (3, 5), (0, 5), (0, 4), (1, 4), (2, 5)].into_iter().collect();
        let got: BTreeSet<(usize, usize)> = g.edges().collect();
        assert_eq!(got, expected);
        assert_eq!(naive_tsp_edges(&s0, &basis), expected);
    }

    #[test]
    fn example_one_first_step_blocks() {
        let opts = TsOptions {
            extension: Extension::Heuristic(Heuristic::MinDegree),
            merge: None,
            moment_basis: Some(example_one_basis()),
            localizing_support: false,
        };
        let bs = iterate(&example_one(), 2, 1, opts, None).unwrap();
        let m = &bs.cliques[0].matrices[0];
        assert_eq!(m.blocks.len(), 4);
        assert!(m.blocks.iter().all(|b| b.len() == 3));
    }

    #[test]
    fn example_one_support_grows_with_fill_edges() {
        // S_1 from the minimum-degree extension: new edges {1, x1}, {1, x2}
        let pop = example_one();
        let basis = example_one_basis();
        let s0 = initial_support(&pop, &basis);
        let mut ext = Graph::from_edges(6, &[(1, 2), (2, 3), (3, 5), (0, 5), (0, 4), (1, 4), (2, 5)]);
        ext.add_edge(0, 1);
        ext.add_edge(0, 2);
        let one = Polynomial::constant(3, 1.0);
        let s1 = extend_support(&[(&one, &basis, &ext)], 0);
        assert!(s1.is_superset(&s0));
        assert!(s1.contains(&e(&[1, 0, 0])));
        assert!(s1.contains(&e(&[0, 1, 0])));
        assert!(!s0.contains(&e(&[1, 0, 0])));
    }

    #[test]
    fn full_support_gives_complete_graph() {
        let basis = monomial_basis(2, &[0, 1], 2, 0);
        let full: SupportSet = monomial_basis(2, &[0, 1], 4, 0).into_iter().collect();
        let g = tsp_graph(&full, &Polynomial::constant(2, 1.0), &basis, 0);
        assert_eq!(g.num_edges(), basis.len() * (basis.len() - 1) / 2);
    }

    #[test]
    fn disjoint_support_gives_edgeless_graph() {
        let basis = monomial_basis(2, &[0, 1], 1, 0);
        let s: SupportSet = [e(&[5, 5])].into_iter().collect();
        let g = tsp_graph(&s, &Polynomial::constant(2, 1.0), &basis, 0);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn edgeless_graph_extends_to_diagonal() {
        let basis = vec![e(&[1, 0])];
        let g = Polynomial::canonicalize(2, [(e(&[0, 0]), 1.0), (e(&[0, 1]), 1.0)]).unwrap();
        let s = extend_support(&[(&g, &basis, &Graph::new(1))], 0);
        let want: SupportSet = [e(&[2, 0]), e(&[2, 1])].into_iter().collect();
        assert_eq!(s, want);
    }

    #[test]
    fn block_mode_on_connected_graph_is_single_block() {
        let opts = TsOptions {
            extension: Extension::Maximal,
            merge: None,
            moment_basis: Some(example_one_basis()),
            localizing_support: false,
        };
        let bs = iterate(&example_one(), 2, 1, opts, None).unwrap();
        assert_eq!(bs.cliques[0].matrices[0].blocks, vec![vec![0, 1, 2, 3, 4, 5]]);
    }

    fn worked_example() -> PopInstance<f64> {
        parse_pop(include_str!("../data/quartic6.json")).unwrap()
    }

    #[test]
    fn support_is_monotone_and_stabilizes() {
        for ext in [
            Extension::Maximal,
            Extension::Heuristic(Heuristic::MinDegree),
            Extension::Heuristic(Heuristic::MinFill),
        ] {
            let mut ts = TermSparsity::new(&worked_example(), 2, TsOptions::new(ext), None).unwrap();
            let mut prev = ts.support().clone();
            let mut prev_blocks: Option<BlockStructure> = None;
            for _ in 0..20 {
                let bs = ts.step().unwrap();
                assert!(ts.support().is_superset(&prev));
                if let Some(pb) = &prev_blocks {
                    // each earlier block sits inside some new block
                    for (old, new) in pb.cliques[0].matrices.iter().zip(&bs.cliques[0].matrices) {
                        for b in &old.blocks {
                            assert!(new.blocks.iter().any(|c| b.iter().all(|i| c.contains(i))));
                        }
                    }
                }
                prev = ts.support().clone();
                prev_blocks = Some(bs.clone());
                if bs.stabilized {
                    break;
                }
            }
            assert!(ts.is_stabilized(), "{ext:?} did not stabilize");
        }
    }

    #[test]
    fn block_mode_blocks_are_disjoint() {
        let bs = iterate(&worked_example(), 2, 2, TsOptions::new(Extension::Maximal), None).unwrap();
        for m in &bs.cliques[0].matrices {
            let mut seen = BTreeSet::new();
            for b in &m.blocks {
                for &i in b {
                    assert!(seen.insert(i));
                }
            }
        }
    }

    #[test]
    fn stepping_matches_from_scratch() {
        let ext = Extension::Heuristic(Heuristic::MinDegree);
        let mut ts = TermSparsity::new(&worked_example(), 2, TsOptions::new(ext), None).unwrap();
        for k in 1..=3 {
            let stepped = ts.step().unwrap();
            let fresh = iterate(&worked_example(), 2, k, TsOptions::new(ext), None).unwrap();
            assert_eq!(stepped, fresh);
        }
    }

    #[test]
    fn binary_supports_stay_reduced() {
        let pop: PopInstance<f64> = parse_pop(include_str!("../data/binary_triangle.json")).unwrap();
        let mut ts = TermSparsity::new(&pop, 2, TsOptions::new(Extension::Maximal), None).unwrap();
        let bs = ts.step().unwrap();
        for a in ts.support() {
            assert!(a.entries().iter().all(|&x| x <= 1));
        }
        for m in &bs.cliques[0].matrices {
            assert!(m.basis.iter().all(|a| a.entries().iter().all(|&x| x <= 1)));
        }
        // doubled basis reduces to the zero exponent
        let s0 = initial_support(&pop.binary_reduced(), &monomial_basis(3, &[0, 1, 2], 2, 3));
        assert!(s0.contains(&Exponent::zero(3)));
        assert_eq!(s0.len(), 4);
    }

    #[test]
    fn clique_mode_uses_clique_bases() {
        let pop = worked_example();
        let dec = crate::correlative::decompose(&pop, 2, Heuristic::MinDegree).unwrap();
        let bs = iterate(&pop, 2, 1, TsOptions::new(Extension::Maximal), Some(&dec)).unwrap();
        assert_eq!(bs.cliques.len(), 3);
        assert_eq!(bs.cliques[0].matrices[0].basis.len(), 15);
        assert_eq!(bs.cliques[0].matrices[1].kind, MatrixKind::Localizing(0));
        assert_eq!(bs.cliques[0].matrices[1].basis.len(), 5);
        assert_eq!(bs.cliques[1].matrices.len(), 1);
        assert_eq!(bs.cliques[2].matrices[0].basis.len(), 3);
        for c in &bs.cliques {
            for m in &c.matrices {
                for a in &m.basis {
                    assert!(a.supported_on(&c.vars));
                }
            }
        }
    }
}
