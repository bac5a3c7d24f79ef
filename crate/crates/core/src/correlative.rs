//! Correlative sparsity: variable cliques from the csp graph.

use crate::error::Result;
use crate::graph::{chordal_extension_heuristic, merge_cliques, Graph, Heuristic};
use crate::poly::{Polynomial, PopInstance};
use crate::scalar::Scalar;

/// Variable cliques and the assignment of constraints to them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueDecomposition {
    /// Sorted variable index sets `I_l`.
    pub cliques: Vec<Vec<usize>>,
    /// Inequalities handled inside each clique (`J_l`).
    pub ineq_assignment: Vec<Vec<usize>>,
    /// Inequalities of top half degree, imposed as scalar constraints (`J'`).
    pub scalar_ineqs: Vec<usize>,
    /// Equalities handled inside each clique.
    pub eq_assignment: Vec<Vec<usize>>,
}

impl CliqueDecomposition {
    pub fn num_cliques(&self) -> usize {
        self.cliques.len()
    }

    /// Largest clique size (`mc`).
    pub fn max_clique_size(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// A single clique holding every variable; reproduces the dense structure.
    pub fn trivial<T: Scalar>(pop: &PopInstance<T>, order: u32) -> Result<Self> {
        Self::from_cliques(pop, order, vec![(0..pop.nvars()).collect()])
    }

    /// Assigns constraints to the given cliques. Each constraint outside `J'`
    /// goes to the first clique containing all of its variables.
    pub fn from_cliques<T: Scalar>(
        pop: &PopInstance<T>,
        order: u32,
        cliques: Vec<Vec<usize>>,
    ) -> Result<Self> {
        pop.check_order(order)?;
        let hd = pop.half_degrees();
        let home = |p: &Polynomial<T>| -> usize {
            let vars: Vec<usize> = p.variables().into_iter().collect();
            cliques
                .iter()
                .position(|c| vars.iter().all(|v| c.binary_search(v).is_ok()))
                .expect("constraint variables form a csp clique")
        };
        let mut ineq_assignment = vec![Vec::new(); cliques.len()];
        let mut scalar_ineqs = Vec::new();
        for (j, g) in pop.ineqs().iter().enumerate() {
            if hd.ineq[j] == order {
                scalar_ineqs.push(j);
            } else {
                ineq_assignment[home(g)].push(j);
            }
        }
        let mut eq_assignment = vec![Vec::new(); cliques.len()];
        for (j, h) in pop.eqs().iter().enumerate() {
            eq_assignment[home(h)].push(j);
        }
        Ok(Self {
            cliques,
            ineq_assignment,
            scalar_ineqs,
            eq_assignment,
        })
    }
}

fn add_clique(g: &mut Graph, vars: &[usize]) {
    for (i, &a) in vars.iter().enumerate() {
        for &b in &vars[i + 1..] {
            g.add_edge(a, b);
        }
    }
}

/// Correlative sparsity pattern graph at relaxation order `order`.
///
/// Variables are linked when they share a monomial of the objective or of a
/// top-degree inequality, or when they occur together in any other
/// constraint (equalities included).
pub fn build_csp_graph<T: Scalar>(pop: &PopInstance<T>, order: u32) -> Result<Graph> {
    pop.check_order(order)?;
    let pop = pop.binary_reduced();
    let hd = pop.half_degrees();
    let mut g = Graph::new(pop.nvars());
    let by_monomial = |p: &Polynomial<T>, g: &mut Graph| {
        for alpha in p.supp() {
            let vars: Vec<usize> = alpha.support().collect();
            add_clique(g, &vars);
        }
    };
    by_monomial(pop.objective(), &mut g);
    for (j, gj) in pop.ineqs().iter().enumerate() {
        if hd.ineq[j] == order {
            by_monomial(gj, &mut g);
        } else {
            let vars: Vec<usize> = gj.variables().into_iter().collect();
            add_clique(&mut g, &vars);
        }
    }
    for h in pop.eqs() {
        let vars: Vec<usize> = h.variables().into_iter().collect();
        add_clique(&mut g, &vars);
    }
    Ok(g)
}

/// Chordal-extends the csp graph and splits the problem into variable
/// cliques.
pub fn decompose<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    heuristic: Heuristic,
) -> Result<CliqueDecomposition> {
    let csp = build_csp_graph(pop, order)?;
    let ext = chordal_extension_heuristic(&csp, heuristic);
    CliqueDecomposition::from_cliques(&pop.binary_reduced(), order, ext.cliques)
}

/// As [`decompose`], then merges strongly overlapping cliques.
pub fn decompose_merged<T: Scalar>(
    pop: &PopInstance<T>,
    order: u32,
    heuristic: Heuristic,
    md: usize,
) -> Result<CliqueDecomposition> {
    let csp = build_csp_graph(pop, order)?;
    let ext = chordal_extension_heuristic(&csp, heuristic);
    let merged = merge_cliques(&ext.cliques, md)?;
    CliqueDecomposition::from_cliques(&pop.binary_reduced(), order, merged)
}
