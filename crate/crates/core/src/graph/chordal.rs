use std::collections::BTreeSet;

use super::Graph;
use crate::error::{Error, Result};

/// Greedy elimination rule for approximately smallest chordal extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Eliminate a vertex of minimum current degree.
    MinDegree,
    /// Eliminate a vertex whose elimination adds the fewest fill edges.
    MinFill,
}

/// Which chordal extension to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extension {
    /// Complete every connected component.
    Maximal,
    Heuristic(Heuristic),
}

/// A chordal supergraph together with a perfect elimination ordering and its
/// maximal cliques.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordalResult {
    pub extended: Graph,
    pub order: Vec<usize>,
    pub cliques: Vec<Vec<usize>>,
}

impl ChordalResult {
    pub fn clique_number(&self) -> usize {
        clique_number(&self.cliques)
    }
}

pub fn clique_number(cliques: &[Vec<usize>]) -> usize {
    cliques.iter().map(Vec::len).max().unwrap_or(0)
}

pub fn chordal_extension(g: &Graph, ext: Extension) -> ChordalResult {
    match ext {
        Extension::Maximal => chordal_extension_maximal(g),
        Extension::Heuristic(h) => chordal_extension_heuristic(g, h),
    }
}

/// Turns every connected component into a complete graph. Isolated vertices
/// become singleton cliques.
pub fn chordal_extension_maximal(g: &Graph) -> ChordalResult {
    let comps = g.connected_components();
    let mut extended = Graph::new(g.num_vertices());
    for comp in &comps {
        for (i, &u) in comp.iter().enumerate() {
            for &v in &comp[i + 1..] {
                extended.add_edge(u, v);
            }
        }
    }
    let order = (0..g.num_vertices()).collect();
    let mut cliques = comps;
    cliques.sort();
    ChordalResult {
        extended,
        order,
        cliques,
    }
}

fn fill_count(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

/// Greedy elimination game. Ties go to the smallest vertex label.
pub fn chordal_extension_heuristic(g: &Graph, heuristic: Heuristic) -> ChordalResult {
    let n = g.num_vertices();
    let mut work: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut extended = g.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);

    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| match heuristic {
                Heuristic::MinDegree => (work[v].len(), v),
                Heuristic::MinFill => (fill_count(&work, v), v),
            })
            .expect("a live vertex remains");
        let nb: Vec<usize> = work[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if work[a].insert(b) {
                    work[b].insert(a);
                    extended.add_edge(a, b);
                }
            }
        }
        for &a in &nb {
            work[a].remove(&v);
        }
        work[v].clear();
        alive[v] = false;
        order.push(v);
    }

    let cliques =
        maximal_cliques(&extended, &order).expect("elimination game yields a perfect ordering");
    ChordalResult {
        extended,
        order,
        cliques,
    }
}

fn positions(order: &[usize], n: usize) -> Option<Vec<usize>> {
    if order.len() != n {
        return None;
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return None;
        }
        pos[v] = i;
    }
    Some(pos)
}

fn later_neighbors(g: &Graph, pos: &[usize], v: usize) -> Vec<usize> {
    g.neighbors(v)
        .iter()
        .copied()
        .filter(|&u| pos[u] > pos[v])
        .collect()
}

/// Checks that, for every vertex, its neighbors later in `order` are
/// pairwise adjacent.
pub fn is_perfect_elimination_order(g: &Graph, order: &[usize]) -> bool {
    let Some(pos) = positions(order, g.num_vertices()) else {
        return false;
    };
    order
        .iter()
        .all(|&v| g.is_clique(&later_neighbors(g, &pos, v)))
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

/// Maximal cliques of a chordal graph from one of its perfect elimination
/// orderings. Each clique is sorted and the list is sorted.
pub fn maximal_cliques(chordal: &Graph, order: &[usize]) -> Result<Vec<Vec<usize>>> {
    let pos = positions(order, chordal.num_vertices())
        .ok_or_else(|| Error::InvalidInput("ordering is not a permutation of the vertices".into()))?;
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(order.len());
    for &v in order {
        let mut c = later_neighbors(chordal, &pos, v);
        if !chordal.is_clique(&c) {
            return Err(Error::InvalidInput(format!(
                "ordering is not a perfect elimination ordering at vertex {v}"
            )));
        }
        c.push(v);
        c.sort_unstable();
        candidates.push(c);
    }
    candidates.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    candidates.dedup();
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for c in candidates {
        if !kept.iter().any(|k| is_subset(&c, k)) {
            kept.push(c);
        }
    }
    kept.sort();
    Ok(kept)
}
