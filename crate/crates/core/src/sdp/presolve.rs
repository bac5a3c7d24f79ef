//! Facial reduction of blocks with a structural kernel.
//!
//! Moment equalities force `M(y) v = 0` for the coefficient vector `v` of
//! every multiple of an equality polynomial that fits in the basis, so the
//! moment blocks have no interior. When a vector `v` annihilates every data
//! matrix of a block, `Z` is PSD exactly when the principal submatrix that
//! omits one pivot row per kernel vector is, and deleting those rows restores
//! strict feasibility.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{BlockKind, Entry, SdpProblem};
use crate::scalar::Scalar;

/// Reduced problem and, per original block, its new index and kept rows.
pub(crate) struct Reduction<T> {
    pub problem: SdpProblem<T>,
    pub kept: Vec<Option<(usize, Vec<usize>)>>,
}

fn block_matrix<T: Scalar>(n: usize, entries: impl Iterator<Item = (usize, usize, T)>) -> DMatrix<T> {
    let mut m = DMatrix::zeros(n, n);
    for (r, c, v) in entries {
        m[(r, c)] = v;
        m[(c, r)] = v;
    }
    m
}

/// Rows to delete so that the remaining coordinates complement the column
/// span of `v`; pivots favour larger indices among near-maximal entries.
fn pivot_rows<T: Scalar>(mut v: DMatrix<T>) -> Vec<usize> {
    let (n, k) = v.shape();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(k);
    for col in 0..k {
        let best = (0..n)
            .filter(|&r| !used[r])
            .fold(T::zero(), |m, r| m.max(v[(r, col)].abs()));
        if best <= T::of(1e-9) {
            continue;
        }
        let p = (0..n)
            .rev()
            .find(|&r| !used[r] && v[(r, col)].abs() >= best * T::of(0.5))
            .expect("a near-maximal entry exists");
        used[p] = true;
        out.push(p);
        let piv = v.column(col).clone_owned() / v[(p, col)];
        for c2 in col + 1..k {
            let f = v[(p, c2)];
            for r in 0..n {
                let d = f * piv[r];
                v[(r, c2)] -= d;
            }
        }
    }
    out
}

/// Equivalent problem with the structural kernel of every block removed;
/// the form [`super::solve_ipm`] works on, useful for external solvers that
/// need a strictly feasible point.
pub fn facially_reduced<T: Scalar>(sdp: &SdpProblem<T>) -> SdpProblem<T> {
    facial_reduction(sdp).problem
}

pub(crate) fn facial_reduction<T: Scalar>(sdp: &SdpProblem<T>) -> Reduction<T> {
    let nb = sdp.blocks.len();
    let mut per_block: Vec<Vec<&Vec<Entry<T>>>> = vec![Vec::new(); nb];
    for m in std::iter::once(&sdp.constant).chain(&sdp.matrices) {
        let mut seen = vec![false; nb];
        for e in m {
            if !seen[e.block] {
                seen[e.block] = true;
                per_block[e.block].push(m);
            }
        }
    }
    let mut kept = Vec::with_capacity(nb);
    let mut blocks = Vec::new();
    for (b, kind) in sdp.blocks.iter().enumerate() {
        let n = kind.size();
        let drop: Vec<usize> = match kind {
            BlockKind::Diagonal(_) => {
                let mut touched = vec![false; n];
                for m in &per_block[b] {
                    for e in m.iter().filter(|e| e.block == b) {
                        touched[e.row] = true;
                    }
                }
                (0..n).filter(|&i| !touched[i]).collect()
            }
            BlockKind::Dense(_) => {
                let mut g = DMatrix::<T>::zeros(n, n);
                for m in &per_block[b] {
                    let f = block_matrix(
                        n,
                        m.iter().filter(|e| e.block == b).map(|e| (e.row, e.col, e.value)),
                    );
                    g += &f * &f;
                }
                let eig = SymmetricEigen::new(g);
                let lmax = eig.eigenvalues.iter().fold(T::zero(), |a, &l| a.max(l));
                let cut = lmax * T::of(1e-12);
                let null: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= cut).collect();
                if null.is_empty() {
                    Vec::new()
                } else {
                    let v = DMatrix::from_fn(n, null.len(), |r, c| eig.eigenvectors[(r, null[c])]);
                    let mut p = pivot_rows(v);
                    p.sort_unstable();
                    p
                }
            }
        };
        let rows: Vec<usize> = (0..n).filter(|i| drop.binary_search(i).is_err()).collect();
        if rows.is_empty() {
            kept.push(None);
        } else {
            blocks.push(match kind {
                BlockKind::Dense(_) => BlockKind::Dense(rows.len()),
                BlockKind::Diagonal(_) => BlockKind::Diagonal(rows.len()),
            });
            kept.push(Some((blocks.len() - 1, rows)));
        }
    }
    let mut new_pos: Vec<Vec<usize>> = sdp.blocks.iter().map(|k| vec![usize::MAX; k.size()]).collect();
    for (b, k) in kept.iter().enumerate() {
        if let Some((_, rows)) = k {
            for (i, &r) in rows.iter().enumerate() {
                new_pos[b][r] = i;
            }
        }
    }
    let map = |m: &Vec<Entry<T>>| -> Vec<Entry<T>> {
        m.iter()
            .filter_map(|e| {
                let (nbk, _) = kept[e.block].as_ref()?;
                let (r, c) = (new_pos[e.block][e.row], new_pos[e.block][e.col]);
                (r != usize::MAX && c != usize::MAX).then_some(Entry {
                    block: *nbk,
                    row: r,
                    col: c,
                    value: e.value,
                })
            })
            .collect()
    };
    let problem = SdpProblem {
        blocks,
        c: sdp.c.clone(),
        constant: map(&sdp.constant),
        matrices: sdp.matrices.iter().map(map).collect(),
        offset: sdp.offset,
    };
    Reduction { problem, kept }
}

/// Gram matrix `<F_i, F_j>` of the listed variables.
fn gram<T: Scalar>(sdp: &SdpProblem<T>, vars: &[usize]) -> DMatrix<T> {
    let mut at: HashMap<(usize, usize, usize), Vec<(usize, T)>> = HashMap::new();
    for (k, &i) in vars.iter().enumerate() {
        for e in &sdp.matrices[i] {
            at.entry((e.block, e.row, e.col)).or_default().push((k, e.value));
        }
    }
    let mut g = DMatrix::zeros(vars.len(), vars.len());
    for ((_, r, c), list) in &at {
        let w = if r == c { T::one() } else { T::of(2.0) };
        for &(i, a) in list {
            for &(j, b) in list {
                g[(i, j)] += w * a * b;
            }
        }
    }
    g
}

/// Variables whose data matrices are linearly independent, chosen by
/// pivoted Cholesky on the Gram matrix. A dependent variable can be fixed
/// at zero when its cost follows the same dependency; otherwise (D) is
/// infeasible and `None` is returned.
pub(crate) fn independent_vars<T: Scalar>(sdp: &SdpProblem<T>) -> Option<Vec<usize>> {
    let vars: Vec<usize> = (0..sdp.num_vars())
        .filter(|&i| !sdp.matrices[i].is_empty())
        .collect();
    let m = vars.len();
    let mut g = gram(sdp, &vars);
    let scale = (0..m).fold(T::zero(), |a, i| a.max(g[(i, i)]));
    let tol = scale * T::of(1e-12);
    // right-looking pivoted Cholesky: g[(i, j)] for i, j not yet chosen holds
    // the Schur complement, the chosen columns hold L
    let mut perm: Vec<usize> = (0..m).collect();
    let mut rank = 0;
    while rank < m {
        let (p, &best) = perm[rank..]
            .iter()
            .enumerate()
            .max_by(|a, b| g[(*a.1, *a.1)].partial_cmp(&g[(*b.1, *b.1)]).expect("finite"))
            .expect("nonempty");
        if g[(best, best)] <= tol {
            break;
        }
        perm.swap(rank, rank + p);
        let d = g[(best, best)].sqrt();
        for &i in &perm[rank..] {
            g[(i, best)] /= d;
        }
        for &j in &perm[rank + 1..] {
            for &i in &perm[rank + 1..] {
                let v = g[(i, best)] * g[(j, best)];
                g[(i, j)] -= v;
            }
        }
        rank += 1;
    }
    let (basis, dependent) = perm.split_at(rank);
    if !dependent.is_empty() {
        // F_j = sum_k lambda_k F_k over the basis; need c_j = sum_k lambda_k c_k
        let g0 = gram(sdp, &vars);
        let gb = DMatrix::from_fn(rank, rank, |a, b| g0[(basis[a], basis[b])]);
        let chol = gb.cholesky()?;
        let cb = DVector::from_fn(rank, |a, _| sdp.c[vars[basis[a]]]);
        let cnorm = sdp.c.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
        for &j in dependent {
            let rhs = DVector::from_fn(rank, |a, _| g0[(basis[a], j)]);
            let lambda = chol.solve(&rhs);
            let cj = lambda.dot(&cb);
            if (cj - sdp.c[vars[j]]).abs() > T::of(1e-9) * (T::one() + cnorm) {
                return None;
            }
        }
    }
    let mut out: Vec<usize> = basis.iter().map(|&k| vars[k]).collect();
    out.sort_unstable();
    Some(out)
}
