use super::{canonical_entries, BlockKind, Entry, SdpProblem};
use crate::error::{Error, Result};
use crate::relaxation::{LinearForm, MomentSdp};
use crate::scalar::Scalar;

/// Recovers every moment from the free variables of the standard form:
/// `y_id = constant[id] + sum coefs[id][k].1 * x[coefs[id][k].0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMap<T> {
    pub constant: Vec<T>,
    pub coefs: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> MomentMap<T> {
    pub fn moments(&self, x: &[T]) -> Vec<T> {
        self.constant
            .iter()
            .zip(&self.coefs)
            .map(|(&c, terms)| terms.iter().fold(c, |s, &(k, a)| s + a * x[k]))
            .collect()
    }
}

/// Result of eliminating the equalities: for each moment, either a pivot
/// expressed through the free moments or a free moment itself.
struct Elimination<T> {
    /// Per moment: `Some((constant, [(free moment id, coef)]))` for pivots.
    pivots: Vec<Option<(T, Vec<(usize, T)>)>>,
}

/// Reduced row echelon elimination of `rows * y = rhs`.
///
/// Pivots prefer moments that no PSD block or scalar constraint touches,
/// then larger ids, among entries within a factor 10 of the row maximum.
fn eliminate<T: Scalar>(
    nmom: usize,
    rows: Vec<(Vec<T>, T)>,
    in_cone: &[bool],
) -> Result<Elimination<T>> {
    let mut pivot_of_row: Vec<usize> = Vec::new();
    let mut kept: Vec<(Vec<T>, T)> = Vec::new();
    for (mut a, mut b) in rows {
        let scale = a.iter().fold(b.abs(), |m, v| m.max(v.abs())) + T::one();
        for (k, (pa, pb)) in kept.iter().enumerate() {
            let p = pivot_of_row[k];
            let f = a[p];
            if !f.is_zero() {
                for (ai, &pi) in a.iter_mut().zip(pa) {
                    *ai -= f * pi;
                }
                b -= f * *pb;
                a[p] = T::zero();
            }
        }
        let amax = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if amax <= T::of(1e-11) * scale {
            if b.abs() > T::of(1e-9) * scale {
                return Err(Error::InconsistentEqualities);
            }
            continue;
        }
        let threshold = amax * T::of(0.1);
        let p = (0..nmom)
            .filter(|&j| a[j].abs() >= threshold)
            .max_by_key(|&j| (!in_cone[j], j))
            .expect("row has a nonzero entry");
        let inv = T::one() / a[p];
        for v in a.iter_mut() {
            *v *= inv;
        }
        b *= inv;
        a[p] = T::one();
        // clear the new pivot column from earlier rows
        for (pa, pb) in kept.iter_mut() {
            let f = pa[p];
            if !f.is_zero() {
                for (x, &y) in pa.iter_mut().zip(&a) {
                    *x -= f * y;
                }
                *pb -= f * b;
                pa[p] = T::zero();
            }
        }
        pivot_of_row.push(p);
        kept.push((a, b));
    }
    let mut pivots: Vec<Option<(T, Vec<(usize, T)>)>> = vec![None; nmom];
    for (k, (a, b)) in kept.into_iter().enumerate() {
        let p = pivot_of_row[k];
        let terms = a
            .iter()
            .enumerate()
            .filter(|&(j, v)| j != p && !v.is_zero())
            .map(|(j, &v)| (j, -v))
            .collect();
        pivots[p] = Some((b, terms));
    }
    Ok(Elimination { pivots })
}

/// Converts a moment relaxation into an SDPA-form problem, also returning
/// the map from the solver variables back to moments.
///
/// Fails with [`Error::InconsistentEqualities`] when `y_0 = 1` and the moment
/// equalities have no common solution.
pub fn standard_form_with_map<T: Scalar>(
    msdp: &MomentSdp<T>,
) -> Result<(SdpProblem<T>, MomentMap<T>)> {
    let nmom = msdp.index.len();
    let mut in_cone = vec![false; nmom];
    for f in msdp
        .psd_blocks
        .iter()
        .flat_map(|b| &b.entries)
        .chain(&msdp.scalar_ineqs)
    {
        for &(id, _) in &f.terms {
            in_cone[id] = true;
        }
    }
    let dense_row = |f: &LinearForm<T>| {
        let mut a = vec![T::zero(); nmom];
        for &(id, c) in &f.terms {
            a[id] += c;
        }
        a
    };
    let mut rows = Vec::with_capacity(msdp.moment_eqs.len() + 1);
    if nmom > 0 {
        let mut a = vec![T::zero(); nmom];
        a[0] = T::one();
        rows.push((a, T::one()));
    }
    rows.extend(msdp.moment_eqs.iter().map(|f| (dense_row(f), T::zero())));
    let elim = eliminate(nmom, rows, &in_cone)?;

    // Affine expression of a moment in the free moments.
    let affine = |id: usize| -> (T, Vec<(usize, T)>) {
        match &elim.pivots[id] {
            Some((c, t)) => (*c, t.clone()),
            None => (T::zero(), vec![(id, T::one())]),
        }
    };
    let substitute = |f: &LinearForm<T>| -> (T, Vec<(usize, T)>) {
        let mut c0 = T::zero();
        let mut acc: Vec<(usize, T)> = Vec::new();
        for &(id, a) in &f.terms {
            let (c, t) = affine(id);
            c0 += a * c;
            acc.extend(t.into_iter().map(|(j, v)| (j, a * v)));
        }
        acc.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(acc.len());
        for (j, v) in acc {
            match merged.last_mut() {
                Some(l) if l.0 == j => l.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|t| !t.1.is_zero());
        (c0, merged)
    };

    let free: Vec<usize> = (0..nmom).filter(|&j| elim.pivots[j].is_none()).collect();
    let mut var_of = vec![usize::MAX; nmom];
    for (k, &j) in free.iter().enumerate() {
        var_of[j] = k;
    }
    let mut blocks = Vec::new();
    let mut constant = Vec::new();
    let mut matrices: Vec<Vec<Entry<T>>> = vec![Vec::new(); free.len()];
    let mut push = |block: usize, row: usize, col: usize, f: &LinearForm<T>| {
        let (c0, terms) = substitute(f);
        if !c0.is_zero() {
            constant.push(Entry { block, row, col, value: -c0 });
        }
        for (j, v) in terms {
            matrices[var_of[j]].push(Entry { block, row, col, value: v });
        }
    };
    for (bi, b) in msdp.psd_blocks.iter().enumerate() {
        blocks.push(BlockKind::Dense(b.dim()));
        for i in 0..b.dim() {
            for j in i..b.dim() {
                push(bi, i, j, b.entry(i, j));
            }
        }
    }
    if !msdp.scalar_ineqs.is_empty() {
        let bi = blocks.len();
        blocks.push(BlockKind::Diagonal(msdp.scalar_ineqs.len()));
        for (i, f) in msdp.scalar_ineqs.iter().enumerate() {
            push(bi, i, i, f);
        }
    }
    let (offset, obj) = substitute(&msdp.objective);
    let mut c_full = vec![T::zero(); free.len()];
    for (j, v) in obj {
        c_full[var_of[j]] = v;
    }

    let matrices: Vec<Vec<Entry<T>>> = matrices.into_iter().map(canonical_entries).collect();
    // drop variables that occur nowhere; they are set to zero on recovery
    let keep: Vec<bool> = (0..free.len())
        .map(|k| !matrices[k].is_empty() || !c_full[k].is_zero())
        .collect();
    let mut new_index = vec![usize::MAX; free.len()];
    let mut next = 0;
    for k in 0..free.len() {
        if keep[k] {
            new_index[k] = next;
            next += 1;
        }
    }
    let c: Vec<T> = (0..free.len()).filter(|&k| keep[k]).map(|k| c_full[k]).collect();
    let matrices: Vec<Vec<Entry<T>>> = matrices
        .into_iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(m, _)| m)
        .collect();

    let mut map = MomentMap {
        constant: vec![T::zero(); nmom],
        coefs: vec![Vec::new(); nmom],
    };
    for id in 0..nmom {
        let (c0, terms) = affine(id);
        map.constant[id] = c0;
        map.coefs[id] = terms
            .into_iter()
            .filter_map(|(j, v)| {
                let k = new_index[var_of[j]];
                (k != usize::MAX).then_some((k, v))
            })
            .collect();
    }
    let sdp = SdpProblem {
        blocks,
        c,
        constant: canonical_entries(constant),
        matrices,
        offset,
    };
    Ok((sdp, map))
}

/// Converts a moment relaxation into an SDPA-form problem.
pub fn to_standard_form<T: Scalar>(msdp: &MomentSdp<T>) -> Result<SdpProblem<T>> {
    standard_form_with_map(msdp).map(|(sdp, _)| sdp)
}
