//! Infeasible primal-dual path-following method with the HKM search
//! direction and Mehrotra predictor-corrector steps.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::presolve::{facial_reduction, independent_vars};
use super::SdpProblem;
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped early with every measure within a relaxed tolerance.
    NearOptimal,
    /// The moment side (P) has no feasible point.
    Infeasible,
    /// The moment side (P) is unbounded below.
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_success(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration-limit",
            SolveStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmOptions<T> {
    /// Relative duality gap tolerance.
    pub gap_tol: T,
    /// Relative primal and dual residual tolerance.
    pub feas_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for IpmOptions<T> {
    fn default() -> Self {
        Self {
            gap_tol: T::of(1e-8),
            feas_tol: T::of(1e-8),
            max_iter: 200,
        }
    }
}

impl<T: Scalar> IpmOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            gap_tol: tol,
            feas_tol: tol,
            ..Self::default()
        }
    }

    fn relaxed(&self) -> T {
        (self.gap_tol.max(self.feas_tol) * T::of(100.0)).max(T::of(1e-6))
    }
}

/// One line of the iteration log, taken before the step of that iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateLog<T> {
    pub iteration: usize,
    pub primal_objective: T,
    pub dual_objective: T,
    pub relative_gap: T,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub mu: T,
    /// `pobj + |x'p| + |<R, Y>|`, an upper bound on `dobj` valid at any
    /// iterate with `Z, Y` positive semidefinite (`p`, `R` are the residuals).
    pub weak_duality_bound: T,
    pub step_primal: T,
    pub step_dual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub status: SolveStatus,
    /// Moment-side objective `c'x + offset`.
    pub primal_objective: T,
    /// Sum-of-squares-side objective `<F_0, Y> + offset`.
    pub dual_objective: T,
    pub gap: T,
    pub relative_gap: T,
    pub iterations: usize,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub x: Vec<T>,
    pub z: Vec<DMatrix<T>>,
    pub y: Vec<DMatrix<T>>,
    pub log: Vec<IterateLog<T>>,
}

type Blocks<T> = Vec<DMatrix<T>>;

/// Iterations without a new best iterate before giving up.
const NO_PROGRESS: usize = 15;
/// Full symmetric entry list `(row, col, value)` of one data matrix in one block.
type Sparse<T> = Vec<(usize, usize, T)>;

struct Data<T> {
    dims: Vec<usize>,
    f0: Blocks<T>,
    c: Vec<T>,
    /// Per active variable: `(block, entries)`.
    f: Vec<Vec<(usize, Sparse<T>)>>,
    /// Per block: `(active variable, position in f[var])`.
    by_block: Vec<Vec<(usize, usize)>>,
}

fn zeros<T: Scalar>(dims: &[usize]) -> Blocks<T> {
    dims.iter().map(|&n| DMatrix::zeros(n, n)).collect()
}

fn identity<T: Scalar>(dims: &[usize], s: T) -> Blocks<T> {
    dims.iter().map(|&n| DMatrix::identity(n, n) * s).collect()
}

fn dot<T: Scalar>(a: &Blocks<T>, b: &Blocks<T>) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + x.dot(y))
}

fn frob<T: Scalar>(a: &Blocks<T>) -> T {
    dot(a, a).sqrt()
}

fn sym<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.transpose()) * T::of(0.5)
}

impl<T: Scalar> Data<T> {
    fn apply(&self, x: &[T]) -> Blocks<T> {
        let mut out = zeros(&self.dims);
        for (fi, &xi) in self.f.iter().zip(x) {
            for (b, ent) in fi {
                for &(r, c, v) in ent {
                    out[*b][(r, c)] += v * xi;
                }
            }
        }
        out
    }

    /// `<F_i, M>` for every active variable.
    fn traces(&self, m: &Blocks<T>) -> Vec<T> {
        self.f
            .iter()
            .map(|fi| {
                fi.iter().fold(T::zero(), |s, (b, ent)| {
                    ent.iter().fold(s, |s, &(r, c, v)| s + v * m[*b][(c, r)])
                })
            })
            .collect()
    }

    /// Gram matrix `G_ij = <F_i, F_j>`.
    fn gram(&self) -> DMatrix<T> {
        let m = self.f.len();
        let mut at: std::collections::HashMap<(usize, usize, usize), Vec<(usize, T)>> =
            std::collections::HashMap::new();
        for (i, fi) in self.f.iter().enumerate() {
            for (b, ent) in fi {
                for &(r, c, v) in ent {
                    at.entry((*b, r, c)).or_default().push((i, v));
                }
            }
        }
        let mut g = DMatrix::zeros(m, m);
        for list in at.values() {
            for &(i, a) in list {
                for &(j, b) in list {
                    g[(i, j)] += a * b;
                }
            }
        }
        g
    }

    /// `sum_i w_i F_i`.
    fn adjoint(&self, w: &[T]) -> Blocks<T> {
        self.apply(w)
    }

    /// Schur complement `H_ij = <F_i, Z^-1 F_j Y>`.
    fn schur(&self, zinv: &Blocks<T>, y: &Blocks<T>) -> DMatrix<T> {
        let m = self.f.len();
        let mut h = DMatrix::zeros(m, m);
        for (b, vars) in self.by_block.iter().enumerate() {
            let n = self.dims[b];
            let (zi, yb) = (&zinv[b], &y[b]);
            let mut g = DMatrix::<T>::zeros(n, n);
            for (pj, &(j, kj)) in vars.iter().enumerate() {
                g.fill(T::zero());
                for &(r, c, v) in &self.f[j][kj].1 {
                    for k in 0..n {
                        let w = v * yb[(c, k)];
                        if w.is_zero() {
                            continue;
                        }
                        for l in 0..n {
                            g[(l, k)] += w * zi[(l, r)];
                        }
                    }
                }
                for &(i, ki) in &vars[..=pj] {
                    let s = self.f[i][ki]
                        .1
                        .iter()
                        .fold(T::zero(), |s, &(r, c, w)| s + w * g[(c, r)]);
                    h[(i, j)] += s;
                }
            }
        }
        for j in 0..m {
            for i in 0..j {
                h[(j, i)] = h[(i, j)];
            }
        }
        h
    }
}

/// `X^{-1/2}`-type factor `W` with `W X W' = I`, from Cholesky or, for a
/// numerically singular `X`, from its clamped eigen-decomposition.
fn whitening<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    if let Some(ch) = x.clone().cholesky() {
        let n = x.nrows();
        if let Some(w) = ch.l().solve_lower_triangular(&DMatrix::identity(n, n)) {
            return w;
        }
    }
    let eig = SymmetricEigen::new(x.clone());
    let lmax = eig.eigenvalues.iter().fold(T::zero(), |a, &l| a.max(l));
    let floor = (lmax * T::of(1e-15)).max(T::default_epsilon() * T::default_epsilon());
    let d = eig.eigenvalues.map(|l| T::one() / l.max(floor).sqrt());
    DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Largest `a <= 1` with `X + a/gamma dX` PSD, scaled by `gamma`.
fn step_length<T: Scalar>(x: &Blocks<T>, dx: &Blocks<T>, gamma: T) -> T {
    let mut amax = T::one() / gamma;
    for (xb, db) in x.iter().zip(dx) {
        let w = whitening(xb);
        let m = &w * db * w.transpose();
        let lmin = SymmetricEigen::new(sym(&m))
            .eigenvalues
            .iter()
            .fold(T::max_value().unwrap_or(T::one()), |a, &b| a.min(b));
        if lmin < T::zero() {
            amax = amax.min(-T::one() / lmin);
        }
    }
    (gamma * amax).min(T::one())
}

fn inverse<T: Scalar>(x: &Blocks<T>) -> Option<Blocks<T>> {
    x.iter().map(|b| b.clone().cholesky().map(|c| c.inverse())).collect()
}

/// Cholesky factor of the Jacobi-scaled Schur matrix with a small diagonal
/// shift, retried once with a larger shift.
struct SchurFactor<T: Scalar> {
    chol: nalgebra::Cholesky<T, nalgebra::Dyn>,
    scale: DVector<T>,
}

impl<T: Scalar> SchurFactor<T> {
    fn new(h: &DMatrix<T>) -> Option<Self> {
        let m = h.nrows();
        let scale = DVector::from_fn(m, |i, _| {
            let d = h[(i, i)];
            if d > T::zero() {
                T::one() / d.sqrt()
            } else {
                T::one()
            }
        });
        for reg in [1e-10, 1e-8] {
            let mut hs = DMatrix::from_fn(m, m, |i, j| h[(i, j)] * scale[i] * scale[j]);
            for i in 0..m {
                hs[(i, i)] += T::of(reg);
            }
            if let Some(chol) = hs.cholesky() {
                return Some(Self { chol, scale });
            }
        }
        None
    }

    fn solve(&self, rhs: &DVector<T>) -> DVector<T> {
        let b = rhs.component_mul(&self.scale);
        self.chol.solve(&b).component_mul(&self.scale)
    }
}

/// Solves an SDPA-form problem from the standard infeasible starting point.
///
/// Block rows that every data matrix annihilates are removed first (see
/// [`super::presolve`]); the returned `Z` and `Y` have the original shapes.
pub fn solve_ipm<T: Scalar>(sdp: &SdpProblem<T>, opts: &IpmOptions<T>) -> Result<SolveResult<T>> {
    sdp.validate()?;
    let red = facial_reduction(sdp);
    let mut r = solve_core(&red.problem, opts);
    let dims: Vec<usize> = sdp.blocks.iter().map(|b| b.size()).collect();
    let mut z = zeros(&dims);
    for e in &sdp.constant {
        z[e.block][(e.row, e.col)] -= e.value;
        if e.row != e.col {
            z[e.block][(e.col, e.row)] -= e.value;
        }
    }
    for (m, &xi) in sdp.matrices.iter().zip(&r.x) {
        for e in m {
            z[e.block][(e.row, e.col)] += e.value * xi;
            if e.row != e.col {
                z[e.block][(e.col, e.row)] += e.value * xi;
            }
        }
    }
    let mut y = zeros(&dims);
    for (b, k) in red.kept.iter().enumerate() {
        if let Some((nb, rows)) = k {
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &rj) in rows.iter().enumerate() {
                    y[b][(ri, rj)] = r.y[*nb][(i, j)];
                }
            }
        }
    }
    r.z = z;
    r.y = y;
    Ok(r)
}

fn solve_core<T: Scalar>(sdp: &SdpProblem<T>, opts: &IpmOptions<T>) -> SolveResult<T> {
    let dims: Vec<usize> = sdp.blocks.iter().map(|b| b.size()).collect();
    let ntot: usize = dims.iter().sum();
    let independent = independent_vars(sdp);
    let active: Vec<usize> = independent.clone().unwrap_or_default();

    let mut f0 = zeros(&dims);
    for e in &sdp.constant {
        f0[e.block][(e.row, e.col)] = e.value;
        f0[e.block][(e.col, e.row)] = e.value;
    }
    let mut f = Vec::with_capacity(active.len());
    let mut by_block = vec![Vec::new(); dims.len()];
    for (ai, &i) in active.iter().enumerate() {
        let mut per: Vec<(usize, Sparse<T>)> = Vec::new();
        for e in &sdp.matrices[i] {
            if per.last().map(|p| p.0) != Some(e.block) {
                by_block[e.block].push((ai, per.len()));
                per.push((e.block, Vec::new()));
            }
            let ent = &mut per.last_mut().expect("just pushed").1;
            ent.push((e.row, e.col, e.value));
            if e.row != e.col {
                ent.push((e.col, e.row, e.value));
            }
        }
        f.push(per);
    }
    let data = Data {
        dims: dims.clone(),
        f0,
        c: active.iter().map(|&i| sdp.c[i]).collect(),
        f,
        by_block,
    };

    let trivial = |status: SolveStatus, p: T, d: T| SolveResult {
        status,
        primal_objective: p,
        dual_objective: d,
        gap: p - d,
        relative_gap: T::zero(),
        iterations: 0,
        primal_infeasibility: T::zero(),
        dual_infeasibility: T::zero(),
        x: vec![T::zero(); sdp.num_vars()],
        z: zeros(&dims),
        y: zeros(&dims),
        log: Vec::new(),
    };
    // a cost on a direction that leaves Z unchanged makes (P) unbounded
    let free_cost = (0..sdp.num_vars()).any(|i| sdp.matrices[i].is_empty() && !sdp.c[i].is_zero());
    if free_cost || independent.is_none() {
        let inf = T::max_value().unwrap_or(T::of(1e300));
        return trivial(SolveStatus::Unbounded, -inf, -inf);
    }
    if ntot == 0 {
        return trivial(SolveStatus::Optimal, sdp.offset, sdp.offset);
    }

    let n = T::from_usize(ntot).expect("dimension fits");
    let gram = data.gram().cholesky();
    let norm_f: Vec<T> = data
        .f
        .iter()
        .map(|fi| {
            fi.iter()
                .flat_map(|(_, e)| e)
                .fold(T::zero(), |s, &(_, _, v)| s + v * v)
                .sqrt()
        })
        .collect();
    let norm_f0 = frob(&data.f0);
    let norm_c = data.c.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
    let alpha = data
        .c
        .iter()
        .zip(&norm_f)
        .fold(T::one(), |a, (&ci, &fi)| a.max((T::one() + ci.abs()) / (T::one() + fi)))
        * n;
    let beta = (T::one() + norm_f.iter().fold(norm_f0, |a, &b| a.max(b))) / n.sqrt();
    let mut y = identity(&dims, T::of(10.0) * alpha);
    let mut z = identity(&dims, T::of(10.0) * beta);
    let mut x = vec![T::zero(); data.c.len()];

    let gamma = T::of(0.95);
    let mut log = Vec::new();
    let mut stalled = 0;
    let big = T::of(1e10);
    let near = opts.relaxed();
    let mut status = SolveStatus::IterationLimit;
    let mut iterations = 0;
    let mut last = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    // best iterate so far by max(relgap, pinf, dinf), returned when later
    // iterates lose accuracy
    let mut best: Option<(T, usize, Vec<T>, Blocks<T>, Blocks<T>, (T, T, T, T, T))> = None;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let fx = data.apply(&x);
        let rd: Blocks<T> = (0..dims.len()).map(|b| &data.f0[b] + &z[b] - &fx[b]).collect();
        let fy = data.traces(&y);
        let p: Vec<T> = data.c.iter().zip(&fy).map(|(&c, &t)| c - t).collect();
        let pobj = data.c.iter().zip(&x).fold(T::zero(), |s, (&c, &v)| s + c * v);
        let dobj = dot(&data.f0, &y);
        let mu = dot(&z, &y) / n;
        let pinf = frob(&rd) / (T::one() + norm_f0);
        let dinf = p.iter().fold(T::zero(), |s, &v| s + v * v).sqrt() / (T::one() + norm_c);
        let relgap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
        let xp = x.iter().zip(&p).fold(T::zero(), |s, (&a, &b)| s + a * b);
        log.push(IterateLog {
            iteration: iter,
            primal_objective: pobj + sdp.offset,
            dual_objective: dobj + sdp.offset,
            relative_gap: relgap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            mu,
            weak_duality_bound: pobj + sdp.offset + xp.abs() + dot(&rd, &y).abs(),
            step_primal: T::zero(),
            step_dual: T::zero(),
        });
        last = (pobj, dobj, relgap, pinf, dinf);
        let merit = relgap.max(pinf).max(dinf);
        if best.as_ref().map_or(true, |b| merit < b.0) {
            best = Some((merit, iter, x.clone(), z.clone(), y.clone(), last));
        } else if best.as_ref().is_some_and(|b| iter - b.1 >= NO_PROGRESS) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        if relgap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        // Y / dobj and x / |pobj| approach infeasibility certificates
        let fy_norm = fy.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
        if dobj > big.min(T::one() / opts.feas_tol) && fy_norm / dobj <= opts.feas_tol {
            status = SolveStatus::Infeasible;
            break;
        }
        let f0_rd: Blocks<T> = (0..dims.len()).map(|b| &data.f0[b] - &rd[b]).collect();
        if -pobj > big.min(T::one() / opts.feas_tol) && frob(&f0_rd) / -pobj <= opts.feas_tol {
            status = SolveStatus::Unbounded;
            break;
        }
        if !(pobj.is_finite() && dobj.is_finite() && pinf.is_finite() && dinf.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        let fail = SolveStatus::NumericalFailure;
        let Some(zinv) = inverse(&z) else {
            status = fail;
            break;
        };
        let h = data.schur(&zinv, &y);
        let Some(chol) = SchurFactor::new(&h) else {
            status = fail;
            break;
        };
        let zr_y: Blocks<T> = (0..dims.len()).map(|b| &zinv[b] * &rd[b] * &y[b]).collect();

        let direction = |m: &Blocks<T>, extra: Option<&Blocks<T>>, sigma_mu: T| {
            let fm = data.traces(m);
            let rhs = DVector::from_iterator(
                x.len(),
                fm.iter().zip(&data.c).map(|(&t, &c)| t - c),
            );
            let mut dx = chol.solve(&rhs);
            // refinement against the unregularized matrix
            for _ in 0..3 {
                let res = &rhs - &h * &dx;
                if res.norm() <= T::of(1e-14) * (T::one() + rhs.norm()) {
                    break;
                }
                dx += chol.solve(&res);
            }
            let dxv: Vec<T> = dx.iter().copied().collect();
            let fdx = data.apply(&dxv);
            let dz: Blocks<T> = (0..dims.len()).map(|b| &fdx[b] - &rd[b]).collect();
            let dy: Blocks<T> = (0..dims.len())
                .map(|b| {
                    let mut d = &zinv[b] * sigma_mu - &y[b] - sym(&(&zinv[b] * &dz[b] * &y[b]));
                    if let Some(e) = extra {
                        d -= sym(&e[b]);
                    }
                    d
                })
                .collect();
            // project dY back onto <F_i, Y + dY> = c_i, which an inexact
            // Schur solve leaves slightly violated
            let mut dy = dy;
            if let Some(gc) = &gram {
                let err = DVector::from_iterator(
                    p.len(),
                    data.traces(&dy).iter().zip(&p).map(|(&a, &b)| b - a),
                );
                let w: Vec<T> = gc.solve(&err).iter().copied().collect();
                for (d, a) in dy.iter_mut().zip(data.adjoint(&w)) {
                    *d += a;
                }
            }
            (dxv, dz, dy)
        };

        // predictor
        let (_, dz_a, dy_a) = direction(&zr_y, None, T::zero());
        let ap = step_length(&z, &dz_a, T::one());
        let ad = step_length(&y, &dy_a, T::one());
        let z_a: Blocks<T> = (0..dims.len()).map(|b| &z[b] + &dz_a[b] * ap).collect();
        let y_a: Blocks<T> = (0..dims.len()).map(|b| &y[b] + &dy_a[b] * ad).collect();
        let mu_aff = dot(&z_a, &y_a) / n;
        let sigma = (mu_aff / mu).max(T::zero()).min(T::one()).powi(3);

        // corrector
        let second: Blocks<T> = (0..dims.len()).map(|b| &zinv[b] * &dz_a[b] * &dy_a[b]).collect();
        let m: Blocks<T> = (0..dims.len())
            .map(|b| &zinv[b] * (sigma * mu) + &zr_y[b] - &second[b])
            .collect();
        let (dx, dz, dy) = direction(&m, Some(&second), sigma * mu);
        let ap = step_length(&z, &dz, gamma);
        let ad = step_length(&y, &dy, gamma);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += *d * ap;
        }
        for b in 0..dims.len() {
            z[b] = sym(&(&z[b] + &dz[b] * ap));
            y[b] = sym(&(&y[b] + &dy[b] * ad));
        }
        let entry = log.last_mut().expect("logged");
        entry.step_primal = ap;
        entry.step_dual = ad;
        if ap < T::of(1e-8) && ad < T::of(1e-8) {
            stalled += 1;
            if stalled >= 3 {
                status = fail;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    if matches!(status, SolveStatus::IterationLimit | SolveStatus::NumericalFailure) {
        if let Some((merit, _, bx, bz, by, bl)) = best {
            if merit < last.2.max(last.3).max(last.4) {
                (x, z, y, last) = (bx, bz, by, bl);
            }
        }
        let (_, _, relgap, pinf, dinf) = last;
        let tol = near.max(opts.feas_tol);
        if relgap <= near && pinf <= tol && dinf <= tol {
            status = SolveStatus::NearOptimal;
        }
    }
    let mut xfull = vec![T::zero(); sdp.num_vars()];
    for (ai, &i) in active.iter().enumerate() {
        xfull[i] = x[ai];
    }
    let (pobj, dobj, relgap, pinf, dinf) = last;
    SolveResult {
        status,
        primal_objective: pobj + sdp.offset,
        dual_objective: dobj + sdp.offset,
        gap: pobj - dobj,
        relative_gap: relgap,
        iterations,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        x: xfull,
        z,
        y,
        log,
    }
}
