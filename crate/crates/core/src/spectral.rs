//! Hermitian eigensolvers (dense and matrix-free), operator norms, spectra
//! as point sets and the Hausdorff distance between them.

use nalgebra::SymmetricEigen;

use crate::linalg::{hermitian_deviation, symmetrize, CMat, C64, ZERO};
use crate::seed::SeedSpec;
use crate::{Error, Result};

/// Hermiticity tolerance (relative) accepted by the dense routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigen-decomposition of a dense Hermitian matrix, eigenvalues ascending.
pub struct HermEig {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: CMat,
}

fn checked_hermitian(h: &CMat) -> Result<CMat> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("{}×{} matrix is not square", h.nrows(), h.ncols())));
    }
    let dev = hermitian_deviation(h);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let mut m = h.clone();
    symmetrize(&mut m);
    Ok(m)
}

pub fn herm_eig(h: &CMat) -> Result<HermEig> {
    let m = checked_hermitian(h)?;
    let k = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermEig { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn herm_eigenvalues(h: &CMat) -> Result<Vec<f64>> {
    let m = checked_hermitian(h)?;
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Operator norm: `max|λ|` for Hermitian input, otherwise `√λ_max(A*A)`.
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    if a.is_square() && hermitian_deviation(a) <= 1e-14 {
        let v = herm_eigenvalues(a).expect("hermitian checked");
        return v.first().unwrap().abs().max(v.last().unwrap().abs());
    }
    let mut g = a.adjoint() * a;
    symmetrize(&mut g);
    let top = g.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    top.max(0.0).sqrt()
}

type ApplyFn<'a> = Box<dyn Fn(&[C64], &mut [C64]) + 'a>;

/// A Hermitian linear map given only by its action, with an optional
/// orthonormal deflation subspace that iterative solvers project out.
pub struct HermOpHandle<'a> {
    dim: usize,
    apply: ApplyFn<'a>,
    deflation: Vec<Vec<C64>>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    // ⟨a, b⟩ = Σ conj(a_i) b_i
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn random_vector(n: usize, seed: &SeedSpec) -> Vec<C64> {
    let mut g = seed.stream();
    (0..n).map(|_| C64::new(g.gaussian(), g.gaussian())).collect()
}

impl<'a> HermOpHandle<'a> {
    /// Wrap `apply` (writes `H·x` into `y`). Hermiticity is spot-checked on two
    /// random vectors.
    pub fn new<F>(dim: usize, apply: F) -> Result<Self>
    where
        F: Fn(&[C64], &mut [C64]) + 'a,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dimension must be ≥ 1".into()));
        }
        let handle = Self { dim, apply: Box::new(apply), deflation: Vec::new() };
        let v = random_vector(dim, &SeedSpec::with_path(0x5eed, &[dim as u64, 1]));
        let w = random_vector(dim, &SeedSpec::with_path(0x5eed, &[dim as u64, 2]));
        let hv = handle.apply_raw(&v);
        let hw = handle.apply_raw(&w);
        let lhs = dot(&hv, &w);
        let rhs = dot(&v, &hw);
        let scale = norm(&hv) * norm(&w) + norm(&v) * norm(&hw);
        let dev = (lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE);
        if scale > 0.0 && dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        Ok(handle)
    }

    /// Dense Hermitian matrix as a handle.
    pub fn from_dense(h: &'a CMat) -> Result<Self> {
        let dev = hermitian_deviation(h);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let n = h.nrows();
        Self::new(n, move |x, y| {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = ZERO;
                for (j, xj) in x.iter().enumerate() {
                    *yi += h[(i, j)] * xj;
                }
            }
        })
    }

    /// Add vectors to the deflation subspace (re-orthonormalized; near-dependent vectors dropped).
    pub fn with_deflation(mut self, vectors: Vec<Vec<C64>>) -> Result<Self> {
        for mut v in vectors {
            if v.len() != self.dim {
                return Err(Error::Dimension(format!("deflation vector of length {} for dim {}", v.len(), self.dim)));
            }
            let original = norm(&v);
            for _ in 0..2 {
                for q in &self.deflation {
                    let c = dot(q, &v);
                    axpy(-c, q, &mut v);
                }
            }
            let nv = norm(&v);
            if nv > 1e-10 * original.max(f64::MIN_POSITIVE) && nv > 0.0 {
                v.iter_mut().for_each(|z| *z /= nv);
                self.deflation.push(v);
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn deflation(&self) -> &[Vec<C64>] {
        &self.deflation
    }

    fn apply_raw(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim];
        (self.apply)(x, &mut y);
        y
    }

    fn project_out(&self, v: &mut [C64]) {
        for q in &self.deflation {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }

    /// `P H P x` with `P` the projector onto the complement of the deflation space.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        if self.deflation.is_empty() {
            return self.apply_raw(x);
        }
        let mut px = x.to_vec();
        self.project_out(&mut px);
        let mut y = self.apply_raw(&px);
        self.project_out(&mut y);
        y
    }
}

/// Extreme Ritz pairs from [`lanczos_extremes`].
#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub min: f64,
    pub max: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Residual bounds `|β_m s_m|` for the two returned Ritz values.
    pub residual_min: f64,
    pub residual_max: f64,
    pub min_vector: Vec<C64>,
    pub max_vector: Vec<C64>,
}

/// Lanczos with full reorthogonalization for the smallest and largest
/// eigenvalue of `h` restricted to the complement of its deflation space.
///
/// Stops when both Ritz residuals are ≤ `tol·(1 + |θ|)`, when the Krylov
/// space becomes invariant, or after `max_iter` steps; in the last case
/// `converged` is false.
pub fn lanczos_extremes(h: &HermOpHandle<'_>, tol: f64, max_iter: usize, seed: &SeedSpec) -> Result<LanczosResult> {
    let n = h.dim();
    let n_eff = n.saturating_sub(h.deflation.len());
    if n_eff == 0 {
        return Err(Error::InvalidArgument("deflation space fills the whole space".into()));
    }
    let steps = max_iter.max(1).min(n_eff);

    let mut v = random_vector(n, seed);
    h.project_out(&mut v);
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::InvalidArgument("random start vector lies in the deflation space".into()));
    }
    v.iter_mut().for_each(|z| *z /= nv);

    let mut basis: Vec<Vec<C64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;

    loop {
        let j = alphas.len();
        let mut w = h.apply(&basis[j]);
        let alpha = dot(&basis[j], &w).re;
        axpy(C64::new(-alpha, 0.0), &basis[j], &mut w);
        if j > 0 {
            axpy(C64::new(-betas[j - 1], 0.0), &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
            h.project_out(&mut w);
        }
        let beta = norm(&w);
        alphas.push(alpha);
        scale = scale.max(alpha.abs() + beta + betas.last().copied().unwrap_or(0.0));

        let m = alphas.len();
        let invariant = beta <= 1e-13 * scale.max(f64::MIN_POSITIVE);
        let last = m >= steps;
        let check = invariant || last || m <= 60 || m % 5 == 0;
        if check {
            let (theta_lo, s_lo) = tridiagonal_extreme(&alphas, &betas, false);
            let (theta_hi, s_hi) = tridiagonal_extreme(&alphas, &betas, true);
            let res_lo = (beta * s_lo[m - 1]).abs();
            let res_hi = (beta * s_hi[m - 1]).abs();
            let ok = res_lo <= tol * (1.0 + theta_lo.abs()) && res_hi <= tol * (1.0 + theta_hi.abs());
            if ok || invariant || last {
                let ritz = |s: &[f64]| {
                    let mut y = vec![ZERO; n];
                    for (q, &c) in basis.iter().zip(s) {
                        axpy(C64::new(c, 0.0), q, &mut y);
                    }
                    y
                };
                return Ok(LanczosResult {
                    min: theta_lo,
                    max: theta_hi,
                    converged: ok || invariant || m == n_eff,
                    iterations: m,
                    residual_min: if invariant { 0.0 } else { res_lo },
                    residual_max: if invariant { 0.0 } else { res_hi },
                    min_vector: ritz(&s_lo),
                    max_vector: ritz(&s_hi),
                });
            }
        }
        betas.push(beta);
        w.iter_mut().for_each(|z| *z /= beta);
        basis.push(w);
    }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `a` and off-diagonal `b`, by Sturm sequence.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] / d };
        d = a[i] - x - off;
        if d == 0.0 {
            d = -f64::EPSILON * (a[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest or largest eigenpair of a symmetric tridiagonal matrix: the value
/// by bisection, the unit vector by inverse iteration.
fn tridiagonal_extreme(a: &[f64], b: &[f64], largest: bool) -> (f64, Vec<f64>) {
    let m = a.len();
    if m == 1 {
        return (a[0], vec![1.0]);
    }
    let radius = |i: usize| (if i > 0 { b[i - 1].abs() } else { 0.0 }) + (if i + 1 < m { b[i].abs() } else { 0.0 });
    let mut lo = (0..m).map(|i| a[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..m).map(|i| a[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let target = if largest { m - 1 } else { 0 };
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, b, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);

    // Inverse iteration with a slightly perturbed shift so the solve stays finite.
    let shift = theta + if largest { 1.0 } else { -1.0 } * 64.0 * f64::EPSILON * scale;
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..3 {
        let mut y = solve_shifted_tridiagonal(a, b, shift, &x);
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !ny.is_finite() || ny == 0.0 {
            break;
        }
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
    }
    (theta, x)
}

/// Solve `(T − σI) y = rhs` by Gaussian elimination with partial pivoting.
fn solve_shifted_tridiagonal(a: &[f64], b: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let m = a.len();
    // Row i holds (diag, super, super-super) after pivoting.
    let mut d: Vec<f64> = a.iter().map(|v| v - sigma).collect();
    let mut du: Vec<f64> = (0..m).map(|i| if i + 1 < m { b[i] } else { 0.0 }).collect();
    let mut du2 = vec![0.0; m];
    let mut dl: Vec<f64> = (0..m).map(|i| if i + 1 < m { b[i] } else { 0.0 }).collect();
    let mut y = rhs.to_vec();
    let tiny = f64::EPSILON * a.iter().chain(b).fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..m - 1 {
        if dl[i].abs() > d[i].abs() {
            // Swap rows i and i+1.
            let (ni, nu, nu2) = (dl[i], d[i + 1], du[i + 1]);
            let (oi, ou) = (d[i], du[i]);
            d[i] = ni;
            du[i] = nu;
            du2[i] = nu2;
            y.swap(i, i + 1);
            let f = oi / ni;
            d[i + 1] = ou - f * nu;
            du[i + 1] = -f * nu2;
            y[i + 1] -= f * y[i];
            dl[i] = f;
        } else {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            y[i + 1] -= f * y[i];
            dl[i] = f;
        }
    }
    if d[m - 1] == 0.0 {
        d[m - 1] = tiny;
    }
    for i in (0..m).rev() {
        let mut v = y[i];
        if i + 1 < m {
            v -= du[i] * y[i + 1];
        }
        if i + 2 < m {
            v -= du2[i] * y[i + 2];
        }
        y[i] = v / d[i];
    }
    y
}

/// A finite spectrum with numerically repeated eigenvalues collapsed.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSet {
    points: Vec<f64>,
    source_dim: usize,
}

impl SpectrumSet {
    /// Sort `points` and merge any two closer than `resolution`.
    pub fn from_points(mut points: Vec<f64>, resolution: f64, source_dim: usize) -> Result<Self> {
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("spectrum points must be finite".into()));
        }
        points.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::with_capacity(points.len());
        for x in points {
            match out.last() {
                Some(&y) if x - y <= resolution => {}
                _ => out.push(x),
            }
        }
        Ok(Self { points: out, source_dim })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `x` to the set.
    fn distance_to(&self, x: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|&y| y < x);
        let mut d = f64::INFINITY;
        if i < p.len() {
            d = d.min(p[i] - x);
        }
        if i > 0 {
            d = d.min(x - p[i - 1]);
        }
        d
    }
}

/// Spectrum of a Hermitian matrix, deduplicated at `1e-9·(1 + ‖H‖)`.
pub fn spectrum_set(h: &CMat) -> Result<SpectrumSet> {
    let values = herm_eigenvalues(h)?;
    let norm = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    SpectrumSet::from_points(values, 1e-9 * (1.0 + norm), h.nrows())
}

/// Second argument of [`hausdorff`].
#[derive(Clone, Debug)]
pub enum HausdorffTarget {
    Set(SpectrumSet),
    /// Finite union of closed intervals `[a, b]`, `a ≤ b`.
    Intervals(Vec<(f64, f64)>),
}

impl From<SpectrumSet> for HausdorffTarget {
    fn from(s: SpectrumSet) -> Self {
        Self::Set(s)
    }
}

/// Hausdorff distance `max(sup_{e∈E} d(e,F), sup_{f∈F} d(f,E))`.
pub fn hausdorff(e: &SpectrumSet, f: &HausdorffTarget) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::InvalidArgument("Hausdorff distance of an empty set".into()));
    }
    match f {
        HausdorffTarget::Set(f) => {
            if f.is_empty() {
                return Err(Error::InvalidArgument("Hausdorff distance of an empty set".into()));
            }
            let d1 = e.points.iter().map(|&x| f.distance_to(x)).fold(0.0, f64::max);
            let d2 = f.points.iter().map(|&x| e.distance_to(x)).fold(0.0, f64::max);
            Ok(d1.max(d2))
        }
        HausdorffTarget::Intervals(ivs) => {
            if ivs.is_empty() {
                return Err(Error::InvalidArgument("Hausdorff distance of an empty set".into()));
            }
            if ivs.iter().any(|&(a, b)| !(a <= b)) {
                return Err(Error::InvalidArgument("interval with a > b".into()));
            }
            let to_intervals = |x: f64| {
                ivs.iter()
                    .map(|&(a, b)| if x < a { a - x } else if x > b { x - b } else { 0.0 })
                    .fold(f64::INFINITY, f64::min)
            };
            let d1 = e.points.iter().map(|&x| to_intervals(x)).fold(0.0, f64::max);
            // d(·, E) on [a, b] is piecewise linear; its maximum sits at an
            // endpoint or at a midpoint between consecutive points of E.
            let mut d2 = 0.0f64;
            for &(a, b) in ivs {
                d2 = d2.max(e.distance_to(a)).max(e.distance_to(b));
                for w in e.points.windows(2) {
                    let mid = 0.5 * (w[0] + w[1]);
                    if mid > a && mid < b {
                        d2 = d2.max(e.distance_to(mid));
                    }
                }
            }
            Ok(d1.max(d2))
        }
    }
}
