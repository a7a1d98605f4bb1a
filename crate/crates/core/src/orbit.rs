//! The unitary orbit pseudometric
//! `d^orb(A, B) = inf_U (Σ_j ‖U A_j U* − B_j‖₂²)^{1/2}` with the normalized
//! norm `‖C‖₂ = √(tr C*C)`: an exact oracle for single Hermitian matrices,
//! heuristic upper bounds, certified lower bounds and covering numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_haar_unitary, MatTuple};
use crate::linalg::{hermitian_deviation, hermitian_part, identity, imaginary_part, polar_unitary, unitary_deviation, CMat, C64};
use crate::seed::SeedSpec;
use crate::spectral::{herm_eig, herm_eigenvalues, HERMITIAN_TOL};
use crate::{Error, Result};

fn check_hermitian(a: &CMat) -> Result<()> {
    let dev = hermitian_deviation(a);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

fn sorted_distance(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    (x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / k).sqrt()
}

/// Exact `d^orb` of two Hermitian matrices: the distance between their
/// ascending spectra (Hoffman–Wielandt).
pub fn dorb_exact_herm1(a: &CMat, b: &CMat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    check_hermitian(a)?;
    check_hermitian(b)?;
    Ok(sorted_distance(&herm_eigenvalues(a)?, &herm_eigenvalues(b)?))
}

/// Whether a reported distance is exact or only an upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug)]
pub struct OrbitResult {
    /// `√g(U)` at the best unitary found.
    pub value: f64,
    pub minimizer: CMat,
    pub certified: Certification,
    pub restarts_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    /// Number of starting points: identity, eigenbasis alignment, then Haar samples.
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when `g` falls below this value.
    pub value_tol: f64,
    /// Stop when the Riemannian gradient norm falls below this value.
    pub grad_tol: f64,
    pub seed: SeedSpec,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 2000, value_tol: 1e-26, grad_tol: 1e-14, seed: SeedSpec::new(0x0b17) }
    }
}

fn check_pair(a: &MatTuple, b: &MatTuple) -> Result<()> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(Error::Dimension(format!("{}-tuple of k={} vs {}-tuple of k={}", a.len(), a.dim(), b.len(), b.dim())));
    }
    Ok(())
}

/// `g(U) = Σ_j ‖U A_j U* − B_j‖₂²` and the matrices `M_j = U A_j U*`.
fn objective(u: &CMat, a: &MatTuple, b: &MatTuple) -> (f64, Vec<CMat>) {
    let ua = u.adjoint();
    let k = u.nrows() as f64;
    let mut g = 0.0;
    let ms: Vec<CMat> = a
        .matrices()
        .iter()
        .zip(b.matrices())
        .map(|(aj, bj)| {
            let m = u * aj * &ua;
            g += (&m - bj).norm_squared() / k;
            m
        })
        .collect();
    (g, ms)
}

/// Skew-Hermitian `Ξ` with `g(e^{tW}U) = g(U) + t·Re tr(W*Ξ) + O(t²)`; the
/// steepest descent direction is `−Ξ`.
fn riemannian_gradient(ms: &[CMat], b: &MatTuple) -> CMat {
    let k = ms[0].nrows();
    let mut g = CMat::zeros(k, k);
    for (m, bj) in ms.iter().zip(b.matrices()) {
        let x = m - bj;
        let xa = x.adjoint();
        g += m * &xa - &xa * m;
    }
    // d/dt g = (2/k) Re tr(W G) for skew-Hermitian W, so the gradient is
    // (2/k) times the skew-Hermitian part of −G.
    let ga = g.adjoint();
    (&ga - &g) * C64::new(1.0 / k as f64, 0.0)
}

/// Cayley retraction `(I − W/2)⁻¹(I + W/2)·U`.
fn cayley_step(u: &CMat, w: &CMat) -> CMat {
    let k = u.nrows();
    let half = w * C64::new(0.5, 0.0);
    let lhs = identity(k) - &half;
    let rhs = (identity(k) + &half) * u;
    lhs.lu().solve(&rhs).unwrap_or_else(|| u.clone())
}

/// Riemannian descent from `u0`; returns `(g, U)`.
///
/// Trial steps follow the Barzilai–Borwein rule, with gradients at
/// consecutive iterates compared directly in the Lie algebra.
fn descend(u0: CMat, a: &MatTuple, b: &MatTuple, opts: &OrbitOptions) -> (f64, CMat) {
    let mut u = u0;
    let (mut g, mut ms) = objective(&u, a, b);
    let mut step = 1.0;
    let mut prev: Option<(CMat, f64)> = None;
    for it in 0..opts.max_iters {
        if g <= opts.value_tol {
            break;
        }
        let xi = riemannian_gradient(&ms, b);
        let gn2 = xi.norm_squared();
        if gn2.sqrt() <= opts.grad_tol {
            break;
        }
        if let Some((xi_prev, t_prev)) = &prev {
            // s = −t_prev·Ξ_prev, y = Ξ − Ξ_prev, trial step ⟨s,s⟩/⟨s,y⟩.
            let y = &xi - xi_prev;
            let sy = -t_prev * xi_prev.iter().zip(y.iter()).map(|(p, q)| (p.conj() * q).re).sum::<f64>();
            let ss = t_prev * t_prev * xi_prev.norm_squared();
            if sy > 0.0 && (ss / sy).is_finite() {
                step = (ss / sy).clamp(1e-10, 1e6);
            }
        }
        let mut accepted = false;
        let mut t = step;
        for _ in 0..60 {
            let cand = cayley_step(&u, &(&xi * C64::new(-t, 0.0)));
            let (gc, mc) = objective(&cand, a, b);
            if gc <= g - 1e-4 * t * gn2 {
                u = cand;
                g = gc;
                ms = mc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        prev = Some((xi, t));
        step = (t * 2.0).min(1e6);
        if it % 50 == 49 && unitary_deviation(&u) > 1e-12 {
            u = polar_unitary(&u);
            (g, ms) = objective(&u, a, b);
        }
    }
    if unitary_deviation(&u) > 1e-12 {
        u = polar_unitary(&u);
        g = objective(&u, a, b).0;
    }
    (g, u)
}

/// `V_B V_A*` from ascending eigenvectors of the Hermitian parts of `Σ_j A_j` and `Σ_j B_j`.
fn alignment_start(a: &MatTuple, b: &MatTuple) -> Result<CMat> {
    let sum = |t: &MatTuple| {
        let mut s = CMat::zeros(t.dim(), t.dim());
        for m in t.matrices() {
            s += m;
        }
        hermitian_part(&s)
    };
    let ea = herm_eig(&sum(a))?;
    let eb = herm_eig(&sum(b))?;
    Ok(&eb.vectors * ea.vectors.adjoint())
}

/// Heuristic upper bound on `d^orb(A, B)` by multi-start Riemannian descent
/// with Cayley retraction and Armijo backtracking.
///
/// Restarts run in parallel; the best value wins, ties going to the lower
/// restart index.
pub fn dorb_upper(a: &MatTuple, b: &MatTuple, opts: &OrbitOptions) -> Result<OrbitResult> {
    check_pair(a, b)?;
    let n = opts.restarts.max(1);
    let mut starts = Vec::with_capacity(n);
    starts.push(identity(a.dim()));
    if n > 1 {
        starts.push(alignment_start(a, b)?);
    }
    for i in 2..n {
        starts.push(sample_haar_unitary(a.dim(), &opts.seed.child(i as u64))?);
    }
    let results: Vec<(f64, CMat)> = starts.into_par_iter().map(|u0| descend(u0, a, b, opts)).collect();
    let (_, (g, u)) = results
        .into_iter()
        .enumerate()
        .min_by(|(i, x), (j, y)| x.0.total_cmp(&y.0).then(i.cmp(j)))
        .expect("at least one restart");
    Ok(OrbitResult { value: g.max(0.0).sqrt(), minimizer: u, certified: Certification::UpperBound, restarts_used: n })
}

/// Certified lower bound on `d^orb(A, B)`.
///
/// Each coordinate is bounded separately (`inf_U Σ_j f_j ≥ Σ_j inf_U f_j`):
/// Hermitian pairs exactly, other pairs through their Hermitian and
/// imaginary parts, whose squared distances add.
pub fn dorb_lower(a: &MatTuple, b: &MatTuple) -> Result<f64> {
    check_pair(a, b)?;
    let mut total = 0.0;
    for (x, y) in a.matrices().iter().zip(b.matrices()) {
        let hermitian = hermitian_deviation(x) <= HERMITIAN_TOL && hermitian_deviation(y) <= HERMITIAN_TOL;
        total += if hermitian {
            dorb_exact_herm1(x, y)?.powi(2)
        } else {
            let re = dorb_exact_herm1(&hermitian_part(x), &hermitian_part(y))?;
            let im = dorb_exact_herm1(&imaginary_part(x), &imaginary_part(y))?;
            re * re + im * im
        };
    }
    Ok(total.sqrt())
}

/// Distance used by [`covering_number`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitDistance {
    /// [`dorb_exact_herm1`]; needs single Hermitian coordinates.
    ExactHerm1,
    /// [`dorb_upper`] with the given options.
    Upper(OrbitOptions),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyProbe {
    pub epsilon: f64,
    pub sample_count: usize,
    /// Size of the smallest greedy `ε'`-net found for `ε' ≤ ε` (an upper bound on `K_ε`).
    pub cover_size: usize,
    /// Size of the greedy net at `ε` itself.
    pub greedy_size: usize,
    /// `ln(cover_size)/k²`.
    pub h_estimate: f64,
}

/// Pairwise distances between samples.
pub fn pairwise_distances(samples: &[MatTuple], dist: &OrbitDistance) -> Result<Vec<Vec<f64>>> {
    let Some(first) = samples.first() else {
        return Err(Error::InvalidArgument("no samples".into()));
    };
    for s in samples {
        check_pair(first, s)?;
    }
    let n = samples.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = match dist {
        OrbitDistance::ExactHerm1 => {
            if first.len() != 1 {
                return Err(Error::InvalidArgument("exact distance needs single-matrix samples".into()));
            }
            let spectra = samples
                .iter()
                .map(|s| {
                    check_hermitian(s.get(0))?;
                    herm_eigenvalues(s.get(0))
                })
                .collect::<Result<Vec<_>>>()?;
            pairs.iter().map(|&(i, j)| sorted_distance(&spectra[i], &spectra[j])).collect()
        }
        OrbitDistance::Upper(opts) => pairs
            .par_iter()
            .map(|&(i, j)| dorb_upper(&samples[i], &samples[j], opts).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut d = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        d[i][j] = v;
        d[j][i] = v;
    }
    Ok(d)
}

fn greedy_net(d: &[Vec<f64>], eps: f64) -> usize {
    let mut net: Vec<usize> = Vec::new();
    for i in 0..d.len() {
        if net.iter().all(|&j| d[i][j] > eps) {
            net.push(i);
        }
    }
    net.len()
}

/// Covering probe from a precomputed distance matrix.
pub fn covering_from_distances(d: &[Vec<f64>], eps: f64, k: usize) -> EntropyProbe {
    let greedy_size = greedy_net(d, eps);
    let mut thresholds: Vec<f64> = d.iter().flatten().copied().filter(|&x| x < eps).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let cover_size = thresholds.into_iter().map(|t| greedy_net(d, t)).fold(greedy_size, usize::min);
    EntropyProbe {
        epsilon: eps,
        sample_count: d.len(),
        cover_size,
        greedy_size,
        h_estimate: (cover_size as f64).ln() / (k * k) as f64,
    }
}

/// Greedy `ε`-net of the sampled set under `dist`.
pub fn covering_number(samples: &[MatTuple], eps: f64, dist: &OrbitDistance) -> Result<EntropyProbe> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be ≥ 0, got {eps}")));
    }
    let d = pairwise_distances(samples, dist)?;
    Ok(covering_from_distances(&d, eps, samples[0].dim()))
}
