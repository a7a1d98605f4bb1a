//! Concentration functions of finite metric-measure spaces and empirical
//! deviation profiles of matrix ensembles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_tuple, EnsembleKind};
use crate::linalg::ntrace;
use crate::ncpoly::NcPoly;
use crate::seed::SeedSpec;
use crate::spectral::op_norm;
use crate::{Error, Result};

/// Largest space accepted by the subset enumeration.
pub const MAX_EXACT_POINTS: usize = 16;

/// Slack for the pseudometric axioms and the weight sum.
pub const AXIOM_TOL: f64 = 1e-12;

/// `n` points with a pseudometric and a probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMMSpace {
    dist: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl FiniteMMSpace {
    pub fn new(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty space".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!("distance matrix is not {n}×{n}")));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > AXIOM_TOL {
            return Err(Error::InvalidArgument("weights must form a probability vector".into()));
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(Error::InvalidArgument(format!("d({i},{i}) ≠ 0")));
            }
            for j in 0..n {
                let d = dist[i][j];
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::InvalidArgument(format!("d({i},{j}) = {d}")));
                }
                if (d - dist[j][i]).abs() > AXIOM_TOL {
                    return Err(Error::InvalidArgument(format!("d({i},{j}) ≠ d({j},{i})")));
                }
                for l in 0..n {
                    if d > dist[i][l] + dist[l][j] + AXIOM_TOL {
                        return Err(Error::InvalidArgument(format!("triangle inequality fails at ({i},{l},{j})")));
                    }
                }
            }
        }
        Ok(Self { dist, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_exact(&self) -> Result<()> {
        if self.len() > MAX_EXACT_POINTS {
            return Err(Error::Budget(format!("{} points exceed the exact limit {MAX_EXACT_POINTS}", self.len())));
        }
        Ok(())
    }

    fn mass(&self, mask: u32) -> f64 {
        // `+ 0.0` turns the empty sum's `-0.0` into `0.0`.
        (0..self.len()).filter(|&i| mask >> i & 1 == 1).map(|i| self.weights[i]).sum::<f64>() + 0.0
    }

    /// Bitmask of the open ball `{x : d(x, i) < ε}` around each point.
    fn balls(&self, eps: f64) -> Vec<u32> {
        (0..self.len())
            .map(|i| (0..self.len()).filter(|&j| self.dist[i][j] < eps).fold(0u32, |m, j| m | 1 << j))
            .collect()
    }

    fn neighborhood(balls: &[u32], mask: u32) -> u32 {
        (0..balls.len()).filter(|&i| mask >> i & 1 == 1).fold(0, |m, i| m | balls[i])
    }

    fn full(&self) -> u32 {
        if self.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.len()) - 1
        }
    }
}

/// `α(ε) = sup{μ(N_ε(E)ᶜ) : μ(E) ≥ 1/2}` over all subsets, with the open
/// neighborhood `N_ε(E) = {x : d(x, E) < ε}`.
///
/// This is the quantity for which `μ(E) ≥ 1/2` implies `μ(N_ε(E)) ≥ 1 − α(ε)`;
/// an infimum would always be attained at `E = X` and vanish.
pub fn alpha_exact(space: &FiniteMMSpace, eps: f64) -> Result<f64> {
    space.check_exact()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be > 0, got {eps}")));
    }
    let n = space.len();
    let full = space.full();
    let balls = space.balls(eps);
    // Subset masses and neighborhoods built incrementally from the lowest set bit.
    let size = 1usize << n;
    let mut nbhd = vec![0u32; size];
    let mut best: f64 = 0.0;
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        nbhd[mask] = nbhd[mask & (mask - 1)] | balls[low];
        if space.mass(mask as u32) >= 0.5 {
            best = best.max(space.mass(full & !nbhd[mask]));
        }
    }
    Ok(best)
}

/// Whether `μ(Ω) > α(ε)` implies `μ(N_{2ε}(Ω)) ≥ 1 − α(ε)` on this instance.
///
/// `omega` lists point indices. The conclusion is compared as
/// `μ(N_{2ε}(Ω)) + α ≥ 1 − 1e-12`, so exact arithmetic (for example dyadic
/// weights) makes the check exact.
pub fn expansion_check(space: &FiniteMMSpace, omega: &[usize], eps: f64) -> Result<bool> {
    let alpha = alpha_exact(space, eps)?;
    let mut mask = 0u32;
    for &i in omega {
        if i >= space.len() {
            return Err(Error::IndexOutOfRange { index: i, len: space.len() });
        }
        mask |= 1 << i;
    }
    if space.mass(mask) <= alpha {
        return Ok(true);
    }
    let grown = FiniteMMSpace::neighborhood(&space.balls(2.0 * eps), mask);
    Ok(space.mass(grown) + alpha >= 1.0 - 1e-12)
}

/// Scalar statistic of `P(X)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `Re tr P(X)`.
    TraceMoment,
    /// `‖P(X)‖`.
    OpNorm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub poly: NcPoly,
    pub statistic: Statistic,
}

impl Observable {
    pub fn new(poly: NcPoly, statistic: Statistic) -> Self {
        Self { poly, statistic }
    }

    /// Number of coordinates sampled for this observable.
    pub fn arity(&self) -> usize {
        self.poly.max_index().max(1)
    }

    pub fn eval(&self, mats: &[crate::CMat]) -> Result<f64> {
        let m = self.poly.evaluate(mats)?;
        Ok(match self.statistic {
            Statistic::TraceMoment => ntrace(&m).re,
            Statistic::OpNorm => op_norm(&m),
        })
    }
}

/// One `(k, ε)` cell of a deviation profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub k: usize,
    pub epsilon: f64,
    /// Empirical `P(|obs − median| > ε)`, or `1/reps` when censored.
    pub tail_prob: f64,
    pub neg_log_tail_over_k2: f64,
    /// No replica exceeded `ε`.
    pub censored: bool,
}

/// Observable values for `reps` replicas at dimension `k`; replica `i` uses `seed.child(k).child(i)`.
pub fn sample_observable(
    kind: EnsembleKind,
    obs: &Observable,
    k: usize,
    reps: usize,
    seed: &SeedSpec,
) -> Result<Vec<f64>> {
    let base = seed.child(k as u64);
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let t = sample_tuple(kind, obs.arity(), k, &base.child(i as u64))?;
            obs.eval(t.matrices())
        })
        .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Empirical tails of an observable around its median, per `k` and `ε`.
///
/// This is a diagnostic of concentration at scale `k²`, not an estimate of
/// the concentration function of the ensemble.
pub fn deviation_profile(
    kind: EnsembleKind,
    obs: &Observable,
    ks: &[usize],
    eps_grid: &[f64],
    reps: usize,
    seed: &SeedSpec,
) -> Result<Vec<ProfileRow>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be ≥ 1".into()));
    }
    let mut rows = Vec::with_capacity(ks.len() * eps_grid.len());
    for &k in ks {
        let values = sample_observable(kind, obs, k, reps, seed)?;
        let med = median(&values);
        for &eps in eps_grid {
            let count = values.iter().filter(|&&v| (v - med).abs() > eps).count();
            let censored = count == 0;
            let tail_prob = if censored { 1.0 / reps as f64 } else { count as f64 / reps as f64 };
            rows.push(ProfileRow {
                k,
                epsilon: eps,
                tail_prob,
                neg_log_tail_over_k2: -tail_prob.ln() / (k * k) as f64,
                censored,
            });
        }
    }
    Ok(rows)
}

/// Whether `−log p̂ / k²` is nondecreasing in `k` at every `ε` of the profile.
///
/// A censored cell means the tail fell below detection; it is consistent
/// with any earlier cell, while an uncensored cell after a censored one fails.
pub fn nondecreasing_in_k(rows: &[ProfileRow]) -> bool {
    let mut eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    eps.iter().all(|&e| {
        let mut cells: Vec<&ProfileRow> = rows.iter().filter(|r| r.epsilon == e).collect();
        cells.sort_by_key(|r| r.k);
        cells.windows(2).all(|w| match (w[0].censored, w[1].censored) {
            (_, true) => true,
            (true, false) => false,
            (false, false) => w[1].neg_log_tail_over_k2 >= w[0].neg_log_tail_over_k2,
        })
    })
}
