//! Seeded GUE and Haar-unitary samplers and the [`MatTuple`] container.

use serde::{Deserialize, Serialize};

use crate::linalg::{identity, CMat, C64};
use crate::seed::SeedSpec;
use crate::spectral::op_norm;
use crate::{Error, Result};

/// Slack allowed when checking declared operator-norm radii.
pub const RADIUS_SLACK: f64 = 1e-8;

/// Default margin over the semicircle edge 2 for discard-based radii.
pub const DEFAULT_RADIUS_MARGIN: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Gue,
    Haar,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gue" => Ok(Self::Gue),
            "haar" => Ok(Self::Haar),
            other => Err(Error::InvalidArgument(format!("unknown ensemble {other:?}"))),
        }
    }
}

/// A tuple of `k×k` matrices with per-coordinate operator-norm radii.
///
/// Raw samples carry radius `+∞`. Finite radii are enforced on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MatTuple {
    mats: Vec<CMat>,
    radii: Vec<f64>,
}

impl MatTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let radii = vec![f64::INFINITY; mats.len()];
        Self::with_radii(mats, radii)
    }

    pub fn with_radii(mats: Vec<CMat>, radii: Vec<f64>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::InvalidArgument("a tuple needs at least one matrix".into()));
        };
        let k = first.nrows();
        if k == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be ≥ 1".into()));
        }
        if radii.len() != mats.len() {
            return Err(Error::Dimension(format!("{} radii for {} matrices", radii.len(), mats.len())));
        }
        for (j, (m, &r)) in mats.iter().zip(&radii).enumerate() {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::Dimension(format!("coordinate {j} is {}×{}, expected {k}×{k}", m.nrows(), m.ncols())));
            }
            if r < 0.0 || r.is_nan() {
                return Err(Error::InvalidArgument(format!("radius {r} for coordinate {j}")));
            }
            if r.is_finite() {
                let norm = op_norm(m);
                if norm > r + RADIUS_SLACK {
                    return Err(Error::RadiusViolation { index: j, norm, radius: r });
                }
            }
        }
        Ok(Self { mats, radii })
    }

    /// Same matrices with new declared radii (checked).
    pub fn declare_radii(self, radii: Vec<f64>) -> Result<Self> {
        Self::with_radii(self.mats, radii)
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.mats
    }

    pub fn into_matrices(self) -> Vec<CMat> {
        self.mats
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn get(&self, j: usize) -> &CMat {
        &self.mats[j]
    }

    /// `(U A_j U*)_j`, radii preserved.
    pub fn conjugate_by(&self, u: &CMat) -> Self {
        let ua = u.adjoint();
        Self { mats: self.mats.iter().map(|a| u * a * &ua).collect(), radii: self.radii.clone() }
    }

    /// Coordinatewise transpose.
    pub fn transpose(&self) -> Self {
        Self { mats: self.mats.iter().map(|a| a.transpose()).collect(), radii: self.radii.clone() }
    }

    /// Concatenation `(A, B)` as one tuple.
    pub fn join(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("cannot join k={} with k={}", self.dim(), other.dim())));
        }
        let mut mats = self.mats.clone();
        mats.extend(other.mats.iter().cloned());
        let mut radii = self.radii.clone();
        radii.extend_from_slice(&other.radii);
        Ok(Self { mats, radii })
    }
}

fn check_dim(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("matrix dimension must be ≥ 1".into()));
    }
    Ok(())
}

/// GUE sample with `E|X_ij|² = 1/k`.
///
/// Diagonal entries are `N(0, 1/k)`; above the diagonal the real and
/// imaginary parts are independent `N(0, 1/(2k))`. Entries are drawn in
/// column-major order of the upper triangle, diagonal first within a column.
pub fn sample_gue(k: usize, seed: &SeedSpec) -> Result<CMat> {
    check_dim(k)?;
    let mut g = seed.stream();
    let sd_diag = (1.0 / k as f64).sqrt();
    let sd_off = (0.5 / k as f64).sqrt();
    let mut x = CMat::zeros(k, k);
    for j in 0..k {
        x[(j, j)] = C64::new(sd_diag * g.gaussian(), 0.0);
        for i in 0..j {
            let z = C64::new(sd_off * g.gaussian(), sd_off * g.gaussian());
            x[(i, j)] = z;
            x[(j, i)] = z.conj();
        }
    }
    Ok(x)
}

/// Haar-distributed unitary.
///
/// A matrix `Z` of i.i.d. standard complex Gaussians is factored `Z = QR`;
/// column `i` of `Q` is multiplied by `R_ii/|R_ii|`. The result is the unique
/// unitary factor whose triangular partner has a positive diagonal, which is
/// Haar distributed.
pub fn sample_haar_unitary(k: usize, seed: &SeedSpec) -> Result<CMat> {
    check_dim(k)?;
    let mut g = seed.stream();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut z = CMat::zeros(k, k);
    for j in 0..k {
        for i in 0..k {
            z[(i, j)] = C64::new(s * g.gaussian(), s * g.gaussian());
        }
    }
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..k {
        let d = r[(i, i)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..k {
            q[(row, i)] *= phase;
        }
    }
    Ok(q)
}

/// `r` independent coordinates, coordinate `j` drawn from `seed.child(j)`.
pub fn sample_tuple(kind: EnsembleKind, r: usize, k: usize, seed: &SeedSpec) -> Result<MatTuple> {
    if r == 0 {
        return Err(Error::InvalidArgument("tuple length must be ≥ 1".into()));
    }
    let mats = (0..r)
        .map(|j| {
            let s = seed.child(j as u64);
            match kind {
                EnsembleKind::Gue => sample_gue(k, &s),
                EnsembleKind::Haar => sample_haar_unitary(k, &s),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MatTuple::new(mats)
}

/// Outcome of [`sample_with_radii`].
#[derive(Clone, Debug)]
pub struct RadiusSample {
    pub tuple: MatTuple,
    /// Number of draws discarded for violating a radius.
    pub rejections: usize,
}

/// Draw tuples until one satisfies `‖A_j‖ ≤ radius` for all `j`.
///
/// Attempt `a` uses `seed.child(a)`. Fails after `max_attempts` rejections.
pub fn sample_with_radii(
    kind: EnsembleKind,
    r: usize,
    k: usize,
    radius: f64,
    seed: &SeedSpec,
    max_attempts: usize,
) -> Result<RadiusSample> {
    for attempt in 0..max_attempts {
        let t = sample_tuple(kind, r, k, &seed.child(attempt as u64))?;
        if t.matrices().iter().all(|m| op_norm(m) <= radius) {
            let tuple = t.declare_radii(vec![radius; r])?;
            return Ok(RadiusSample { tuple, rejections: attempt });
        }
    }
    Err(Error::Budget(format!("no sample within radius {radius} after {max_attempts} attempts")))
}

/// The declared radius used for GUE microstates: semicircle edge 2 plus margin.
pub fn default_gue_radius() -> f64 {
    2.0 + DEFAULT_RADIUS_MARGIN
}

/// Tuple of identity matrices (useful as a trivial microstate).
pub fn identity_tuple(r: usize, k: usize) -> Result<MatTuple> {
    MatTuple::new(vec![identity(k); r])
}
