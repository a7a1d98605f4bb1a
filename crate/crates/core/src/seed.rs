//! Splittable, reproducible random streams.
//!
//! A [`SeedSpec`] names a stream by a master seed and a path of integers
//! (scenario, replica, coordinate, ...). The stream key is obtained by
//! folding the path into the master seed with SplitMix64; the 256-bit key
//! seeds a ChaCha8 generator. Gaussians come from Box–Muller on 53-bit
//! uniforms:
//!
//! ```text
//! u1 = (⌊x₁/2¹¹⌋ + 1)·2⁻⁵³ ∈ (0, 1],   u2 = ⌊x₂/2¹¹⌋·2⁻⁵³ ∈ [0, 1)
//! g₁ = √(−2 ln u1)·cos(2πu2),          g₂ = √(−2 ln u1)·sin(2πu2)
//! ```
//!
//! where `x₁, x₂` are consecutive `next_u64` outputs. The map
//! seed → values is therefore fixed and independent of thread scheduling.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_path: Vec<u64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed, stream_path: Vec::new() }
    }

    pub fn with_path(master_seed: u64, path: &[u64]) -> Self {
        Self { master_seed, stream_path: path.to_vec() }
    }

    /// Substream obtained by appending `index` to the path.
    pub fn child(&self, index: u64) -> Self {
        let mut stream_path = self.stream_path.clone();
        stream_path.push(index);
        Self { master_seed: self.master_seed, stream_path }
    }

    fn key(&self) -> [u8; 32] {
        let mut h = splitmix64(self.master_seed);
        // Path length is folded in so that (s, []) and (s, [0]) differ.
        h = splitmix64(h ^ (self.stream_path.len() as u64).wrapping_mul(0xA24B_AED4_963E_E407));
        for &p in &self.stream_path {
            h = splitmix64(h ^ splitmix64(p.wrapping_add(0x6A09_E667_F3BC_C909)));
        }
        let mut key = [0u8; 32];
        let mut s = h;
        for chunk in key.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        key
    }

    pub fn stream(&self) -> GaussianStream {
        GaussianStream { rng: ChaCha8Rng::from_seed(self.key()), spare: None }
    }
}

impl fmt::Display for SeedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/", self.master_seed)?;
        for (i, p) in self.stream_path.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for SeedSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { pos: 0, msg: format!("seed spec {s:?}: {msg}") };
        let (master, path) = match s.split_once('/') {
            Some((m, p)) => (m, p),
            None => (s, ""),
        };
        let master_seed = master.trim().parse::<u64>().map_err(|_| bad("bad master seed"))?;
        let stream_path = if path.is_empty() {
            Vec::new()
        } else {
            path.split('.')
                .map(|p| p.parse::<u64>().map_err(|_| bad("bad path component")))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Self { master_seed, stream_path })
    }
}

impl Serialize for SeedSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SeedSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Uniform and Gaussian draws from one seeded stream.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

impl GaussianStream {
    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform integer in `0..n` (n ≥ 1).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare.take() {
            return g;
        }
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53;
        let u2 = (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53;
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trip() {
        let s = SeedSpec::with_path(42, &[3, 0, 17]);
        assert_eq!(s.to_string(), "42/3.0.17");
        assert_eq!("42/3.0.17".parse::<SeedSpec>().unwrap(), s);
        assert_eq!("7/".parse::<SeedSpec>().unwrap(), SeedSpec::new(7));
        assert!("x/1".parse::<SeedSpec>().is_err());
    }

    #[test]
    fn identical_specs_identical_streams() {
        let a: Vec<f64> = {
            let mut s = SeedSpec::with_path(9, &[1, 2]).stream();
            (0..16).map(|_| s.gaussian()).collect()
        };
        let b: Vec<f64> = {
            let mut s = SeedSpec::with_path(9, &[1, 2]).stream();
            (0..16).map(|_| s.gaussian()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_paths_differ() {
        let mut a = SeedSpec::new(1).stream();
        let mut b = SeedSpec::new(1).child(0).stream();
        let mut c = SeedSpec::new(1).child(1).stream();
        let (x, y, z) = (a.uniform(), b.uniform(), c.uniform());
        assert!(x != y && y != z && x != z);
    }

    #[test]
    fn gaussian_moments() {
        let mut s = SeedSpec::new(5).stream();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.015);
    }
}
