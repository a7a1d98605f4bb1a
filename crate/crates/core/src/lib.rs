//! Numerical laboratory for strong convergence of random matrix tuples.
//!
//! The crate provides the finite-dimensional objects needed to probe
//! strong-convergence statements at desk scale:
//!
//! * [`ncpoly`]: noncommutative *-polynomials, parsing and evaluation on matrix tuples.
//! * [`ensembles`]: seeded GUE and Haar-unitary samplers.
//! * [`spectral`]: Hermitian eigensolvers, matrix-free Lanczos, Hausdorff distance of spectra.
//! * [`freeprob`]: exact moment oracles for free semicircular and free Haar families,
//!   their tensor-leg versions, and a limit-norm estimator.
//! * [`laws`]: truncated tracial laws, empirical laws and microstate tests.
//! * [`orbit`]: the unitary orbit pseudometric, exact and heuristic, and covering numbers.
//! * [`tensorops`]: the `#` action of `M_k ⊗ M_k` on Hilbert–Schmidt matrices.
//! * [`concentration`]: concentration functions of finite metric-measure spaces
//!   and empirical deviation profiles.
//! * [`experiments`]: scenario runner, run records, CSV/JSON output and tuple files.

pub mod concentration;
pub mod ensembles;
mod error;
pub mod experiments;
pub mod freeprob;
pub mod laws;
pub mod linalg;
pub mod ncpoly;
pub mod orbit;
pub mod seed;
pub mod spectral;
pub mod tensorops;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
