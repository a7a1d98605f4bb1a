//! Haagerup witness `‖(1/r) Σ U_j ⊗ conj(V_j)‖` for Haar unitary tuples.
//!
//! With `V = U` the identity matrix is a fixed vector, so the norm is 1. For
//! independent tuples it is compared with the free-group limit.

use std::time::Instant;

use strongconv::ensembles::{sample_tuple, EnsembleKind};
use strongconv::freeprob::{limit_norm, GeneratorSpec, LimitNormOptions};
use strongconv::seed::SeedSpec;
use strongconv::tensorops::haagerup_witness;

fn main() -> strongconv::Result<()> {
    let r = 2;
    let p = "0.5 * (T1 T3 + T2 T4)".parse()?;
    let oracle = limit_norm(&p, &GeneratorSpec::haar(r), &LimitNormOptions::default())?;
    println!("free-group limit ≈ {:.5} (best raw lower bound {:.5})", oracle.extrapolated, oracle.best_lower_bound());
    for k in [16, 32, 64] {
        let u = sample_tuple(EnsembleKind::Haar, r, k, &SeedSpec::with_path(5, &[k as u64, 0]))?;
        let v = sample_tuple(EnsembleKind::Haar, r, k, &SeedSpec::with_path(5, &[k as u64, 1]))?;
        let t = Instant::now();
        let same = haagerup_witness(&u, &u)?;
        let ind = haagerup_witness(&u, &v)?;
        println!(
            "k={k:3}  same={:.12} ({} its)  independent={:.8} ({} its, converged {})  {:.2?}",
            same.value,
            same.iterations,
            ind.value,
            ind.iterations,
            ind.converged,
            t.elapsed()
        );
    }
    Ok(())
}
