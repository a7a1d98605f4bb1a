//! Orbit distances: exact for single Hermitian matrices, bracketed otherwise.

use strongconv::ensembles::{sample_haar_unitary, sample_tuple, EnsembleKind};
use strongconv::orbit::{dorb_exact_herm1, dorb_lower, dorb_upper, OrbitOptions};
use strongconv::seed::SeedSpec;

fn main() -> strongconv::Result<()> {
    let opts = OrbitOptions { restarts: 4, max_iters: 400, ..OrbitOptions::default() };
    println!("single GUE coordinate, independent pairs");
    for k in [16, 32, 64, 128] {
        let a = sample_tuple(EnsembleKind::Gue, 1, k, &SeedSpec::with_path(1, &[k as u64, 0]))?;
        let b = sample_tuple(EnsembleKind::Gue, 1, k, &SeedSpec::with_path(1, &[k as u64, 1]))?;
        println!("  k={k:4}  d_orb = {:.5}", dorb_exact_herm1(a.get(0), b.get(0))?);
    }

    println!("pairs of GUE matrices");
    for k in [4, 8, 16] {
        let a = sample_tuple(EnsembleKind::Gue, 2, k, &SeedSpec::with_path(2, &[k as u64, 0]))?;
        let b = sample_tuple(EnsembleKind::Gue, 2, k, &SeedSpec::with_path(2, &[k as u64, 1]))?;
        let up = dorb_upper(&a, &b, &opts)?;
        let u = sample_haar_unitary(k, &SeedSpec::with_path(2, &[k as u64, 2]))?;
        let conj = dorb_upper(&a, &a.conjugate_by(&u), &opts)?;
        println!(
            "  k={k:3}  {:.5} ≤ d_orb ≤ {:.5}   conjugate tuple: {:.2e}",
            dorb_lower(&a, &b)?,
            up.value,
            conj.value
        );
    }
    Ok(())
}
