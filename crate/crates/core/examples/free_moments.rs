//! Free moment oracles next to Monte-Carlo GUE and Haar moments.

use strongconv::ensembles::{sample_tuple, EnsembleKind};
use strongconv::freeprob::{poly_moment, GeneratorSpec};
use strongconv::laws::empirical_law;
use strongconv::linalg::C64;
use strongconv::ncpoly::{Monomial, NcPoly};
use strongconv::seed::SeedSpec;

fn main() -> strongconv::Result<()> {
    let (k, reps) = (64, 30);
    for (kind, spec, words) in [
        (
            EnsembleKind::Gue,
            GeneratorSpec::semicircular(2),
            ["T1 T1", "T1 T2 T1 T2", "T1 T1 T2 T2", "T1 T1 T1 T1", "T1 T2 T2 T1"],
        ),
        (
            EnsembleKind::Haar,
            GeneratorSpec::haar(2),
            ["T1 T1'", "T1 T2 T1' T2'", "T1 T2 T2' T1'", "T1 T1", "T1' T2' T2 T1"],
        ),
    ] {
        let laws = (0..reps)
            .map(|i| empirical_law(&sample_tuple(kind, 2, k, &SeedSpec::with_path(3, &[i]))?, 4))
            .collect::<strongconv::Result<Vec<_>>>()?;
        println!("{kind:?}, k={k}, {reps} replicas");
        for w in words {
            let m: Monomial = w.parse()?;
            let mc = laws.iter().map(|l| l.get(&m).expect("degree ≤ 4")).sum::<C64>() / reps as f64;
            let oracle = poly_moment(&NcPoly::monomial(m, C64::new(1.0, 0.0)), &spec)?;
            println!("  τ({w:<14}) oracle {:>6.3}   Monte Carlo {:>+8.4}{:+.4}i", oracle.re, mc.re, mc.im);
        }
    }
    Ok(())
}
