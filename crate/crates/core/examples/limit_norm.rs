//! Limit-norm estimates from exact free moments.
//!
//! Run with `cargo run --example limit_norm`.

use strongconv::freeprob::{limit_norm, GeneratorSpec, LimitNormOptions};
use strongconv::ncpoly::NcPoly;

fn main() -> strongconv::Result<()> {
    let cases = [
        ("T1", GeneratorSpec::semicircular(1), "2"),
        ("T1 + T2", GeneratorSpec::semicircular(2), "2√2 (free sum)"),
        ("T1 + T2", GeneratorSpec::semicircular(1), "4 (tensor legs)"),
        ("T1 T1 - 1", GeneratorSpec::semicircular(1), "3"),
        ("0.5*T1 T3 + 0.5*T2 T4", GeneratorSpec::haar(2), "2√(r−1)/r = 1"),
        ("T1 + T2", GeneratorSpec::haar(2), "2√(r−1) = 2"),
    ];
    let opts = LimitNormOptions::with_q_max(12);
    println!("{:<24} {:<16} {:>10} {:>10} {:>8}", "P", "generators", "raw", "extrap", "alpha");
    for (src, spec, expect) in cases {
        let p: NcPoly = src.parse()?;
        let res = limit_norm(&p, &spec, &opts)?;
        let family = if spec.is_haar() { "haar" } else { "semicircular" };
        println!(
            "{:<24} {:<16} {:>10.5} {:>10.5} {:>8.3}   expected {}",
            src,
            format!("{family} r={}", spec.count),
            res.best_lower_bound(),
            res.extrapolated,
            res.alpha,
            expect
        );
    }
    Ok(())
}
