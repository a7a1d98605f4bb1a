//! Microstates: sampled tuples whose empirical law is near the free law,
//! their covering numbers under the orbit distance, and the finite-k
//! discrepancy from the limit.

use strongconv::ensembles::{default_gue_radius, sample_tuple, EnsembleKind, MatTuple};
use strongconv::freeprob::GeneratorSpec;
use strongconv::laws::{
    default_test_polys, empirical_law, is_microstate, law_distance, strong_discrepancy, Law, NeighborhoodSpec, TupleInput,
};
use strongconv::orbit::{covering_number, OrbitDistance};
use strongconv::seed::SeedSpec;

fn main() -> strongconv::Result<()> {
    let (r, degree) = (2, 4);
    let spec = GeneratorSpec::semicircular(r);
    let center = Law::from_oracle(&spec, r, degree, vec![default_gue_radius(); r])?;
    let nbhd = NeighborhoodSpec::new(center.clone(), 0.3)?;
    for k in [16, 32, 64] {
        let samples = (0..24)
            .map(|i| sample_tuple(EnsembleKind::Gue, r, k, &SeedSpec::with_path(9, &[k as u64, i])))
            .collect::<strongconv::Result<Vec<_>>>()?;
        let mut accepted = Vec::new();
        let mut dist = 0.0;
        for t in samples {
            dist += law_distance(&empirical_law(&t, degree)?, &center, degree)?;
            if is_microstate(&t, &nbhd)? {
                accepted.push(t);
            }
        }
        let firsts = accepted.iter().map(|t| MatTuple::new(vec![t.get(0).clone()])).collect::<strongconv::Result<Vec<_>>>()?;
        let cover = if firsts.is_empty() {
            "n/a".to_string()
        } else {
            covering_number(&firsts, 0.1, &OrbitDistance::ExactHerm1)?.cover_size.to_string()
        };
        println!(
            "k={k:3}  mean law distance {:.4}  microstates {}/24  K_0.1 of first coordinates ≤ {cover}",
            dist / 24.0,
            accepted.len(),
        );
    }

    let t = sample_tuple(EnsembleKind::Gue, r, 64, &SeedSpec::new(5))?;
    println!("\nfinite-k discrepancy at k=64");
    for row in strong_discrepancy(TupleInput::Plain(&t), &spec, &default_test_polys(r, 2, &[]), 10) {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |g| format!("{g:+.4}"));
        println!("  {:<24} moment gap {:>8}  norm gap {:>8}", row.poly, show(row.moment_gap), show(row.norm_gap));
    }
    Ok(())
}
