//! Exact concentration functions of small spaces, and empirical tails of
//! GUE observables at scale `k²`.

use strongconv::concentration::{alpha_exact, deviation_profile, expansion_check, FiniteMMSpace, Observable, Statistic};
use strongconv::ensembles::EnsembleKind;
use strongconv::seed::SeedSpec;

fn main() -> strongconv::Result<()> {
    // A path of 8 points with uniform mass.
    let n = 8;
    let dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect()).collect();
    let path = FiniteMMSpace::new(dist, vec![1.0 / n as f64; n])?;
    for eps in [0.5, 1.5, 2.5, 3.5, 4.5] {
        let a = alpha_exact(&path, eps)?;
        let ok = expansion_check(&path, &[0, 1, 2], eps)?;
        println!("path: α({eps}) = {a:.3}   expansion on {{0,1,2}} holds: {ok}");
    }

    let obs = Observable::new("T1 T1".parse()?, Statistic::TraceMoment);
    let rows = deviation_profile(EnsembleKind::Gue, &obs, &[8, 16, 32], &[0.02, 0.05, 0.1], 200, &SeedSpec::new(1))?;
    println!("\n{:>4} {:>6} {:>10} {:>14} {:>9}", "k", "ε", "tail", "−log p / k²", "censored");
    for r in rows {
        println!("{:>4} {:>6} {:>10.4} {:>14.5} {:>9}", r.k, r.epsilon, r.tail_prob, r.neg_log_tail_over_k2, r.censored);
    }
    Ok(())
}
