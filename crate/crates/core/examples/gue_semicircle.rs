//! GUE spectra approach the semicircle and their edges approach ±2.

use strongconv::ensembles::sample_gue;
use strongconv::freeprob::semicircle_density;
use strongconv::seed::SeedSpec;
use strongconv::spectral::{hausdorff, herm_eigenvalues, spectrum_set, HausdorffTarget};

fn main() -> strongconv::Result<()> {
    let target = HausdorffTarget::Intervals(vec![(-2.0, 2.0)]);
    for k in [32, 64, 128, 256, 512] {
        let x = sample_gue(k, &SeedSpec::with_path(2024, &[k as u64]))?;
        let eig = herm_eigenvalues(&x)?;
        let h = hausdorff(&spectrum_set(&x)?, &target)?;
        println!("k={k:4}  λ_min={:+.4}  λ_max={:+.4}  Hausdorff to [-2,2] = {h:.4}", eig[0], eig[k - 1]);
    }

    // Histogram of one large sample against the density.
    let k = 512;
    let eig = herm_eigenvalues(&sample_gue(k, &SeedSpec::new(7))?)?;
    let bins = 16;
    let width = 4.0 / bins as f64;
    println!("\n{:>8} {:>10} {:>10}", "center", "empirical", "density");
    for b in 0..bins {
        let lo = -2.0 + b as f64 * width;
        let count = eig.iter().filter(|&&v| v >= lo && v < lo + width).count();
        let center = lo + width / 2.0;
        println!("{center:>8.3} {:>10.4} {:>10.4}", count as f64 / (k as f64 * width), semicircle_density(center, 0.0, 1.0));
    }
    Ok(())
}
