//! Matrix-free norms of tensor-leg polynomials `P(X ⊗ 1, 1 ⊗ Y)`.

use strongconv::ensembles::{sample_tuple, EnsembleKind};
use strongconv::freeprob::{limit_norm, GeneratorSpec, LimitNormOptions};
use strongconv::ncpoly::NcPoly;
use strongconv::seed::SeedSpec;
use strongconv::tensorops::{eval_tensor_poly, norm_inf_one_lower, tensor_norm};

fn main() -> strongconv::Result<()> {
    let spec = GeneratorSpec::semicircular(2);
    for src in ["T1 + T3", "T1 T3 + T2 T4", "T1 T3 T1 - T2 T4"] {
        let p: NcPoly = src.parse()?;
        // The oracle budget caps deg(P)·q_max.
        let q_max = (LimitNormOptions::default().letter_budget / p.degree()).min(12);
        let lim = limit_norm(&p, &spec, &LimitNormOptions::with_q_max(q_max))?;
        println!("P = {src}   limit ≈ {:.4} (q_max {q_max})", lim.extrapolated);
        for k in [16, 32, 64] {
            let x = sample_tuple(EnsembleKind::Gue, 2, k, &SeedSpec::with_path(11, &[k as u64, 0]))?;
            let y = sample_tuple(EnsembleKind::Gue, 2, k, &SeedSpec::with_path(11, &[k as u64, 1]))?;
            let op = eval_tensor_poly(&p, &x, &y)?;
            let n = tensor_norm(&op, 1e-10)?;
            let lower = norm_inf_one_lower(&op, 2, &SeedSpec::new(k as u64))?;
            println!(
                "  k={k:3}  ‖P‖ = {:.4} ({} Lanczos steps)   ‖·‖_(∞,1) ≥ {:.4}",
                n.value, n.iterations, lower.value
            );
        }
    }
    Ok(())
}
