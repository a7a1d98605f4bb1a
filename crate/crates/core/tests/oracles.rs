//! Free-probability oracles checked against brute force and Monte Carlo.

use strongconv::ensembles::{sample_gue, sample_haar_unitary, sample_tuple, EnsembleKind};
use strongconv::freeprob::{
    limit_norm, poly_moment, semicircle_density, semicircular_moment, GeneratorSpec, LimitNormOptions,
};
use strongconv::laws::empirical_law;
use strongconv::linalg::{ntrace, C64};
use strongconv::ncpoly::{Monomial, NcPoly};
use strongconv::seed::SeedSpec;
use strongconv::spectral::herm_eigenvalues;
use strongconv::tensorops::{eval_tensor_poly, tensor_norm};

/// Count pairings of positions with equal labels that have no crossing, by
/// enumerating every pairing.
fn brute_noncrossing(word: &[usize]) -> u64 {
    fn rec(open: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, word: &[usize]) -> u64 {
        let Some(&first) = open.first() else {
            let crossing = pairs.iter().any(|&(a, b)| pairs.iter().any(|&(c, d)| a < c && c < b && b < d));
            return u64::from(!crossing);
        };
        let mut total = 0;
        for idx in 1..open.len() {
            let partner = open[idx];
            if word[first] != word[partner] {
                continue;
            }
            let rest: Vec<usize> = open.iter().copied().filter(|&p| p != first && p != partner).collect();
            let saved = std::mem::replace(open, rest);
            pairs.push((first, partner));
            total += rec(open, pairs, word);
            pairs.pop();
            *open = saved;
        }
        total
    }
    if word.len() % 2 == 1 {
        return 0;
    }
    rec(&mut (0..word.len()).collect(), &mut Vec::new(), word)
}

#[test]
fn semicircular_moments_match_pairing_enumeration() {
    let mut s = SeedSpec::new(31).stream();
    for _ in 0..300 {
        let len = s.below(11);
        let word: Vec<usize> = (0..len).map(|_| 1 + s.below(3)).collect();
        assert_eq!(semicircular_moment(&word), brute_noncrossing(&word) as f64, "{word:?}");
    }
}

#[test]
fn semicircle_density_integrates_to_moments() {
    let n = 200_000;
    let h = 4.0 / n as f64;
    for m in 0..6usize {
        let integral: f64 = (0..n)
            .map(|i| {
                let x = -2.0 + (i as f64 + 0.5) * h;
                x.powi(2 * m as i32) * semicircle_density(x, 0.0, 1.0) * h
            })
            .sum();
        let catalan = semicircular_moment(&vec![1; 2 * m]);
        assert!((integral - catalan).abs() < 1e-4 * catalan.max(1.0), "m={m}: {integral} vs {catalan}");
    }
}

#[test]
fn gue_spectrum_follows_semicircle() {
    let k = 400;
    let eig = herm_eigenvalues(&sample_gue(k, &SeedSpec::new(7)).unwrap()).unwrap();
    // Empirical CDF against the numerically integrated density at a few points.
    for &x in &[-1.5, -0.5, 0.0, 0.7, 1.6] {
        let emp = eig.iter().filter(|&&v| v <= x).count() as f64 / k as f64;
        let n = 20_000;
        let h = (x + 2.0) / n as f64;
        let cdf: f64 = (0..n).map(|i| semicircle_density(-2.0 + (i as f64 + 0.5) * h, 0.0, 1.0) * h).sum();
        assert!((emp - cdf).abs() < 0.03, "x={x}: {emp} vs {cdf}");
    }
}

#[test]
fn weingarten_second_moment() {
    // E|Tr U|² = 1 for Haar U in any dimension k ≥ 1.
    for &k in &[1usize, 3, 8] {
        let reps = 4000;
        let mean: f64 = (0..reps)
            .map(|i| {
                let u = sample_haar_unitary(k, &SeedSpec::with_path(40, &[k as u64, i])).unwrap();
                (ntrace(&u) * k as f64).norm_sqr()
            })
            .sum::<f64>()
            / reps as f64;
        assert!((mean - 1.0).abs() < 0.1, "k={k}: {mean}");
    }
}

#[test]
fn monte_carlo_freeness() {
    // Alternating centered products of independent GUE matrices vanish in the limit;
    // τ(T1 T1 T2 T2) = 1.
    let reps = 40;
    let k = 48;
    let laws: Vec<_> = (0..reps)
        .map(|i| empirical_law(&sample_tuple(EnsembleKind::Gue, 2, k, &SeedSpec::with_path(41, &[i])).unwrap(), 4).unwrap())
        .collect();
    let spec = GeneratorSpec::semicircular(2);
    for w in ["T1 T2 T1 T2", "T1 T1 T2 T2", "T1 T2", "T1 T1 T1 T1", "T2 T1 T1 T2"] {
        let m: Monomial = w.parse().unwrap();
        let mc: C64 = laws.iter().map(|l| l.get(&m).unwrap()).sum::<C64>() / reps as f64;
        let oracle = poly_moment(&NcPoly::monomial(m, C64::new(1.0, 0.0)), &spec).unwrap();
        assert!((mc - oracle).norm() < 0.06, "{w}: {mc} vs {oracle}");
    }
}

#[test]
fn tensor_sum_of_semicirculars_has_norm_four() {
    // s ⊗ 1 + 1 ⊗ s has spectrum [-2,2] + [-2,2], so norm 4.
    let p: NcPoly = "T1 + T2".parse().unwrap();
    let lim = limit_norm(&p, &GeneratorSpec::semicircular(1), &LimitNormOptions::default()).unwrap();
    assert!((3.8..=4.2).contains(&lim.extrapolated), "{}", lim.extrapolated);

    let k = 48;
    let x = sample_tuple(EnsembleKind::Gue, 1, k, &SeedSpec::new(42)).unwrap();
    let y = sample_tuple(EnsembleKind::Gue, 1, k, &SeedSpec::new(43)).unwrap();
    let op = eval_tensor_poly(&p, &x, &y).unwrap();
    let n = tensor_norm(&op, 1e-10).unwrap().value;
    let ex = herm_eigenvalues(x.get(0)).unwrap();
    let ey = herm_eigenvalues(y.get(0)).unwrap();
    let exact = (ex[k - 1] + ey[k - 1]).max(-(ex[0] + ey[0]));
    assert!((n - exact).abs() < 1e-8, "{n} vs {exact}");
    assert!((3.6..=4.3).contains(&n), "{n}");
}

#[test]
fn free_sum_norm_is_two_root_two() {
    let p: NcPoly = "T1 + T2".parse().unwrap();
    let lim = limit_norm(&p, &GeneratorSpec::semicircular(2), &LimitNormOptions::default()).unwrap();
    assert!((lim.extrapolated - 8f64.sqrt()).abs() < 0.05, "{}", lim.extrapolated);
    assert!(lim.best_lower_bound() <= 8f64.sqrt() + 1e-9);
}

#[test]
fn free_haar_sum_matches_kesten() {
    // u1 + u1* + u2 + u2* has norm 2√3 on the free group with two generators.
    let p: NcPoly = "T1 + T1' + T2 + T2'".parse().unwrap();
    let lim = limit_norm(&p, &GeneratorSpec::haar(2), &LimitNormOptions::default()).unwrap();
    assert!((lim.extrapolated - 12f64.sqrt()).abs() < 0.15, "{}", lim.extrapolated);
    assert!(lim.best_lower_bound() <= 12f64.sqrt() + 1e-9);
}
