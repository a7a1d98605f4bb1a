use proptest::prelude::*;

use strongconv::concentration::{alpha_exact, expansion_check, FiniteMMSpace};
use strongconv::ensembles::{sample_gue, sample_haar_unitary, sample_tuple, EnsembleKind, MatTuple};
use strongconv::freeprob::{haar_unitary_moment, poly_moment, semicircular_moment, GeneratorSpec};
use strongconv::laws::{empirical_law, law_distance, Law};
use strongconv::linalg::{CMat, C64};
use strongconv::ncpoly::{Letter, Monomial, NcPoly};
use strongconv::orbit::{covering_from_distances, dorb_exact_herm1, dorb_lower, dorb_upper, OrbitOptions};
use strongconv::seed::SeedSpec;
use strongconv::spectral::{hausdorff, HausdorffTarget, SpectrumSet};

fn letter(max_index: usize) -> impl Strategy<Value = Letter> {
    (1..=max_index, any::<bool>()).prop_map(|(i, s)| Letter::new(i, s).unwrap())
}

fn monomial(max_index: usize, max_len: usize) -> impl Strategy<Value = Monomial> {
    prop::collection::vec(letter(max_index), 0..=max_len).prop_map(Monomial::from_letters)
}

/// Small Gaussian-integer coefficients keep ring identities exact in floating point.
fn int_poly(max_index: usize, max_len: usize) -> impl Strategy<Value = NcPoly> {
    prop::collection::vec((monomial(max_index, max_len), -4i32..=4, -4i32..=4), 0..5)
        .prop_map(|ts| NcPoly::from_terms(ts.into_iter().map(|(m, a, b)| (m, C64::new(a as f64, b as f64)))))
}

fn real_poly() -> impl Strategy<Value = NcPoly> {
    prop::collection::vec((monomial(3, 4), -1e6f64..1e6, prop_oneof![Just(0.0), -1e3f64..1e3]), 0..5)
        .prop_map(|ts| NcPoly::from_terms(ts.into_iter().map(|(m, a, b)| (m, C64::new(a, b)))))
}

fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn scale(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(p in int_poly(3, 3), q in int_poly(3, 3), r in int_poly(3, 3)) {
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &NcPoly::one(), p.clone());
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!((&p * &q).adjoint(), &q.adjoint() * &p.adjoint());
        prop_assert_eq!(p.adjoint().adjoint(), p.clone());
    }

    #[test]
    fn parse_format_round_trip(p in real_poly()) {
        let text = p.to_string();
        let back: NcPoly = text.parse().unwrap();
        prop_assert_eq!(back, p, "{}", text);
    }

    #[test]
    fn evaluate_is_a_star_homomorphism(p in int_poly(2, 3), q in int_poly(2, 3), seed in any::<u64>(), k in 1usize..5) {
        let mats: Vec<CMat> = (0..2u64)
            .map(|j| {
                let mut s = SeedSpec::with_path(seed, &[j]).stream();
                CMat::from_fn(k, k, |_, _| C64::new(s.gaussian(), s.gaussian()))
            })
            .collect();
        let pe = p.evaluate(&mats).unwrap();
        let qe = q.evaluate(&mats).unwrap();
        let prod = (&p * &q).evaluate(&mats).unwrap();
        let expect = &pe * &qe;
        prop_assert!(max_abs_diff(&prod, &expect) <= 1e-10 * scale(&expect));
        let sum = (&p + &q).evaluate(&mats).unwrap();
        prop_assert!(max_abs_diff(&sum, &(&pe + &qe)) <= 1e-12 * scale(&sum));
        let adj = p.adjoint().evaluate(&mats).unwrap();
        prop_assert!(max_abs_diff(&adj, &pe.adjoint()) <= 1e-12 * scale(&adj));
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec(-5.0f64..5.0, 1..8),
        b in prop::collection::vec(-5.0f64..5.0, 1..8),
        c in prop::collection::vec(-5.0f64..5.0, 1..8),
    ) {
        let set = |v: &Vec<f64>| SpectrumSet::from_points(v.clone(), 0.0, v.len()).unwrap();
        let d = |x: &Vec<f64>, y: &Vec<f64>| hausdorff(&set(x), &HausdorffTarget::Set(set(y))).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert!(d(&a, &b) >= 0.0);
    }

    #[test]
    fn hull_of_points_is_close(a in prop::collection::vec(-2.0f64..2.0, 2..40)) {
        let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let set = SpectrumSet::from_points(a.clone(), 0.0, a.len()).unwrap();
        let h = hausdorff(&set, &HausdorffTarget::Intervals(vec![(lo, hi)])).unwrap();
        let mut sorted = a.clone();
        sorted.sort_by(f64::total_cmp);
        let widest_gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        prop_assert!((h - widest_gap / 2.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dorb_exact_is_a_conjugation_invariant_pseudometric(seed in any::<u64>(), k in 1usize..8) {
        let m = |i: u64| sample_gue(k, &SeedSpec::with_path(seed, &[i])).unwrap();
        let (a, b, c) = (m(0), m(1), m(2));
        let u = sample_haar_unitary(k, &SeedSpec::with_path(seed, &[3])).unwrap();
        let d = |x: &CMat, y: &CMat| dorb_exact_herm1(x, y).unwrap();
        let ua = &u * &a * u.adjoint();
        prop_assert!(d(&a, &ua) <= 1e-12);
        prop_assert!((d(&ua, &b) - d(&a, &b)).abs() <= 1e-12);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-15);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn dorb_sandwich(seed in any::<u64>(), k in 2usize..6, r in 1usize..3, haar in any::<bool>()) {
        let kind = if haar { EnsembleKind::Haar } else { EnsembleKind::Gue };
        let a = sample_tuple(kind, r, k, &SeedSpec::with_path(seed, &[0])).unwrap();
        let b = sample_tuple(kind, r, k, &SeedSpec::with_path(seed, &[1])).unwrap();
        let opts = OrbitOptions { restarts: 2, max_iters: 100, ..OrbitOptions::default() };
        let up = dorb_upper(&a, &b, &opts).unwrap();
        let lo = dorb_lower(&a, &b).unwrap();
        prop_assert!(lo <= up.value + 1e-10, "lower {} upper {}", lo, up.value);
        // Conjugating one side does not change either bound much.
        let u = sample_haar_unitary(k, &SeedSpec::with_path(seed, &[2])).unwrap();
        let lo2 = dorb_lower(&a.conjugate_by(&u), &b).unwrap();
        prop_assert!((lo - lo2).abs() <= 1e-10);
    }

    #[test]
    fn covering_numbers_are_monotone(points in prop::collection::vec(-3.0f64..3.0, 1..12), k in 1usize..64) {
        let d: Vec<Vec<f64>> = points.iter().map(|x| points.iter().map(|y| (x - y).abs()).collect()).collect();
        let mut last = usize::MAX;
        for i in 0..40 {
            let eps = 0.01 + 0.1 * i as f64;
            let probe = covering_from_distances(&d, eps, k);
            prop_assert!(probe.cover_size <= last);
            prop_assert!(probe.cover_size <= probe.greedy_size);
            prop_assert!(probe.cover_size >= 1);
            last = probe.cover_size;
        }
    }

    #[test]
    fn expansion_holds_for_real_weights(
        n in 1usize..7,
        raw in prop::collection::vec(0.01f64..1.0, 7),
        edges in prop::collection::vec(0.1f64..3.0, 21),
        mask in 0u32..128,
        eps in 0.05f64..3.0,
    ) {
        let mut d = vec![vec![f64::INFINITY; n]; n];
        let mut e = edges.iter();
        for i in 0..n {
            d[i][i] = 0.0;
            for j in i + 1..n {
                let w = *e.next().unwrap();
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][m] + d[m][j]);
                }
            }
        }
        let total: f64 = raw[..n].iter().sum();
        let w: Vec<f64> = raw[..n].iter().map(|x| x / total).collect();
        let space = FiniteMMSpace::new(d, w).unwrap();
        let omega: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        prop_assert!(expansion_check(&space, &omega, eps).unwrap());
        let a = alpha_exact(&space, eps).unwrap();
        prop_assert!((0.0..=0.5 + 1e-12).contains(&a));
        prop_assert!(alpha_exact(&space, eps * 1.5).unwrap() <= a + 1e-12);
    }

    #[test]
    fn oracle_traciality(word in prop::collection::vec(1usize..4, 0..9), hw in prop::collection::vec((1usize..4, prop_oneof![Just(1i8), Just(-1i8)]), 0..9), shift in 0usize..9) {
        let mut rot = word.clone();
        if !rot.is_empty() {
            let n = rot.len();
            rot.rotate_left(shift % n);
        }
        prop_assert_eq!(semicircular_moment(&word), semicircular_moment(&rot));
        let mut hrot = hw.clone();
        if !hrot.is_empty() {
            let n = hrot.len();
            hrot.rotate_left(shift % n);
        }
        prop_assert_eq!(haar_unitary_moment(&hw), haar_unitary_moment(&hrot));
    }

    #[test]
    fn oracle_positivity(p in int_poly(2, 2), haar in any::<bool>()) {
        let spec = if haar { GeneratorSpec::haar(2) } else { GeneratorSpec::semicircular(2) };
        let m = poly_moment(&(&p.adjoint() * &p), &spec).unwrap();
        prop_assert!(m.re >= -1e-9);
        prop_assert!(m.im.abs() <= 1e-9);
    }

    #[test]
    fn empirical_laws_are_tracial_and_round_trip(seed in any::<u64>(), k in 1usize..5) {
        let t = sample_tuple(EnsembleKind::Gue, 2, k, &SeedSpec::new(seed)).unwrap();
        let law = empirical_law(&t, 3).unwrap();
        for (w, v) in law.moments() {
            for s in 0..w.degree() {
                let r = law.get(&w.rotate(s)).unwrap();
                prop_assert!((r - v).norm() <= 1e-10);
            }
        }
        let back = Law::from_json(law.to_json()).unwrap();
        prop_assert_eq!(law_distance(&law, &back, 3).unwrap(), 0.0);
        let u = sample_haar_unitary(k, &SeedSpec::with_path(seed, &[9])).unwrap();
        let conj = empirical_law(&t.conjugate_by(&u), 3).unwrap();
        prop_assert!(law_distance(&law, &conj, 3).unwrap() <= 1e-10);
    }

    #[test]
    fn tuple_conjugation_preserves_shape(seed in any::<u64>(), k in 1usize..5, r in 1usize..4) {
        let t: MatTuple = sample_tuple(EnsembleKind::Haar, r, k, &SeedSpec::new(seed)).unwrap();
        let u = sample_haar_unitary(k, &SeedSpec::with_path(seed, &[1])).unwrap();
        let c = t.conjugate_by(&u);
        prop_assert_eq!(c.len(), r);
        prop_assert_eq!(c.dim(), k);
    }
}
