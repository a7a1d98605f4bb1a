//! Exact moment oracles for free semicircular families and free Haar
//! unitaries, their two-leg tensor versions, and the limit-norm estimator.
//!
//! Tensor-leg convention for polynomials over `2r` generators: indices
//! `1..=r` live on the left leg, `r+1..=2r` on the right leg. The legs
//! commute, so a word's moment is the product of the moments of its left and
//! right subwords.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{C64, ZERO};
use crate::ncpoly::{Monomial, NcPoly};
use crate::{Error, Result};

/// Which tensor leg a letter acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Leg {
    Left,
    Right,
    /// Single-algebra word.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OracleLetter {
    pub leg: Leg,
    pub index: usize,
    /// Adjoint; for Haar unitaries this is the inverse.
    pub starred: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct OracleWord(pub Vec<OracleLetter>);

impl OracleWord {
    pub fn single(indices: &[usize]) -> Self {
        Self(indices.iter().map(|&index| OracleLetter { leg: Leg::None, index, starred: false }).collect())
    }

    pub fn push(mut self, leg: Leg, index: usize, starred: bool) -> Self {
        self.0.push(OracleLetter { leg, index, starred });
        self
    }

    /// Letters of the left leg (including `Leg::None`) and of the right leg, order kept.
    fn split(&self) -> (Vec<(usize, bool)>, Vec<(usize, bool)>) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for l in &self.0 {
            match l.leg {
                Leg::Left | Leg::None => left.push((l.index, l.starred)),
                Leg::Right => right.push((l.index, l.starred)),
            }
        }
        (left, right)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Semicircular { mean: f64, variance: f64 },
    HaarUnitary,
}

/// A family of `count` free generators of one kind (per tensor leg).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub count: usize,
}

impl GeneratorSpec {
    /// Centered, variance-one semicirculars.
    pub fn semicircular(count: usize) -> Self {
        Self { kind: GeneratorKind::Semicircular { mean: 0.0, variance: 1.0 }, count }
    }

    pub fn semicircular_with(count: usize, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::InvalidArgument(format!("semicircular variance must be > 0, got {variance}")));
        }
        Ok(Self { kind: GeneratorKind::Semicircular { mean, variance }, count })
    }

    pub fn haar(count: usize) -> Self {
        Self { kind: GeneratorKind::HaarUnitary, count }
    }

    pub fn is_haar(&self) -> bool {
        matches!(self.kind, GeneratorKind::HaarUnitary)
    }
}

/// Generator family name as used on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorFamily {
    Semicircular,
    Haar,
}

impl FromStr for GeneratorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "semicircular" | "semicircle" | "gue" => Ok(Self::Semicircular),
            "haar" | "haar_unitary" => Ok(Self::Haar),
            other => Err(Error::InvalidArgument(format!("unknown generator family {other:?}"))),
        }
    }
}

impl GeneratorFamily {
    pub fn spec(self, count: usize) -> GeneratorSpec {
        match self {
            Self::Semicircular => GeneratorSpec::semicircular(count),
            Self::Haar => GeneratorSpec::haar(count),
        }
    }
}

/// Semicircle density with mean `mu` and variance `var`, supported on `[μ−2σ, μ+2σ]`.
pub fn semicircle_density(x: f64, mu: f64, var: f64) -> f64 {
    let d = 4.0 * var - (x - mu).powi(2);
    if d <= 0.0 {
        0.0
    } else {
        d.sqrt() / (2.0 * std::f64::consts::PI * var)
    }
}

/// Number of non-crossing pair partitions of `word` pairing equal indices,
/// i.e. `τ(s_{i1}⋯s_{in})` for a centered variance-one free semicircular family.
pub fn semicircular_moment(word: &[usize]) -> f64 {
    let w: Vec<(usize, bool)> = word.iter().map(|&i| (i, false)).collect();
    semicircular_moment_affine(&w, 0.0, 1.0)
}

/// `τ` of the word with each letter `μ + σ·s_j`.
///
/// Interval recursion on the first letter: it is either a `μ` singleton or
/// paired (weight `σ²`) with a later equal-index letter, splitting the word
/// into an inside and an outside part.
fn semicircular_moment_affine(word: &[(usize, bool)], mean: f64, variance: f64) -> f64 {
    let n = word.len();
    if n == 0 {
        return 1.0;
    }
    let centered = mean == 0.0;
    if centered && n % 2 == 1 {
        return 0.0;
    }
    // memo[i][j] = value on word[i..j]
    let mut memo = vec![vec![f64::NAN; n + 1]; n + 1];
    for i in 0..=n {
        memo[i][i] = 1.0;
    }
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut acc = if centered { 0.0 } else { mean * memo[i + 1][j] };
            for m in (i + 1)..j {
                if word[m].0 != word[i].0 {
                    continue;
                }
                if centered && (m - i) % 2 == 0 {
                    continue;
                }
                let inner = memo[i + 1][m];
                let outer = memo[m + 1][j];
                if inner != 0.0 && outer != 0.0 {
                    acc += variance * inner * outer;
                }
            }
            memo[i][j] = acc;
        }
    }
    memo[0][n]
}

/// Moment of a word in free Haar unitaries: `1` if the word reduces to the
/// identity in the free group, else `0`. `exponent` is `±1`.
pub fn haar_unitary_moment(word: &[(usize, i8)]) -> f64 {
    let w: Vec<(usize, bool)> = word.iter().map(|&(i, e)| (i, e < 0)).collect();
    if free_reduce(&w).is_empty() {
        1.0
    } else {
        0.0
    }
}

/// Cancel adjacent `u u⁻¹` pairs.
fn free_reduce(word: &[(usize, bool)]) -> Vec<(usize, bool)> {
    let mut stack: Vec<(usize, bool)> = Vec::with_capacity(word.len());
    for &(i, inv) in word {
        match stack.last() {
            Some(&(j, jinv)) if j == i && jinv != inv => {
                stack.pop();
            }
            _ => stack.push((i, inv)),
        }
    }
    stack
}

fn single_leg_moment(word: &[(usize, bool)], spec: &GeneratorSpec) -> f64 {
    match spec.kind {
        GeneratorKind::Semicircular { mean, variance } => semicircular_moment_affine(word, mean, variance),
        GeneratorKind::HaarUnitary => {
            if free_reduce(word).is_empty() {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// `τ⊗τ` of a mixed-leg word: product of the two single-leg moments.
pub fn tensor_moment(word: &OracleWord, spec: &GeneratorSpec) -> C64 {
    let (left, right) = word.split();
    C64::new(single_leg_moment(&left, spec) * single_leg_moment(&right, spec), 0.0)
}

/// Map a monomial to its oracle word under the tensor-leg convention.
pub fn oracle_word(m: &Monomial, spec: &GeneratorSpec) -> Result<OracleWord> {
    let r = spec.count;
    m.letters()
        .iter()
        .map(|l| {
            if l.index <= r {
                Ok(OracleLetter { leg: Leg::Left, index: l.index, starred: l.starred })
            } else if l.index <= 2 * r {
                Ok(OracleLetter { leg: Leg::Right, index: l.index - r, starred: l.starred })
            } else {
                Err(Error::IndexOutOfRange { index: l.index, len: 2 * r })
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(OracleWord)
}

/// Linear extension of [`tensor_moment`] to polynomials.
pub fn poly_moment(p: &NcPoly, spec: &GeneratorSpec) -> Result<C64> {
    let mut acc = ZERO;
    for (m, c) in p.terms() {
        acc += c * tensor_moment(&oracle_word(m, spec)?, spec);
    }
    Ok(acc)
}

/// Options for [`limit_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitNormOptions {
    pub q_max: usize,
    /// Upper bound on `deg(P)·q_max`, the word length reached in the GNS space.
    pub letter_budget: usize,
    /// Hard cap on the number of basis terms of any GNS vector.
    pub term_cap: usize,
}

impl Default for LimitNormOptions {
    fn default() -> Self {
        Self { q_max: 12, letter_budget: 28, term_cap: 5_000_000 }
    }
}

impl LimitNormOptions {
    pub fn with_q_max(q_max: usize) -> Self {
        Self { q_max, ..Self::default() }
    }
}

/// Result of [`limit_norm`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitNorm {
    /// `m_q = τ((P*P)^q)`, `q = 1..=q_max`.
    pub moments: Vec<f64>,
    /// `m_q^{1/2q}`; each is a lower bound on the limit norm.
    pub raw_lower_bounds: Vec<f64>,
    /// `ρ` from the fit `log m_q ≈ 2q log ρ − α log q + c` on the upper half of the q-range.
    pub extrapolated: f64,
    /// Fitted edge exponent `α`.
    pub alpha: f64,
    /// First q of the fit window.
    pub fit_from: usize,
}

impl LimitNorm {
    pub fn best_lower_bound(&self) -> f64 {
        self.raw_lower_bounds.iter().copied().fold(0.0, f64::max)
    }
}

/// Signed letter code: `+i` for `T_i`, `-i` for `T_i*`.
type Code = i32;

/// Basis vector of the GNS space of the limit algebra: one word per leg,
/// stored with the leftmost letter last.
///
/// For semicirculars the leg space is the full Fock space over the
/// generators and `s_i = μ + σ(l_i + l_i*)`; for Haar unitaries it is
/// `ℓ²` of the free group, with basis the reduced words.
type BasisKey = (Vec<Code>, Vec<Code>);
type GnsVector = BTreeMap<BasisKey, C64>;

struct LegAction {
    haar: bool,
    mean: f64,
    sigma: f64,
}

impl LegAction {
    fn new(spec: &GeneratorSpec) -> Self {
        match spec.kind {
            GeneratorKind::HaarUnitary => Self { haar: true, mean: 0.0, sigma: 1.0 },
            GeneratorKind::Semicircular { mean, variance } => Self { haar: false, mean, sigma: variance.sqrt() },
        }
    }

    /// Apply one letter to a basis word, calling `emit` for each output term.
    fn apply(&self, code: Code, word: &[Code], emit: &mut impl FnMut(Vec<Code>, f64)) {
        if self.haar {
            let mut w = word.to_vec();
            if w.last() == Some(&-code) {
                w.pop();
            } else {
                w.push(code);
            }
            emit(w, 1.0);
            return;
        }
        let i = code.abs();
        if self.mean != 0.0 {
            emit(word.to_vec(), self.mean);
        }
        let mut up = word.to_vec();
        up.push(i);
        emit(up, self.sigma);
        if word.last() == Some(&i) {
            emit(word[..word.len() - 1].to_vec(), self.sigma);
        }
    }
}

/// `P` split into legs: `(coefficient, left codes, right codes)`.
fn leg_terms(p: &NcPoly, spec: &GeneratorSpec) -> Result<Vec<(C64, Vec<Code>, Vec<Code>)>> {
    p.terms()
        .map(|(m, c)| {
            let w = oracle_word(m, spec)?;
            let mut left = Vec::new();
            let mut right = Vec::new();
            for l in &w.0 {
                let code = if l.starred { -(l.index as Code) } else { l.index as Code };
                match l.leg {
                    Leg::Right => right.push(code),
                    _ => left.push(code),
                }
            }
            Ok((*c, left, right))
        })
        .collect()
}

fn apply_leg_word(action: &LegAction, codes: &[Code], start: Vec<(Vec<Code>, f64)>) -> Vec<(Vec<Code>, f64)> {
    let mut current = start;
    for &code in codes.iter().rev() {
        let mut next = Vec::with_capacity(current.len() * 2);
        for (w, a) in &current {
            action.apply(code, w, &mut |nw, b| next.push((nw, a * b)));
        }
        current = next;
    }
    current
}

fn apply_poly(
    terms: &[(C64, Vec<Code>, Vec<Code>)],
    action: &LegAction,
    v: &GnsVector,
    term_cap: usize,
) -> Result<GnsVector> {
    let mut out = GnsVector::new();
    for ((lw, rw), x) in v {
        for (c, left, right) in terms {
            let ls = apply_leg_word(action, left, vec![(lw.clone(), 1.0)]);
            let rs = apply_leg_word(action, right, vec![(rw.clone(), 1.0)]);
            for (l, a) in &ls {
                for (r, b) in &rs {
                    *out.entry((l.clone(), r.clone())).or_insert(ZERO) += x * c * (a * b);
                }
            }
            if out.len() > term_cap {
                return Err(Error::Budget(format!("GNS vector exceeded {term_cap} basis terms")));
            }
        }
    }
    out.retain(|_, z| *z != ZERO);
    Ok(out)
}

/// Estimate `‖P‖` in the limit algebra from `m_q = τ((P*P)^q)`.
///
/// The moments are computed exactly as `m_q = ‖w_q‖²` for the vectors
/// `w_1 = PΩ`, `w_2 = P*w_1`, `w_3 = Pw_2`, … in the GNS space of the
/// limit state, which only needs words of length `deg(P)·q`.
pub fn limit_norm(p: &NcPoly, spec: &GeneratorSpec, opts: &LimitNormOptions) -> Result<LimitNorm> {
    if opts.q_max == 0 {
        return Err(Error::InvalidArgument("q_max must be ≥ 1".into()));
    }
    let depth = p.degree() * opts.q_max;
    if depth > opts.letter_budget {
        return Err(Error::Budget(format!("deg(P)·q_max = {depth} exceeds the letter budget {}", opts.letter_budget)));
    }
    let action = LegAction::new(spec);
    let forward = leg_terms(p, spec)?;
    let backward = leg_terms(&p.adjoint(), spec)?;
    let mut w = GnsVector::new();
    w.insert((Vec::new(), Vec::new()), C64::new(1.0, 0.0));
    let mut moments = Vec::with_capacity(opts.q_max);
    for q in 1..=opts.q_max {
        let terms = if q % 2 == 1 { &forward } else { &backward };
        w = apply_poly(terms, &action, &w, opts.term_cap)?;
        moments.push(w.values().map(|z| z.norm_sqr()).sum::<f64>());
    }
    let raw_lower_bounds: Vec<f64> =
        moments.iter().enumerate().map(|(i, &m)| if m > 0.0 { m.powf(1.0 / (2.0 * (i + 1) as f64)) } else { 0.0 }).collect();

    let fit_from = opts.q_max / 2 + 1;
    let window: Vec<(f64, f64)> = (fit_from..=opts.q_max)
        .filter(|&qq| moments[qq - 1] > 0.0)
        .map(|qq| (qq as f64, moments[qq - 1].ln()))
        .collect();
    let best_raw = raw_lower_bounds.iter().copied().fold(0.0, f64::max);
    let (extrapolated, alpha) = if window.len() >= 3 { fit_edge_model(&window) } else { (best_raw, 0.0) };
    Ok(LimitNorm { moments, raw_lower_bounds, extrapolated, alpha, fit_from })
}

/// Least squares for `y ≈ 2q·log ρ − α·log q + c`; returns `(ρ, α)`.
fn fit_edge_model(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len();
    let a = DMatrix::from_fn(n, 3, |i, j| {
        let q = points[i].0;
        match j {
            0 => 2.0 * q,
            1 => -q.ln(),
            _ => 1.0,
        }
    });
    let b = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("svd computed u and v");
    (sol[0].exp(), sol[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircular_examples() {
        assert_eq!(semicircular_moment(&[1, 1]), 1.0);
        assert_eq!(semicircular_moment(&[1, 2, 1, 2]), 0.0);
        assert_eq!(semicircular_moment(&[1, 1, 1, 1]), 2.0);
        assert_eq!(semicircular_moment(&[1, 1, 2, 2]), 1.0);
        assert_eq!(semicircular_moment(&[1]), 0.0);
        assert_eq!(semicircular_moment(&[]), 1.0);
    }

    #[test]
    fn affine_semicircular() {
        // s = 1 + 2·s0: τ(s) = 1, τ(s²) = 1 + 4
        let spec = GeneratorSpec::semicircular_with(1, 1.0, 4.0).unwrap();
        assert!((poly_moment(&NcPoly::generator(1), &spec).unwrap().re - 1.0).abs() < 1e-14);
        let sq: NcPoly = "T1^2".parse().unwrap();
        assert!((poly_moment(&sq, &spec).unwrap().re - 5.0).abs() < 1e-14);
        assert!(GeneratorSpec::semicircular_with(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn haar_examples() {
        assert_eq!(haar_unitary_moment(&[(1, 1), (1, -1)]), 1.0);
        assert_eq!(haar_unitary_moment(&[(1, 1), (2, 1)]), 0.0);
        assert_eq!(haar_unitary_moment(&[(1, 1), (2, 1), (1, -1), (2, -1)]), 0.0);
        assert_eq!(haar_unitary_moment(&[(1, 1), (2, 1), (2, -1), (1, -1)]), 1.0);
    }

    #[test]
    fn tensor_examples() {
        let spec = GeneratorSpec::semicircular(1);
        let w = OracleWord::default().push(Leg::Left, 1, false).push(Leg::Right, 1, false);
        assert_eq!(tensor_moment(&w, &spec).re, 0.0);
        let w = OracleWord::default().push(Leg::Left, 1, false).push(Leg::Left, 1, false);
        assert_eq!(tensor_moment(&w, &spec).re, 1.0);
        let w = OracleWord::default()
            .push(Leg::Left, 1, false)
            .push(Leg::Right, 1, false)
            .push(Leg::Left, 1, false)
            .push(Leg::Right, 1, false);
        assert_eq!(tensor_moment(&w, &spec).re, 1.0);
    }

    #[test]
    fn poly_moment_examples() {
        let spec = GeneratorSpec::semicircular(1);
        assert_eq!(poly_moment(&NcPoly::one(), &spec).unwrap(), C64::new(1.0, 0.0));
        let p: NcPoly = "(T1 + T2)^2".parse().unwrap();
        assert_eq!(poly_moment(&p, &spec).unwrap().re, 2.0);
        let h: NcPoly = "T1 T1'".parse().unwrap();
        assert_eq!(poly_moment(&h, &GeneratorSpec::haar(1)).unwrap().re, 1.0);
        assert!(poly_moment(&NcPoly::generator(3), &spec).is_err());
    }

    #[test]
    fn limit_norm_haar_generator() {
        let res = limit_norm(&NcPoly::generator(1), &GeneratorSpec::haar(1), &LimitNormOptions::with_q_max(12)).unwrap();
        assert!(res.moments.iter().all(|&m| m == 1.0));
        assert!(res.raw_lower_bounds.iter().all(|&b| b == 1.0));
        assert!((res.extrapolated - 1.0).abs() < 1e-12);
    }

    #[test]
    fn limit_norm_semicircle_edge() {
        let res = limit_norm(&NcPoly::generator(1), &GeneratorSpec::semicircular(1), &LimitNormOptions::with_q_max(12)).unwrap();
        assert!((1.95..=2.05).contains(&res.extrapolated), "{}", res.extrapolated);
        assert!(res.raw_lower_bounds.iter().all(|&b| b <= 2.0 + 1e-9));
        assert!(res.raw_lower_bounds.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn limit_norm_sums() {
        let p: NcPoly = "T1 + T2".parse().unwrap();
        let free = limit_norm(&p, &GeneratorSpec::semicircular(2), &LimitNormOptions::with_q_max(12)).unwrap();
        assert!((free.extrapolated - 8f64.sqrt()).abs() < 0.1, "{}", free.extrapolated);
        // With r = 1, T2 is the right tensor leg: the spectrum is [-4, 4].
        let tensor = limit_norm(&p, &GeneratorSpec::semicircular(1), &LimitNormOptions::with_q_max(12)).unwrap();
        assert!((tensor.extrapolated - 4.0).abs() < 0.15, "{}", tensor.extrapolated);
    }

    #[test]
    fn limit_norm_budget() {
        let p: NcPoly = "T1 T2".parse().unwrap();
        let err = limit_norm(&p, &GeneratorSpec::semicircular(2), &LimitNormOptions::with_q_max(15));
        assert!(matches!(err, Err(Error::Budget(_))));
        let capped = LimitNormOptions { term_cap: 10, ..LimitNormOptions::with_q_max(6) };
        assert!(matches!(limit_norm(&p, &GeneratorSpec::semicircular(2), &capped), Err(Error::Budget(_))));
    }

    #[test]
    fn gns_moments_match_combinatorial_oracle() {
        let cases = [
            ("T1 + 2*T2 T1 - i*T2'", GeneratorSpec::semicircular(2)),
            ("T1 T2 + T2", GeneratorSpec::semicircular(1)),
            ("T1 + T2 T1' + 0.5*T2'", GeneratorSpec::haar(2)),
            ("T1 T2 + T2' T3 T1", GeneratorSpec::haar(2)),
            ("T1 + 3", GeneratorSpec::semicircular_with(1, 0.5, 2.0).unwrap()),
        ];
        for (src, spec) in cases {
            let p: NcPoly = src.parse().unwrap();
            let res = limit_norm(&p, &spec, &LimitNormOptions::with_q_max(4)).unwrap();
            let pp = &p.adjoint() * &p;
            for q in 1..=4u32 {
                let m = poly_moment(&pp.pow(q), &spec).unwrap();
                let got = res.moments[q as usize - 1];
                assert!((m.re - got).abs() <= 1e-9 * (1.0 + got), "{src} q={q}: {} vs {got}", m.re);
                assert!(m.im.abs() <= 1e-9 * (1.0 + got));
            }
        }
    }

    #[test]
    fn limit_norm_of_zero() {
        let res = limit_norm(&NcPoly::zero(), &GeneratorSpec::semicircular(1), &LimitNormOptions::with_q_max(4)).unwrap();
        assert_eq!(res.extrapolated, 0.0);
    }

    #[test]
    fn density_integrates_to_one() {
        let n = 20000;
        let h = 4.0 / n as f64;
        let total: f64 = (0..n).map(|i| semicircle_density(-2.0 + (i as f64 + 0.5) * h, 0.0, 1.0) * h).sum();
        assert!((total - 1.0).abs() < 1e-4);
    }
}
