//! Truncated tracial laws, empirical laws of matrix tuples, law distances
//! and microstate membership.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensembles::{MatTuple, RADIUS_SLACK};
use crate::freeprob::{limit_norm, poly_moment, GeneratorSpec, LimitNormOptions};
use crate::linalg::{identity, ntrace, ntrace_of_product, CMat, C64, ONE};
use crate::ncpoly::{Letter, Monomial, NcPoly};
use crate::spectral::op_norm;
use crate::tensorops::{eval_tensor_poly, tensor_norm};
use crate::{Error, Result};

/// Default degree cap for laws and neighborhoods.
pub const DEFAULT_DEGREE: usize = 4;

/// Slack on the bound `|ℓ(w)| ≤ Π R_j`.
pub const BOUND_SLACK: f64 = 1e-9;

/// A law truncated to *-monomials of degree ≤ `degree_cap` in `n_gens` generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Law {
    n_gens: usize,
    degree_cap: usize,
    radii: Vec<f64>,
    moments: BTreeMap<Monomial, C64>,
}

impl Law {
    /// Build and validate a law. Every monomial of degree ≤ `degree_cap` must be present.
    pub fn new(n_gens: usize, degree_cap: usize, radii: Vec<f64>, moments: BTreeMap<Monomial, C64>) -> Result<Self> {
        let law = Self { n_gens, degree_cap, radii, moments };
        law.validate(1e-10)?;
        Ok(law)
    }

    /// Check `ℓ(1) = 1`, `ℓ(w*) = conj ℓ(w)` and `|ℓ(w)| ≤ Π R_j` (the latter with [`BOUND_SLACK`]).
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.radii.len() != self.n_gens {
            return Err(Error::Dimension(format!("{} radii for {} generators", self.radii.len(), self.n_gens)));
        }
        for m in Monomial::enumerate(self.n_gens, self.degree_cap) {
            if !self.moments.contains_key(&m) {
                return Err(Error::InvalidArgument(format!("law is missing the moment of {m}")));
            }
        }
        if (self.moments[&Monomial::unit()] - ONE).norm() > tol {
            return Err(Error::InvalidArgument("ℓ(1) ≠ 1".into()));
        }
        for (m, v) in &self.moments {
            if m.degree() > self.degree_cap || m.max_index() > self.n_gens {
                return Err(Error::InvalidArgument(format!("monomial {m} outside the law's signature")));
            }
            let adj = self.moments[&m.adjoint()];
            if (adj - v.conj()).norm() > tol * (1.0 + v.norm()) {
                return Err(Error::InvalidArgument(format!("ℓ({m}*) ≠ conj ℓ({m})")));
            }
            let bound: f64 = m.letters().iter().map(|l| self.radii[l.index - 1]).product();
            if v.norm() > bound + BOUND_SLACK {
                return Err(Error::InvalidArgument(format!("|ℓ({m})| = {} exceeds the radius bound {bound}", v.norm())));
            }
        }
        Ok(())
    }

    /// Oracle law of the first `n_gens` generators of a free family
    /// (tensor-leg convention when `n_gens > spec.count`).
    pub fn from_oracle(spec: &GeneratorSpec, n_gens: usize, degree_cap: usize, radii: Vec<f64>) -> Result<Self> {
        let mut moments = BTreeMap::new();
        for m in Monomial::enumerate(n_gens, degree_cap) {
            let v = poly_moment(&NcPoly::monomial(m.clone(), ONE), spec)?;
            moments.insert(m, v);
        }
        Self::new(n_gens, degree_cap, radii, moments)
    }

    pub fn n_gens(&self) -> usize {
        self.n_gens
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn moments(&self) -> &BTreeMap<Monomial, C64> {
        &self.moments
    }

    pub fn get(&self, m: &Monomial) -> Option<C64> {
        self.moments.get(m).copied()
    }

    /// `ℓ(P)` by linearity, for `deg P ≤ degree_cap`.
    pub fn eval(&self, p: &NcPoly) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in p.terms() {
            let v = self.get(m).ok_or_else(|| Error::InvalidArgument(format!("{m} is outside the law's signature")))?;
            acc += c * v;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(LawFile::from(self)).expect("law serializes")
    }

    pub fn from_json(v: serde_json::Value) -> Result<Self> {
        let f: LawFile = serde_json::from_value(v)?;
        f.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// On-disk form: moments keyed by monomial string, infinite radii as `null`.
#[derive(Serialize, Deserialize)]
struct LawFile {
    #[serde(rename = "D")]
    degree_cap: usize,
    n_gens: usize,
    radii: Vec<Option<f64>>,
    moments: BTreeMap<String, [f64; 2]>,
}

impl From<&Law> for LawFile {
    fn from(l: &Law) -> Self {
        Self {
            degree_cap: l.degree_cap,
            n_gens: l.n_gens,
            radii: l.radii.iter().map(|&r| r.is_finite().then_some(r)).collect(),
            moments: l.moments.iter().map(|(m, v)| (m.to_string(), [v.re, v.im])).collect(),
        }
    }
}

impl TryFrom<LawFile> for Law {
    type Error = Error;

    fn try_from(f: LawFile) -> Result<Self> {
        let mut moments = BTreeMap::new();
        for (s, [re, im]) in f.moments {
            moments.insert(s.parse::<Monomial>()?, C64::new(re, im));
        }
        let radii = f.radii.into_iter().map(|r| r.unwrap_or(f64::INFINITY)).collect();
        Law::new(f.n_gens, f.degree_cap, radii, moments)
    }
}

fn letter_matrix(a: &MatTuple, l: Letter) -> CMat {
    let m = a.get(l.index - 1);
    if l.starred {
        m.adjoint()
    } else {
        m.clone()
    }
}

fn empirical_dfs(
    alphabet: &[(Letter, CMat)],
    prefix: &mut Vec<Letter>,
    product: &CMat,
    depth_left: usize,
    out: &mut BTreeMap<Monomial, C64>,
) {
    for (l, m) in alphabet {
        prefix.push(*l);
        if depth_left == 1 {
            out.insert(Monomial::from_letters(prefix.clone()), ntrace_of_product(product, m));
        } else {
            let next = product * m;
            out.insert(Monomial::from_letters(prefix.clone()), ntrace(&next));
            empirical_dfs(alphabet, prefix, &next, depth_left - 1, out);
        }
        prefix.pop();
    }
}

/// `ℓ_A(w) = tr(w(A))` for every *-monomial of degree ≤ `degree_cap`, with
/// the radii of `A`.
pub fn empirical_law(a: &MatTuple, degree_cap: usize) -> Result<Law> {
    if degree_cap == 0 {
        return Err(Error::InvalidArgument("degree cap must be ≥ 1".into()));
    }
    let alphabet: Vec<(Letter, CMat)> = (1..=a.len())
        .flat_map(|i| [Letter::generator(i), Letter::generator(i).adjoint()])
        .map(|l| (l, letter_matrix(a, l)))
        .collect();
    let mut moments = BTreeMap::new();
    moments.insert(Monomial::unit(), ONE);
    empirical_dfs(&alphabet, &mut Vec::new(), &identity(a.dim()), degree_cap, &mut moments);
    let law = Law { n_gens: a.len(), degree_cap, radii: a.radii().to_vec(), moments };
    Ok(law)
}

/// `max_{deg w ≤ D} |ℓ₁(w) − ℓ₂(w)|`.
pub fn law_distance(l1: &Law, l2: &Law, degree_cap: usize) -> Result<f64> {
    if l1.n_gens != l2.n_gens {
        return Err(Error::Dimension(format!("laws in {} and {} generators", l1.n_gens, l2.n_gens)));
    }
    if degree_cap > l1.degree_cap || degree_cap > l2.degree_cap {
        return Err(Error::InvalidArgument(format!(
            "degree {degree_cap} exceeds a law's cap ({} / {})",
            l1.degree_cap, l2.degree_cap
        )));
    }
    let mut d: f64 = 0.0;
    for (m, v) in l1.moments.range(..).take_while(|(m, _)| m.degree() <= degree_cap) {
        let w = l2.get(m).ok_or_else(|| Error::InvalidArgument(format!("second law lacks {m}")))?;
        d = d.max((v - w).norm());
    }
    Ok(d)
}

/// Weak*-basic neighborhood `{ℓ : |ℓ(w) − center(w)| < ε for all deg w ≤ D}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodSpec {
    center: Law,
    eps: f64,
}

impl NeighborhoodSpec {
    pub fn new(center: Law, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("neighborhood tolerance must be > 0, got {eps}")));
        }
        if center.radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument("neighborhood center needs finite radii".into()));
        }
        Ok(Self { center, eps })
    }

    pub fn center(&self) -> &Law {
        &self.center
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Whether `A` is a microstate: its empirical law lies in the neighborhood
/// and `‖A_j‖ ≤ R_j` for the center's radii.
pub fn is_microstate(a: &MatTuple, nbhd: &NeighborhoodSpec) -> Result<bool> {
    let c = &nbhd.center;
    if a.len() != c.n_gens {
        return Err(Error::Dimension(format!("{}-tuple against a law in {} generators", a.len(), c.n_gens)));
    }
    for (m, &r) in a.matrices().iter().zip(&c.radii) {
        if op_norm(m) > r + RADIUS_SLACK {
            return Ok(false);
        }
    }
    let emp = empirical_law(a, c.degree_cap)?;
    Ok(law_distance(&emp, c, c.degree_cap)? < nbhd.eps)
}

/// Joint membership of `(A, B)` in a neighborhood of a law in
/// `A.len() + B.len()` generators: `A` is a microstate in the presence of
/// the given extension `B`.
pub fn is_microstate_with(a: &MatTuple, b: &MatTuple, nbhd: &NeighborhoodSpec) -> Result<bool> {
    is_microstate(&a.join(b)?, nbhd)
}

/// The matrices a discrepancy is measured on.
#[derive(Clone, Copy, Debug)]
pub enum TupleInput<'a> {
    /// `P(A)` with generators `1..=r`.
    Plain(&'a MatTuple),
    /// `P(X ⊗ 1, 1 ⊗ Y)` with the tensor-leg convention.
    Tensor { x: &'a MatTuple, y: &'a MatTuple },
}

/// One row of [`strong_discrepancy`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub poly: String,
    /// `|tr(P) − τ(P)|`.
    pub moment_gap: Option<f64>,
    /// Finite-k norm minus extrapolated limit norm (signed).
    pub norm_gap: Option<f64>,
    pub finite_norm: Option<f64>,
    pub limit_norm: Option<f64>,
    /// Per-row failure such as an exceeded oracle budget.
    pub error: Option<String>,
}

fn finite_values(p: &NcPoly, input: TupleInput<'_>) -> Result<(C64, f64)> {
    match input {
        TupleInput::Plain(a) => {
            if p.max_index() > a.len() {
                return Err(Error::IndexOutOfRange { index: p.max_index(), len: a.len() });
            }
            let m = p.evaluate(a.matrices())?;
            Ok((ntrace(&m), op_norm(&m)))
        }
        TupleInput::Tensor { x, y } => {
            let t = eval_tensor_poly(p, x, y)?;
            let moment = t.terms().iter().map(|term| term.coeff * ntrace(&term.left) * ntrace(&term.right)).sum();
            Ok((moment, tensor_norm(&t, 1e-10)?.value))
        }
    }
}

/// Moment and norm gaps between finite-k matrices and the free limit, per test polynomial.
pub fn strong_discrepancy(
    input: TupleInput<'_>,
    spec: &GeneratorSpec,
    test_polys: &[NcPoly],
    q_max: usize,
) -> Vec<DiscrepancyRow> {
    let opts = LimitNormOptions::with_q_max(q_max);
    test_polys
        .iter()
        .map(|p| {
            let mut row = DiscrepancyRow {
                poly: p.to_string(),
                moment_gap: None,
                norm_gap: None,
                finite_norm: None,
                limit_norm: None,
                error: None,
            };
            let mut errors = Vec::new();
            match finite_values(p, input) {
                Ok((moment, norm)) => {
                    row.finite_norm = Some(norm);
                    match poly_moment(p, spec) {
                        Ok(m) => row.moment_gap = Some((moment - m).norm()),
                        Err(e) => errors.push(e.to_string()),
                    }
                }
                Err(e) => errors.push(e.to_string()),
            }
            match limit_norm(p, spec, &opts) {
                Ok(l) => row.limit_norm = Some(l.extrapolated),
                Err(e) => errors.push(e.to_string()),
            }
            if let (Some(f), Some(l)) = (row.finite_norm, row.limit_norm) {
                row.norm_gap = Some(f - l);
            }
            if !errors.is_empty() {
                row.error = Some(errors.join("; "));
            }
            row
        })
        .collect()
}

/// All monomials of degree `1..=degree` in `n_gens` generators plus the extra polynomials.
pub fn default_test_polys(n_gens: usize, degree: usize, extra: &[NcPoly]) -> Vec<NcPoly> {
    Monomial::enumerate(n_gens, degree)
        .into_iter()
        .filter(|m| !m.is_unit())
        .map(|m| NcPoly::monomial(m, ONE))
        .chain(extra.iter().cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_haar_unitary, sample_tuple, EnsembleKind};
    use crate::linalg::from_real_diag;
    use crate::seed::SeedSpec;

    #[test]
    fn identity_law_is_all_ones() {
        let a = crate::ensembles::identity_tuple(1, 3).unwrap();
        let l = empirical_law(&a, 2).unwrap();
        assert_eq!(l.moments().len(), 7);
        assert!(l.moments().values().all(|v| (v - ONE).norm() < 1e-15));
    }

    #[test]
    fn explicit_trace() {
        let a = MatTuple::new(vec![from_real_diag(&[1.0, -1.0])]).unwrap();
        let l = empirical_law(&a, 2).unwrap();
        assert_eq!(l.get(&"T1".parse().unwrap()).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(l.get(&"T1 T1".parse().unwrap()).unwrap(), ONE);
        assert!(empirical_law(&a, 0).is_err());
    }

    #[test]
    fn gue_fourth_moment_near_catalan() {
        let a = sample_tuple(EnsembleKind::Gue, 1, 64, &SeedSpec::new(7)).unwrap();
        let l = empirical_law(&a, 4).unwrap();
        let m4 = l.get(&"T1 T1 T1 T1".parse().unwrap()).unwrap();
        assert!((m4.re - 2.0).abs() < 0.5 && m4.im.abs() < 1e-12);
    }

    #[test]
    fn empirical_law_is_tracial() {
        let a = sample_tuple(EnsembleKind::Haar, 2, 6, &SeedSpec::new(3)).unwrap();
        let l = empirical_law(&a, 4).unwrap();
        l.validate(1e-10).unwrap();
        for (m, v) in l.moments() {
            for s in 0..m.degree() {
                assert!((l.get(&m.rotate(s)).unwrap() - v).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn distance_examples() {
        let a = sample_tuple(EnsembleKind::Gue, 2, 8, &SeedSpec::new(1)).unwrap();
        let b = sample_tuple(EnsembleKind::Gue, 2, 8, &SeedSpec::new(2)).unwrap();
        let la = empirical_law(&a, 3).unwrap();
        let lb = empirical_law(&b, 3).unwrap();
        assert_eq!(law_distance(&la, &la, 3).unwrap(), 0.0);
        assert_eq!(law_distance(&la, &lb, 3).unwrap(), law_distance(&lb, &la, 3).unwrap());
        assert!(law_distance(&la, &lb, 4).is_err());
        let c = empirical_law(&sample_tuple(EnsembleKind::Gue, 1, 8, &SeedSpec::new(1)).unwrap(), 3).unwrap();
        assert!(law_distance(&la, &c, 2).is_err());
    }

    #[test]
    fn oracle_law_and_json_round_trip() {
        let l = Law::from_oracle(&GeneratorSpec::semicircular(2), 2, 3, vec![2.5, 2.5]).unwrap();
        assert_eq!(l.get(&"T1 T1'".parse().unwrap()).unwrap(), ONE);
        assert_eq!(l.get(&"T1 T2".parse().unwrap()).unwrap(), C64::new(0.0, 0.0));
        let back = Law::from_json(l.to_json()).unwrap();
        assert_eq!(back, l);
        let open = Law::from_oracle(&GeneratorSpec::haar(1), 1, 2, vec![f64::INFINITY]).unwrap();
        assert_eq!(Law::from_json(open.to_json()).unwrap(), open);
        assert!(Law::from_oracle(&GeneratorSpec::semicircular(1), 1, 2, vec![0.5]).is_err());
    }

    #[test]
    fn microstate_examples() {
        let a = sample_tuple(EnsembleKind::Gue, 1, 16, &SeedSpec::new(5)).unwrap();
        let center = empirical_law(&a, 3).unwrap();
        let center = Law::new(1, 3, vec![10.0], center.moments().clone()).unwrap();
        let nb = NeighborhoodSpec::new(center.clone(), 1e-12).unwrap();
        assert!(is_microstate(&a, &nb).unwrap());
        let u = sample_haar_unitary(16, &SeedSpec::new(9)).unwrap();
        assert!(is_microstate(&a.conjugate_by(&u), &NeighborhoodSpec::new(center.clone(), 1e-9).unwrap()).unwrap());

        let big = MatTuple::new(vec![a.get(0) * C64::new(20.0, 0.0)]).unwrap();
        let wide = NeighborhoodSpec::new(center.clone(), 1e9).unwrap();
        assert!(!is_microstate(&big, &wide).unwrap());
        assert!(NeighborhoodSpec::new(center, 0.0).is_err());
    }

    #[test]
    fn microstate_in_presence() {
        let spec = GeneratorSpec::semicircular(2);
        let center = Law::from_oracle(&spec, 2, 2, vec![2.5, 2.5]).unwrap();
        let nb = NeighborhoodSpec::new(center, 0.3).unwrap();
        let a = sample_tuple(EnsembleKind::Gue, 1, 128, &SeedSpec::new(1)).unwrap();
        let b = sample_tuple(EnsembleKind::Gue, 1, 128, &SeedSpec::new(2)).unwrap();
        assert!(is_microstate_with(&a, &b, &nb).unwrap());
        assert!(!is_microstate_with(&a, &a, &nb).unwrap());
    }

    #[test]
    fn discrepancy_of_constant_is_zero() {
        let a = sample_tuple(EnsembleKind::Gue, 1, 16, &SeedSpec::new(5)).unwrap();
        let rows = strong_discrepancy(TupleInput::Plain(&a), &GeneratorSpec::semicircular(1), &[NcPoly::one()], 8);
        assert_eq!(rows[0].moment_gap, Some(0.0));
        assert!(rows[0].norm_gap.unwrap().abs() < 1e-12);
        assert!(rows[0].error.is_none());
    }

    #[test]
    fn discrepancy_reports_budget_per_row() {
        let a = sample_tuple(EnsembleKind::Gue, 2, 8, &SeedSpec::new(5)).unwrap();
        let polys = default_test_polys(2, 4, &[]);
        let rows = strong_discrepancy(TupleInput::Plain(&a), &GeneratorSpec::semicircular(2), &polys[..5], 12);
        assert!(rows.iter().all(|r| r.error.is_none()));
        let deep: NcPoly = "T1 T2 T1".parse().unwrap();
        let rows = strong_discrepancy(TupleInput::Plain(&a), &GeneratorSpec::semicircular(2), &[deep], 12);
        assert!(rows[0].error.as_deref().unwrap().contains("budget"));
        assert!(rows[0].moment_gap.is_some() && rows[0].norm_gap.is_none());
    }

    #[test]
    fn tensor_discrepancy() {
        let x = sample_tuple(EnsembleKind::Gue, 1, 24, &SeedSpec::new(1)).unwrap();
        let y = sample_tuple(EnsembleKind::Gue, 1, 24, &SeedSpec::new(2)).unwrap();
        let p: NcPoly = "T1 + T2".parse().unwrap();
        let rows = strong_discrepancy(TupleInput::Tensor { x: &x, y: &y }, &GeneratorSpec::semicircular(1), &[p], 12);
        let ex = crate::spectral::herm_eigenvalues(x.get(0)).unwrap();
        let ey = crate::spectral::herm_eigenvalues(y.get(0)).unwrap();
        let expect = (ex[23] + ey[23]).max(-(ex[0] + ey[0]));
        assert!((rows[0].finite_norm.unwrap() - expect).abs() < 1e-6);
        assert!(rows[0].norm_gap.unwrap().abs() < 0.5);
    }
}
