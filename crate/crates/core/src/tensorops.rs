//! Matrix-free operators on `M_k ⊗ M_k` acting on Hilbert–Schmidt matrices
//! through `(A ⊗ B) # C = A C Bᵗ`.
//!
//! Vectorization is column stacking (nalgebra's native layout), under which
//! `L ⊗ R` acts as the Kronecker matrix `R ⊗_kron L`. The matrix-unit tests
//! pin this correspondence.

use std::collections::BTreeMap;

use crate::ensembles::MatTuple;
use crate::linalg::{conj, identity, kron, polar_unitary, singular_values, unitary_deviation, CMat, C64, ONE, ZERO};
use crate::ncpoly::{Letter, Monomial, NcPoly};
use crate::seed::SeedSpec;
use crate::spectral::{lanczos_extremes, HermOpHandle};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TensorTerm {
    pub left: CMat,
    pub right: CMat,
    pub coeff: C64,
}

/// `Σ coeff·(left ⊗ right)`, stored as a list of elementary tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOp {
    k: usize,
    terms: Vec<TensorTerm>,
}

impl TensorOp {
    pub fn zero(k: usize) -> Self {
        Self { k, terms: Vec::new() }
    }

    pub fn identity(k: usize) -> Self {
        Self::elementary(identity(k), identity(k), ONE).expect("square identities")
    }

    pub fn elementary(left: CMat, right: CMat, coeff: C64) -> Result<Self> {
        let k = left.nrows();
        Self::from_terms(k, vec![TensorTerm { left, right, coeff }])
    }

    pub fn from_terms(k: usize, terms: Vec<TensorTerm>) -> Result<Self> {
        for t in &terms {
            if t.left.shape() != (k, k) || t.right.shape() != (k, k) {
                return Err(Error::Dimension(format!(
                    "tensor term of shape {:?}⊗{:?} in a k={k} operator",
                    t.left.shape(),
                    t.right.shape()
                )));
            }
        }
        Ok(Self { k, terms })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::Dimension(format!("k={} vs k={}", self.k, other.k)));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { k: self.k, terms })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            k: self.k,
            terms: self
                .terms
                .iter()
                .map(|t| TensorTerm { left: t.left.clone(), right: t.right.clone(), coeff: t.coeff * c })
                .collect(),
        }
    }

    /// `x*`, using `(L ⊗ R)* = L* ⊗ R*`.
    pub fn adjoint(&self) -> Self {
        Self {
            k: self.k,
            terms: self
                .terms
                .iter()
                .map(|t| TensorTerm { left: t.left.adjoint(), right: t.right.adjoint(), coeff: t.coeff.conj() })
                .collect(),
        }
    }

    /// Product `x·y` in `M_k ⊗ M_k`, so that `(xy)#C = x#(y#C)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::Dimension(format!("k={} vs k={}", self.k, other.k)));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(TensorTerm { left: &a.left * &b.left, right: &a.right * &b.right, coeff: a.coeff * b.coeff });
            }
        }
        Ok(Self { k: self.k, terms })
    }

    /// `x # C = Σ coeff·L·C·Rᵗ`.
    pub fn apply(&self, c: &CMat) -> Result<CMat> {
        if c.shape() != (self.k, self.k) {
            return Err(Error::Dimension(format!("{:?} matrix for a k={} operator", c.shape(), self.k)));
        }
        Ok(self.apply_unchecked(c))
    }

    fn apply_unchecked(&self, c: &CMat) -> CMat {
        let mut out = CMat::zeros(self.k, self.k);
        for t in &self.terms {
            let lc = &t.left * c;
            out += (lc * t.right.transpose()) * t.coeff;
        }
        out
    }

    fn apply_vec(&self, x: &[C64], y: &mut [C64]) {
        let c = CMat::from_column_slice(self.k, self.k, x);
        let r = self.apply_unchecked(&c);
        y.copy_from_slice(r.as_slice());
    }

    /// The explicit `k² × k²` matrix of the `#` action on column-stacked vectors.
    pub fn to_dense(&self) -> CMat {
        let n = self.k * self.k;
        let mut out = CMat::zeros(n, n);
        for t in &self.terms {
            out += kron(&t.right, &t.left) * t.coeff;
        }
        out
    }
}

/// `x # C`.
pub fn sharp_apply(x: &TensorOp, c: &CMat) -> Result<CMat> {
    x.apply(c)
}

fn word_product(word: &[Letter], mats: &[CMat], offset: usize, k: usize) -> Result<CMat> {
    let mut acc = identity(k);
    for l in word {
        let j = l.index - offset;
        let m = mats.get(j - 1).ok_or(Error::IndexOutOfRange { index: l.index, len: offset + mats.len() })?;
        acc = if l.starred { acc * m.adjoint() } else { acc * m };
    }
    Ok(acc)
}

/// `P(X ⊗ 1, 1 ⊗ Y)`: generators `1..=r` act as `X_i ⊗ 1`, `r+1..=2r` as
/// `1 ⊗ Y_i`, with `r = X.len()`.
///
/// Each monomial splits into its left subword in `X` and right subword in
/// `Y`; monomials with the same split are merged, so terms that differ only
/// by the interleaving of the two legs give the same operator.
pub fn eval_tensor_poly(p: &NcPoly, x: &MatTuple, y: &MatTuple) -> Result<TensorOp> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!("X has k={}, Y has k={}", x.dim(), y.dim())));
    }
    let r = x.len();
    let k = x.dim();
    let mut grouped: BTreeMap<(Monomial, Monomial), C64> = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &l in m.letters() {
            if l.index <= r {
                left.push(l);
            } else if l.index <= r + y.len() {
                right.push(l);
            } else {
                return Err(Error::IndexOutOfRange { index: l.index, len: r + y.len() });
            }
        }
        *grouped.entry((Monomial::from_letters(left), Monomial::from_letters(right))).or_insert(ZERO) += *c;
    }
    let mut terms = Vec::with_capacity(grouped.len());
    for ((lw, rw), coeff) in grouped {
        if coeff == ZERO {
            continue;
        }
        terms.push(TensorTerm {
            left: word_product(lw.letters(), x.matrices(), 0, k)?,
            right: word_product(rw.letters(), y.matrices(), r, k)?,
            coeff,
        });
    }
    TensorOp::from_terms(k, terms)
}

/// Outcome of a matrix-free norm or eigenvalue computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorNorm {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn lanczos_seed(k: usize, tag: u64) -> SeedSpec {
    SeedSpec::with_path(0x7e50_0000, &[k as u64, tag])
}

/// Default iteration cap for matrix-free solves on `k²`-dimensional spaces.
pub fn default_max_iter(k: usize) -> usize {
    (k * k).min(600)
}

/// `‖x‖_∞ = ‖x#‖` on `S²(k, tr)`, as `√λ_max(x*x)` by Lanczos.
pub fn tensor_norm(x: &TensorOp, tol: f64) -> Result<TensorNorm> {
    tensor_norm_with(x, tol, default_max_iter(x.k))
}

pub fn tensor_norm_with(x: &TensorOp, tol: f64, max_iter: usize) -> Result<TensorNorm> {
    if x.terms.is_empty() {
        return Ok(TensorNorm { value: 0.0, converged: true, iterations: 0 });
    }
    let xa = x.adjoint();
    let n = x.k * x.k;
    let handle = HermOpHandle::new(n, |v, out| {
        let mut tmp = vec![ZERO; n];
        x.apply_vec(v, &mut tmp);
        xa.apply_vec(&tmp, out);
    })?;
    let res = lanczos_extremes(&handle, tol, max_iter, &lanczos_seed(x.k, 1))?;
    Ok(TensorNorm { value: res.max.max(0.0).sqrt(), converged: res.converged, iterations: res.iterations })
}

fn check_unitary_tuple(t: &MatTuple) -> Result<()> {
    for u in t.matrices() {
        let dev = unitary_deviation(u) / (u.nrows() as f64).sqrt();
        if dev > 1e-8 {
            return Err(Error::NotUnitary(dev));
        }
    }
    Ok(())
}

/// `‖(1/r) Σ_j U_j ⊗ conj(V_j)‖`, with `conj(V) = (V*)ᵗ`.
///
/// On `S²` this is the operator `C ↦ (1/r) Σ_j U_j C V_j*`.
pub fn haagerup_witness(u: &MatTuple, v: &MatTuple) -> Result<TensorNorm> {
    if u.len() != v.len() || u.dim() != v.dim() {
        return Err(Error::Dimension(format!("U is {}×k={}, V is {}×k={}", u.len(), u.dim(), v.len(), v.dim())));
    }
    check_unitary_tuple(u)?;
    check_unitary_tuple(v)?;
    let w = C64::new(1.0 / u.len() as f64, 0.0);
    let terms = u
        .matrices()
        .iter()
        .zip(v.matrices())
        .map(|(a, b)| TensorTerm { left: a.clone(), right: conj(b), coeff: w })
        .collect();
    let x = TensorOp::from_terms(u.dim(), terms)?;
    tensor_norm(&x, 1e-12)
}

/// Probability vector over tuple coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be nonnegative and nonempty".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(r: usize) -> Self {
        Self(vec![1.0 / r as f64; r])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// Spectral data of the tensor Laplacian `Σ μ_j |X_j ⊗ 1 − 1 ⊗ X_jᵗ|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianGap {
    /// Smallest eigenvalue (0 up to solver accuracy: the identity is in the kernel).
    pub lambda_min: f64,
    /// Smallest eigenvalue on the orthogonal complement of the kernel.
    pub lambda_gap: f64,
    /// Dimension of the numerical kernel found (≥ 1).
    pub kernel_dim: usize,
    pub converged: bool,
}

/// The operator `Σ_j μ_j D_j* D_j` with `D_j = X_j ⊗ 1 − 1 ⊗ X_jᵗ`.
///
/// On `S²` it acts as `C ↦ Σ_j μ_j [X_j*, [X_j, C]]` for Hermitian `X_j`.
pub fn laplacian_op(x: &MatTuple, mu: &WeightVector) -> Result<TensorOp> {
    if mu.weights().len() != x.len() {
        return Err(Error::Dimension(format!("{} weights for {} coordinates", mu.weights().len(), x.len())));
    }
    let k = x.dim();
    let mut acc = TensorOp::zero(k);
    for (xj, &w) in x.matrices().iter().zip(mu.weights()) {
        if w == 0.0 {
            continue;
        }
        let d = TensorOp::from_terms(
            k,
            vec![
                TensorTerm { left: xj.clone(), right: identity(k), coeff: ONE },
                TensorTerm { left: identity(k), right: xj.transpose(), coeff: -ONE },
            ],
        )?;
        let dd = d.adjoint().compose(&d)?.scale(C64::new(w, 0.0));
        acc = acc.add(&dd)?;
    }
    Ok(acc)
}

/// `λ_min` and the spectral gap above the kernel of the tensor Laplacian.
///
/// The normalized identity is deflated first; any further numerical kernel
/// vectors found by Lanczos (eigenvalue ≤ `1e-8·(1 + λ_max)`) are deflated in
/// turn before the gap is read off.
pub fn nonamen_laplacian(x: &MatTuple, mu: &WeightVector) -> Result<LaplacianGap> {
    let l = laplacian_op(x, mu)?;
    let k = x.dim();
    let n = k * k;
    let max_iter = default_max_iter(k);
    let tol = 1e-9;
    let make = || HermOpHandle::new(n, |v, out| l.apply_vec(v, out));

    let full = lanczos_extremes(&make()?, tol, max_iter, &lanczos_seed(k, 2))?;
    let zero_tol = 1e-8 * (1.0 + full.max.abs());
    let mut converged = full.converged;

    let id = identity(k);
    let id_vec: Vec<C64> = id.as_slice().iter().map(|z| z / (k as f64).sqrt()).collect();
    let mut deflation = vec![id_vec];
    let mut gap = 0.0;
    for round in 0..n {
        if deflation.len() >= n {
            gap = f64::NAN;
            break;
        }
        let handle = make()?.with_deflation(deflation.clone())?;
        let res = lanczos_extremes(&handle, tol, max_iter, &lanczos_seed(k, 3 + round as u64))?;
        converged &= res.converged;
        gap = res.min;
        if res.min > zero_tol {
            break;
        }
        deflation.push(res.min_vector);
    }
    Ok(LaplacianGap { lambda_min: full.min, lambda_gap: gap, kernel_dim: deflation.len(), converged })
}

/// Normalized Schatten norm `‖A‖_p = tr(|A|^p)^{1/p}`; `p = ∞` gives the operator norm.
pub fn schatten_norm(a: &CMat, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Schatten exponent must be ≥ 1, got {p}")));
    }
    let s = singular_values(a);
    if p.is_infinite() {
        return Ok(s.iter().copied().fold(0.0, f64::max));
    }
    let k = a.nrows() as f64;
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    // Scale by the largest singular value to keep large p finite.
    let sum: f64 = s.iter().map(|x| (x / top).powf(p)).sum::<f64>() / k;
    Ok(top * sum.powf(1.0 / p))
}

/// Heuristic lower bound on `‖x#‖_{∞→1}`.
#[derive(Clone, Debug)]
pub struct InfOneLowerBound {
    /// Always a lower bound; never a certified value.
    pub value: f64,
    pub witness: CMat,
}

fn trace_norm(a: &CMat) -> f64 {
    singular_values(a).iter().sum::<f64>() / a.nrows() as f64
}

/// Lower bound on `sup{‖x#C‖₁ : ‖C‖_∞ ≤ 1}` from the identity, random
/// unitaries and random signed projections, each refined by alternating
/// polar ascent `W = polar(x#C)`, `C ← polar(x*#W)`.
pub fn norm_inf_one_lower(x: &TensorOp, trials: usize, seed: &SeedSpec) -> Result<InfOneLowerBound> {
    use crate::ensembles::sample_haar_unitary;
    let k = x.k;
    let xa = x.adjoint();
    let ascend = |start: CMat| -> (f64, CMat) {
        let mut c = start;
        let mut value = trace_norm(&x.apply_unchecked(&c));
        for _ in 0..100 {
            let w = polar_unitary(&x.apply_unchecked(&c));
            let next = polar_unitary(&xa.apply_unchecked(&w));
            let v = trace_norm(&x.apply_unchecked(&next));
            if v <= value + 1e-13 * (1.0 + value) {
                if v > value {
                    value = v;
                    c = next;
                }
                break;
            }
            value = v;
            c = next;
        }
        (value, c)
    };
    let mut starts = vec![identity(k)];
    for t in 0..trials {
        let u = sample_haar_unitary(k, &seed.child(2 * t as u64))?;
        starts.push(u.clone());
        let mut g = seed.child(2 * t as u64 + 1).stream();
        let v = sample_haar_unitary(k, &seed.child(2 * t as u64 + 1).child(0))?;
        let signs: Vec<f64> = (0..k).map(|_| if g.uniform() < 0.5 { -1.0 } else { 1.0 }).collect();
        starts.push(&v * crate::linalg::from_real_diag(&signs) * v.adjoint());
    }
    let mut best = InfOneLowerBound { value: f64::NEG_INFINITY, witness: identity(k) };
    for s in starts {
        let (v, c) = ascend(s);
        if v > best.value {
            best = InfOneLowerBound { value: v, witness: c };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_gue, sample_haar_unitary, sample_tuple, EnsembleKind};
    use crate::linalg::{frobenius, from_real_diag};
    use crate::spectral::op_norm;

    fn rand_mat(k: usize, seed: u64) -> CMat {
        let mut g = SeedSpec::new(seed).stream();
        CMat::from_fn(k, k, |_, _| C64::new(g.gaussian(), g.gaussian()))
    }

    #[test]
    fn sharp_examples() {
        let a = rand_mat(3, 1);
        let b = rand_mat(3, 2);
        let c = rand_mat(3, 3);
        let x = TensorOp::elementary(a.clone(), identity(3), ONE).unwrap();
        assert!(frobenius(&(sharp_apply(&x, &identity(3)).unwrap() - &a)) < 1e-13);
        let y = TensorOp::elementary(identity(3), b.clone(), ONE).unwrap();
        assert!(frobenius(&(sharp_apply(&y, &c).unwrap() - &c * b.transpose())) < 1e-13);
        assert!(sharp_apply(&y, &identity(2)).is_err());
    }

    #[test]
    fn matrix_units_reproduce_kronecker() {
        let k = 3;
        let x = TensorOp::from_terms(
            k,
            vec![
                TensorTerm { left: rand_mat(k, 4), right: rand_mat(k, 5), coeff: C64::new(0.5, -1.0) },
                TensorTerm { left: rand_mat(k, 6), right: rand_mat(k, 7), coeff: ONE },
            ],
        )
        .unwrap();
        let dense = x.to_dense();
        for j in 0..k {
            for i in 0..k {
                let mut e = CMat::zeros(k, k);
                e[(i, j)] = ONE;
                let col = i + k * j;
                let image = x.apply(&e).unwrap();
                for (r, z) in image.as_slice().iter().enumerate() {
                    assert!((dense[(r, col)] - z).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_norm_is_one() {
        let n = tensor_norm(&TensorOp::identity(6), 1e-12).unwrap();
        assert!(n.converged);
        assert!((n.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cross_norm_property() {
        for k in [2, 3, 5, 8] {
            let a = rand_mat(k, 10 + k as u64);
            let b = rand_mat(k, 20 + k as u64);
            let x = TensorOp::elementary(a.clone(), b.clone(), ONE).unwrap();
            let n = tensor_norm(&x, 1e-12).unwrap();
            assert!((n.value - op_norm(&a) * op_norm(&b)).abs() < 1e-8 * (1.0 + n.value), "k={k}");
        }
    }

    #[test]
    fn tensor_poly_examples() {
        let x = sample_tuple(EnsembleKind::Gue, 1, 2, &SeedSpec::new(1)).unwrap();
        let y = sample_tuple(EnsembleKind::Gue, 1, 2, &SeedSpec::new(2)).unwrap();
        let t1 = eval_tensor_poly(&NcPoly::generator(1), &x, &y).unwrap();
        assert_eq!(t1.terms().len(), 1);
        assert_eq!(t1.terms()[0].left, *x.get(0));
        assert_eq!(t1.terms()[0].right, identity(2));

        let p12 = eval_tensor_poly(&"T1 T2".parse().unwrap(), &x, &y).unwrap();
        let p21 = eval_tensor_poly(&"T2 T1".parse().unwrap(), &x, &y).unwrap();
        assert_eq!(p12, p21);
        let c = rand_mat(2, 9);
        let expect = x.get(0) * &c * y.get(0).transpose();
        assert!(frobenius(&(p12.apply(&c).unwrap() - expect)) < 1e-13);
        let dense = kron(y.get(0), x.get(0));
        assert!(frobenius(&(p12.to_dense() - dense)) < 1e-14);
        assert!(eval_tensor_poly(&NcPoly::generator(3), &x, &y).is_err());
    }

    #[test]
    fn compose_is_sequential_application() {
        let k = 4;
        let x = TensorOp::from_terms(
            k,
            vec![
                TensorTerm { left: rand_mat(k, 1), right: rand_mat(k, 2), coeff: ONE },
                TensorTerm { left: rand_mat(k, 3), right: identity(k), coeff: C64::new(0.0, 2.0) },
            ],
        )
        .unwrap();
        let y = TensorOp::elementary(rand_mat(k, 4), rand_mat(k, 5), C64::new(-1.0, 0.5)).unwrap();
        let c = rand_mat(k, 6);
        let lhs = x.compose(&y).unwrap().apply(&c).unwrap();
        let rhs = x.apply(&y.apply(&c).unwrap()).unwrap();
        assert!(frobenius(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn witness_fixed_point() {
        let id = MatTuple::new(vec![identity(3)]).unwrap();
        assert!((haagerup_witness(&id, &id).unwrap().value - 1.0).abs() < 1e-8);
        let u = sample_tuple(EnsembleKind::Haar, 2, 6, &SeedSpec::new(4)).unwrap();
        assert!((haagerup_witness(&u, &u).unwrap().value - 1.0).abs() < 1e-8);
        let g = sample_tuple(EnsembleKind::Gue, 1, 3, &SeedSpec::new(4)).unwrap();
        assert!(matches!(haagerup_witness(&g, &g), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn laplacian_diag_instance() {
        let x = MatTuple::new(vec![from_real_diag(&[0.0, 1.0])]).unwrap();
        let mu = WeightVector::new(vec![1.0]).unwrap();
        let l = laplacian_op(&x, &mu).unwrap();
        let mut e12 = CMat::zeros(2, 2);
        e12[(0, 1)] = ONE;
        assert!(frobenius(&(l.apply(&e12).unwrap() - &e12)) < 1e-14);
        let mut e11 = CMat::zeros(2, 2);
        e11[(0, 0)] = ONE;
        assert!(frobenius(&l.apply(&e11).unwrap()) < 1e-14);
        let gap = nonamen_laplacian(&x, &mu).unwrap();
        assert!(gap.lambda_min.abs() <= 1e-10);
        assert!((gap.lambda_gap - 1.0).abs() <= 1e-9);
        assert_eq!(gap.kernel_dim, 2);
    }

    #[test]
    fn laplacian_kills_identity() {
        let x = sample_tuple(EnsembleKind::Gue, 2, 8, &SeedSpec::new(8)).unwrap();
        let l = laplacian_op(&x, &WeightVector::uniform(2)).unwrap();
        assert!(frobenius(&l.apply(&identity(8)).unwrap()) < 1e-12);
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn schatten_examples() {
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((schatten_norm(&identity(4), p).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((schatten_norm(&from_real_diag(&[1.0, 0.0]), 1.0).unwrap() - 0.5).abs() < 1e-14);
        let a = rand_mat(5, 3);
        assert!((schatten_norm(&a, 2.0).unwrap() - crate::linalg::hs_norm(&a)).abs() < 1e-12);
        assert!(schatten_norm(&a, 0.5).is_err());
        let mut prev = 0.0;
        for p in [1.0, 1.5, 2.0, 4.0, 10.0, f64::INFINITY] {
            let v = schatten_norm(&a, p).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn inf_one_examples() {
        let id = TensorOp::identity(3);
        let b = norm_inf_one_lower(&id, 2, &SeedSpec::new(1)).unwrap();
        assert!((b.value - 1.0).abs() < 1e-12);

        let a = sample_gue(4, &SeedSpec::new(2)).unwrap();
        let x = TensorOp::elementary(a.clone(), identity(4), ONE).unwrap();
        let b = norm_inf_one_lower(&x, 3, &SeedSpec::new(3)).unwrap();
        assert!(b.value >= schatten_norm(&a, 1.0).unwrap() - 1e-12);

        let u = sample_haar_unitary(4, &SeedSpec::new(5)).unwrap();
        let y = x.add(&TensorOp::elementary(u, rand_mat(4, 6), C64::new(0.3, 0.0)).unwrap()).unwrap();
        let lb = norm_inf_one_lower(&y, 4, &SeedSpec::new(7)).unwrap();
        assert!(lb.value <= op_norm(&y.to_dense()) + 1e-8);
    }
}
