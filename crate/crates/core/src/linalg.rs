//! Small dense helpers shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`, stored column-major. Traces
//! written `tr` are normalized (`tr(I) = 1`); `Tr` is the unnormalized trace.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn identity(k: usize) -> CMat {
    CMat::identity(k, k)
}

pub fn from_real_diag(d: &[f64]) -> CMat {
    let k = d.len();
    let mut m = CMat::zeros(k, k);
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = C64::new(x, 0.0);
    }
    m
}

/// Entrywise complex conjugate, `conj(A) = (A*)ᵗ`.
pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

/// Frobenius norm `√Tr(A*A)`.
pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized Hilbert–Schmidt norm `‖A‖₂ = √tr(A*A) = √((1/k) Tr(A*A))`.
pub fn hs_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    frobenius(a) / (a.nrows() as f64).sqrt()
}

/// Normalized trace.
pub fn ntrace(a: &CMat) -> C64 {
    a.trace() / a.nrows() as f64
}

/// `tr(A·B)` in O(k²) without forming the product.
pub fn ntrace_of_product(a: &CMat, b: &CMat) -> C64 {
    let k = a.nrows();
    let mut acc = ZERO;
    // Tr(AB) = Σ_{i,j} A_ij B_ji; iterate B column-major.
    for j in 0..k {
        for i in 0..k {
            acc += a[(j, i)] * b[(i, j)];
        }
    }
    acc / k as f64
}

/// Relative deviation from hermiticity, `‖A − A*‖_F / (1 + ‖A‖_F)`.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    let k = a.nrows();
    let mut dev = 0.0;
    for j in 0..k {
        for i in 0..k {
            dev += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    dev.sqrt() / (1.0 + frobenius(a))
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && hermitian_deviation(a) <= tol
}

/// `‖U*U − I‖_F`.
pub fn unitary_deviation(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    frobenius(&(g - identity(u.nrows())))
}

/// Hermitian part `(A + A*)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Imaginary part `(A − A*)/(2i)`, Hermitian.
pub fn imaginary_part(a: &CMat) -> CMat {
    (a - a.adjoint()) * C64::new(0.0, -0.5)
}

/// Symmetrize a numerically Hermitian matrix in place.
pub fn symmetrize(a: &mut CMat) {
    let k = a.nrows();
    for j in 0..k {
        a[(j, j)] = C64::new(a[(j, j)].re, 0.0);
        for i in 0..j {
            let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
}

/// Kronecker product `A ⊗ B` with `(A ⊗ B)[(i·p + k, j·q + l)] = A_ij B_kl`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (m, n) = a.shape();
    let (p, q) = b.shape();
    CMat::from_fn(m * p, n * q, |r, c| a[(r / p, c / q)] * b[(r % p, c % q)])
}

/// Unitary polar factor `W` of `A = W|A|`, from the SVD `A = XΣY*` as `W = XY*`.
pub fn polar_unitary(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    u * v_t
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    a.clone().singular_values().iter().copied().collect()
}
