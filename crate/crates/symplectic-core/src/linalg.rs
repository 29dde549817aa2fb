//! Small dense linear-algebra helpers shared by the workspace.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::error::{Result, RppError};
use crate::forms::ComplexMatrix;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I_UNIT: C64 = C64::new(0.0, 1.0);

/// Field of matrix entries used by the hot loops: `f64` for the real class,
/// `Complex64` otherwise.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    fn from_c64(z: C64) -> Self;
    fn to_c64(self) -> C64;
    fn conj_s(self) -> Self;
    fn abs2(self) -> f64;
    fn scale_re(self, s: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn from_c64(z: C64) -> Self {
        z.re
    }
    #[inline]
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    #[inline]
    fn conj_s(self) -> Self {
        self
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale_re(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for C64 {
    #[inline]
    fn from_c64(z: C64) -> Self {
        z
    }
    #[inline]
    fn to_c64(self) -> C64 {
        self
    }
    #[inline]
    fn conj_s(self) -> Self {
        self.conj()
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale_re(self, s: f64) -> Self {
        self * s
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_complex<T: Scalar>(a: &DMatrix<T>) -> ComplexMatrix {
    a.map(|x| x.to_c64())
}

pub fn from_complex<T: Scalar>(a: &ComplexMatrix) -> DMatrix<T> {
    a.map(T::from_c64)
}

/// `‖A*A − 1‖_max`.
pub fn unitarity_residual(a: &ComplexMatrix) -> f64 {
    let n = a.ncols();
    max_abs_diff(&(a.adjoint() * a), &ComplexMatrix::identity(n, n))
}

/// Unitary polar factor `W V*` from the SVD `A = W Σ V*`.
pub fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.nrows() != a.ncols() {
        return Err(RppError::dims("polar factor", "square matrix", format!("{:?}", a.shape())));
    }
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    let svd = a.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(RppError::InvariantViolation("SVD did not converge".into())),
    }
}

/// Hermitian square root of a small positive definite matrix via its
/// eigen-decomposition.
pub fn hermitian_sqrt(a: &ComplexMatrix) -> ComplexMatrix {
    let h = (a + a.adjoint()) * cr(0.5);
    let eig = h.symmetric_eigen();
    let d = eig.eigenvalues.map(|x| cr(x.max(0.0).sqrt()));
    &eig.eigenvectors * ComplexMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor
/// polynomial (accurate to ~1e-15 relative after scaling to norm ≤ 1/2).
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>().max(0.0);
    let mut s = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        s += 1;
    }
    let x = a * cr(0.5f64.powi(s as i32));
    let id = ComplexMatrix::identity(n, n);
    let mut result = id.clone();
    let mut term = id;
    for k in 1..=18 {
        term = &term * &x * cr(1.0 / k as f64);
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Which evaluation `exp_lie` used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpPath {
    /// `P² = 0`: exactly `1 + λP`.
    Linear,
    /// `P³ = 0`: exactly `1 + λP + λ²P²/2`.
    Quadratic,
    ScalingSquaring,
}

/// `e^{λP}`, exact for nilpotent `P` (detected via `‖P³‖ < 1e-14‖P‖³`).
pub fn exp_lie(p: &ComplexMatrix, lambda: f64) -> (ComplexMatrix, ExpPath) {
    let n = p.nrows();
    let id = ComplexMatrix::identity(n, n);
    let np = frobenius(p);
    if np == 0.0 {
        return (id, ExpPath::Linear);
    }
    let p2 = p * p;
    if frobenius(&p2) < 1e-14 * np * np {
        return (id + p * cr(lambda), ExpPath::Linear);
    }
    let p3 = &p2 * p;
    if frobenius(&p3) < 1e-14 * np * np * np {
        return (
            id + p * cr(lambda) + p2 * cr(0.5 * lambda * lambda),
            ExpPath::Quadratic,
        );
    }
    (expm(&(p * cr(lambda))), ExpPath::ScalingSquaring)
}

/// Block-diagonal matrix with the given square blocks.
pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(*b);
        off += k;
    }
    out
}

/// `[[a, b], [c, d]]` from four equal square blocks.
pub fn block2(a: &ComplexMatrix, b: &ComplexMatrix, c_: &ComplexMatrix, d: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c_);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Inverse of a hermitian-symplectic matrix: `T⁻¹ = J* T* J`.
pub fn hs_inverse(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.nrows() / 2;
    let j = crate::forms::j_form(n);
    j.adjoint() * t.adjoint() * j
}
