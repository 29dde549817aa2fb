//! The structured constant matrices and the membership predicates built on
//! them.
//!
//! All matrices are dense `DMatrix<Complex64>`; quaternions are always
//! stored as 2×2 complex blocks so that a single matrix kernel serves all
//! three classes.

use nalgebra::DMatrix;

use crate::class::SymmetryClass;
use crate::error::{Result, RppError};
use crate::linalg::{max_abs, max_abs_diff, C64, I_UNIT, ONE, ZERO};

pub type ComplexMatrix = DMatrix<C64>;

/// Symplectic form `J = [[0, -1], [1, 0]]` of size `2n`.
pub fn j_form(n: usize) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = -ONE;
        j[(n + k, k)] = ONE;
    }
    j
}

/// Lorentz form `G = diag(1, -1)` of size `2n`.
pub fn g_form(n: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        g[(k, k)] = ONE;
        g[(n + k, n + k)] = -ONE;
    }
    g
}

/// Cayley transform `C = 2^{-1/2} [[1, -i], [1, i]]` of size `2n`.
pub fn cayley(n: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut c = ComplexMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        c[(k, k)] = C64::new(s, 0.0);
        c[(k, n + k)] = C64::new(0.0, -s);
        c[(n + k, k)] = C64::new(s, 0.0);
        c[(n + k, n + k)] = C64::new(0.0, s);
    }
    c
}

/// Quaternion structure: block diagonal of `[[0, -1], [1, 0]]`, size `m` (even).
pub fn i_form(m: usize) -> Result<ComplexMatrix> {
    if m % 2 != 0 {
        return Err(RppError::dims("quaternion structure", "even size", m));
    }
    let mut i = ComplexMatrix::zeros(m, m);
    for b in 0..m / 2 {
        i[(2 * b, 2 * b + 1)] = -ONE;
        i[(2 * b + 1, 2 * b)] = ONE;
    }
    Ok(i)
}

/// Quaternion units q0..q3 as 2×2 complex matrices.
pub fn quaternion_units() -> [ComplexMatrix; 4] {
    let q0 = ComplexMatrix::identity(2, 2);
    let q1 = ComplexMatrix::from_row_slice(2, 2, &[I_UNIT, ZERO, ZERO, -I_UNIT]);
    let q2 = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
    let q3 = ComplexMatrix::from_row_slice(2, 2, &[ZERO, I_UNIT, I_UNIT, ZERO]);
    [q0, q1, q2, q3]
}

/// The constant matrices for `l` complex channels, checked on construction.
#[derive(Debug, Clone)]
pub struct StructuredConstants {
    pub l: usize,
    pub j: ComplexMatrix,
    pub g: ComplexMatrix,
    pub c: ComplexMatrix,
    pub i: ComplexMatrix,
    pub q: [ComplexMatrix; 4],
}

impl StructuredConstants {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(RppError::InvalidArgument("channel count must be positive".into()));
        }
        let consts = StructuredConstants {
            l,
            j: j_form(l),
            g: g_form(l),
            c: cayley(l),
            i: i_form(2 * l)?,
            q: quaternion_units(),
        };
        let worst = consts.identity_residual();
        if worst > 1e-14 {
            return Err(RppError::InvariantViolation(format!(
                "structured constant identities fail by {worst:.3e}"
            )));
        }
        Ok(consts)
    }

    /// Largest violation among the defining identities.
    pub fn identity_residual(&self) -> f64 {
        let n = 2 * self.l;
        let id = ComplexMatrix::identity(n, n);
        let minus_i = C64::new(0.0, -1.0);
        let cs = self.c.adjoint();
        let mut worst: f64 = 0.0;
        let mut upd = |x: f64| worst = worst.max(x);
        upd(max_abs_diff(&(&self.c * &self.j * &cs), &(&self.g * minus_i)));
        upd(max_abs_diff(&(self.c.conjugate() * &self.j * &cs), &(&self.j * minus_i)));
        upd(max_abs_diff(&(&self.j * &self.j), &(-&id)));
        upd(max_abs_diff(&(&self.g * &self.g), &id));
        upd(max_abs_diff(&(&self.c * &cs), &id));
        upd(max_abs_diff(&(&self.i * &self.i), &(-&id)));
        let [q0, q1, q2, q3] = &self.q;
        let mq0 = -q0;
        upd(max_abs_diff(&(q1 * q1), &mq0));
        upd(max_abs_diff(&(q2 * q2), &mq0));
        upd(max_abs_diff(&(q3 * q3), &mq0));
        upd(max_abs_diff(&(q1 * q2 * q3), &mq0));
        worst
    }
}

fn check_square_even(t: &ComplexMatrix, what: &'static str) -> Result<usize> {
    if t.nrows() != t.ncols() || t.nrows() % 2 != 0 || t.nrows() == 0 {
        return Err(RppError::dims(
            what,
            "square matrix of even size",
            format!("{}x{}", t.nrows(), t.ncols()),
        ));
    }
    Ok(t.nrows())
}

/// `‖T*JT − J‖_max` against an explicitly supplied form.
pub fn form_residual(t: &ComplexMatrix, j: &ComplexMatrix) -> Result<f64> {
    if t.nrows() != j.nrows() || t.ncols() != j.ncols() {
        return Err(RppError::dims(
            "symplectic form",
            format!("{}x{}", j.nrows(), j.ncols()),
            format!("{}x{}", t.nrows(), t.ncols()),
        ));
    }
    Ok(max_abs_diff(&(t.adjoint() * j * t), j))
}

/// `‖I*ĀI − A‖_max`.
pub fn quaternion_residual(a: &ComplexMatrix) -> Result<f64> {
    let n = check_square_even(a, "quaternion matrix")?;
    let i = i_form(n)?;
    Ok(max_abs_diff(&(i.adjoint() * a.conjugate() * &i), a))
}

/// `‖Ā − A‖_max`.
pub fn reality_residual(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.im.abs()).fold(0.0, f64::max) * 2.0
}

/// Residual of the class conjugation symmetry (0 for the complex class).
pub fn class_residual(a: &ComplexMatrix, class: SymmetryClass) -> Result<f64> {
    match class {
        SymmetryClass::Complex => Ok(0.0),
        SymmetryClass::Real => Ok(reality_residual(a)),
        SymmetryClass::Quaternion => quaternion_residual(a),
    }
}

/// Membership of `T` in HS(2L, K), with `J` supplied by the caller.
pub fn is_hermitian_symplectic_with(
    t: &ComplexMatrix,
    j: &ComplexMatrix,
    class: SymmetryClass,
    tol: f64,
) -> Result<bool> {
    let n = check_square_even(t, "transfer operator")?;
    if class == SymmetryClass::Quaternion && n % 4 != 0 {
        return Err(RppError::dims("quaternion transfer operator", "size divisible by 4", n));
    }
    Ok(form_residual(t, j)? <= tol && class_residual(t, class)? <= tol)
}

/// Membership of `T` in HS(2L, K).
pub fn is_hermitian_symplectic(t: &ComplexMatrix, class: SymmetryClass, tol: f64) -> Result<bool> {
    let n = check_square_even(t, "transfer operator")?;
    is_hermitian_symplectic_with(t, &j_form(n / 2), class, tol)
}

pub fn is_quaternion_matrix(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(quaternion_residual(a)? <= tol)
}

/// `T*GT = G` test for the Lorentz picture.
pub fn is_lorentz(t: &ComplexMatrix, tol: f64) -> Result<bool> {
    let n = check_square_even(t, "Lorentz operator")?;
    Ok(max_abs_diff(&(t.adjoint() * g_form(n / 2) * t), &g_form(n / 2)) <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CayleyDirection {
    ToLorentz,
    ToSymplectic,
}

/// `C T C*` (to the Lorentz picture) or `C* T C` (back).
pub fn cayley_conjugate(t: &ComplexMatrix, direction: CayleyDirection) -> Result<ComplexMatrix> {
    let n = check_square_even(t, "Cayley conjugation")?;
    let c = cayley(n / 2);
    Ok(match direction {
        CayleyDirection::ToLorentz => &c * t * c.adjoint(),
        CayleyDirection::ToSymplectic => c.adjoint() * t * &c,
    })
}

/// Projection `A ↦ ½(A + I*ĀI)` onto quaternion matrices.
pub fn quaternion_project(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = check_square_even(a, "quaternion projection")?;
    let i = i_form(n)?;
    Ok((a + i.adjoint() * a.conjugate() * &i) * C64::new(0.5, 0.0))
}

/// Block-diagonal embedding of a `2×2` quaternion into `n/2` copies.
pub fn kron_identity(a: &ComplexMatrix, copies: usize) -> ComplexMatrix {
    let (r, c) = a.shape();
    let mut out = ComplexMatrix::zeros(r * copies, c * copies);
    for k in 0..copies {
        out.view_mut((k * r, k * c), (r, c)).copy_from(a);
    }
    out
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// True if every entry is finite.
pub fn all_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Convenience: maximal entry modulus.
pub fn norm_max(a: &ComplexMatrix) -> f64 {
    max_abs(a)
}
