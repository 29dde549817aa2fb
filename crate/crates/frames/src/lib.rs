//! Maximal isotropic frames and the Gram-Schmidt action of the hermitian
//! symplectic group on them.
//!
//! A frame for `L` channels of class `K` is a `2n×n` complex matrix with
//! `n = K.ambient_size(L)`. Acting with `T` multiplies and then
//! re-orthonormalizes; the triangular factor `S(T, Φ)` is a multiplicative
//! cocycle and `g_p = τ log S_pp` its additive companion.

mod gs;

use nalgebra::DMatrix;
use rand::Rng;
use symplectic_core::linalg::{max_abs_diff, unitarity_residual};
use symplectic_core::{
    form_residual, i_form, j_form, max_abs, quaternion_residual, reality_residual,
    sample_haar_unitary, ComplexMatrix, Result, RppError, Scalar, SymmetryClass, C64, I_UNIT, MEMBERSHIP_TOL,
};

pub use gs::orthonormalize;

/// Tolerance of the frame invariants.
pub const FRAME_TOL: f64 = 1e-10;

/// Deviations of a frame from its defining identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameResidual {
    /// `‖Φ*Φ − 1‖_max`
    pub orthonormality: f64,
    /// `‖Φ*JΦ‖_max`
    pub isotropy: f64,
    /// Class conjugation symmetry.
    pub symmetry: f64,
}

impl FrameResidual {
    pub fn max(&self) -> f64 {
        self.orthonormality.max(self.isotropy).max(self.symmetry)
    }
}

/// A maximal isotropic frame with its symmetry class.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicFrame {
    phi: ComplexMatrix,
    class: SymmetryClass,
}

fn frame_shape(phi: &ComplexMatrix, class: SymmetryClass) -> Result<usize> {
    let (r, n) = phi.shape();
    if n == 0 || r != 2 * n || n % class.block() != 0 {
        return Err(RppError::dims(
            "isotropic frame",
            format!("2n×n with n a multiple of {}", class.block()),
            format!("{r}x{n}"),
        ));
    }
    Ok(n)
}

/// `J Φ` for a `2n×k` matrix without forming `J`.
pub fn apply_j<T: Scalar>(phi: &DMatrix<T>) -> DMatrix<T> {
    let n = phi.nrows() / 2;
    let mut out = DMatrix::zeros(phi.nrows(), phi.ncols());
    for c in 0..phi.ncols() {
        for r in 0..n {
            out[(r, c)] = -phi[(n + r, c)];
            out[(n + r, c)] = phi[(r, c)];
        }
    }
    out
}

/// Class symmetry residual of a frame: `‖Φ̄ − Φ‖` (R) or
/// `‖I_{2n}* Φ̄ I_n − Φ‖` (H).
pub fn frame_symmetry_residual(phi: &ComplexMatrix, class: SymmetryClass) -> Result<f64> {
    match class {
        SymmetryClass::Complex => Ok(0.0),
        SymmetryClass::Real => Ok(reality_residual(phi)),
        SymmetryClass::Quaternion => {
            let (r, n) = phi.shape();
            let il = i_form(r)?;
            let ir = i_form(n)?;
            Ok(max_abs_diff(&(il.adjoint() * phi.conjugate() * ir), phi))
        }
    }
}

/// `½(Φ + I* Φ̄ I)`, the nearest frame-shaped matrix with quaternion columns.
pub fn quaternion_symmetrize(phi: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (r, n) = phi.shape();
    let il = i_form(r)?;
    let ir = i_form(n)?;
    Ok((phi + il.adjoint() * phi.conjugate() * ir) * C64::new(0.5, 0.0))
}

impl IsotropicFrame {
    /// Validates the invariants to [`FRAME_TOL`].
    pub fn new(phi: ComplexMatrix, class: SymmetryClass) -> Result<Self> {
        let f = Self::new_unchecked(phi, class)?;
        let res = f.residual()?;
        if res.max() > FRAME_TOL {
            return Err(RppError::InvariantViolation(format!(
                "not an isotropic frame: orthonormality {:.2e}, isotropy {:.2e}, symmetry {:.2e}",
                res.orthonormality, res.isotropy, res.symmetry
            )));
        }
        Ok(f)
    }

    /// Checks only the shape.
    pub fn new_unchecked(phi: ComplexMatrix, class: SymmetryClass) -> Result<Self> {
        frame_shape(&phi, class)?;
        Ok(IsotropicFrame { phi, class })
    }

    /// The axis frame `(1; 0)` for `l` channels.
    pub fn axis(class: SymmetryClass, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(RppError::InvalidArgument("frame needs at least one channel".into()));
        }
        let n = class.ambient_size(l);
        let mut phi = ComplexMatrix::zeros(2 * n, n);
        for k in 0..n {
            phi[(k, k)] = C64::new(1.0, 0.0);
        }
        Ok(IsotropicFrame { phi, class })
    }

    pub fn phi(&self) -> &ComplexMatrix {
        &self.phi
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.phi
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    /// Complex column count `n`.
    pub fn ambient(&self) -> usize {
        self.phi.ncols()
    }

    /// Channel count `L`.
    pub fn channels(&self) -> usize {
        self.phi.ncols() / self.class.block()
    }

    pub fn residual(&self) -> Result<FrameResidual> {
        let n = self.ambient();
        let gram = self.phi.adjoint() * &self.phi;
        let iso = self.phi.adjoint() * apply_j(&self.phi);
        Ok(FrameResidual {
            orthonormality: max_abs_diff(&gram, &ComplexMatrix::identity(n, n)),
            isotropy: max_abs(&iso),
            symmetry: frame_symmetry_residual(&self.phi, self.class)?,
        })
    }

    /// Pulls the frame back onto the isotropic manifold: restores the class
    /// symmetry, applies `Φ ← Φ + ½JΦ(Φ*JΦ)` and re-orthonormalizes.
    /// Returns the residual before the correction.
    pub fn reproject(&mut self) -> Result<FrameResidual> {
        let before = self.residual()?;
        match self.class {
            SymmetryClass::Real => self.phi.iter_mut().for_each(|z| z.im = 0.0),
            SymmetryClass::Quaternion => self.phi = quaternion_symmetrize(&self.phi)?,
            SymmetryClass::Complex => {}
        }
        reproject_raw(&mut self.phi, self.class.block())?;
        Ok(before)
    }
}

/// Isotropy correction plus Gram-Schmidt on a raw frame matrix.
pub fn reproject_raw<T: Scalar>(phi: &mut DMatrix<T>, block: usize) -> Result<()> {
    let jphi = apply_j(phi);
    let e = phi.adjoint() * &jphi;
    let corr = &jphi * e;
    let half = T::from_real(0.5);
    *phi += corr * half;
    orthonormalize(phi, block, None)?;
    Ok(())
}

/// Upper-triangular factor of the Gram-Schmidt action. For quaternion
/// frames the diagonal carries positive Hermitian 2×2 blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularCocycle {
    s: ComplexMatrix,
    class: SymmetryClass,
}

const COCYCLE_TOL: f64 = 1e-10;

impl TriangularCocycle {
    /// Validates (block) upper-triangularity and positivity of the diagonal.
    pub fn new(s: ComplexMatrix, class: SymmetryClass) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n || n == 0 || n % class.block() != 0 {
            return Err(RppError::dims(
                "triangular cocycle",
                format!("square, size a multiple of {}", class.block()),
                format!("{}x{}", s.nrows(), s.ncols()),
            ));
        }
        let b = class.block();
        let scale = max_abs(&s).max(1.0);
        for c in 0..n {
            for r in (c + 1)..n {
                if r / b == c / b {
                    continue;
                }
                if s[(r, c)] != C64::new(0.0, 0.0) {
                    return Err(RppError::InvariantViolation(format!(
                        "cocycle entry ({r}, {c}) below the diagonal is nonzero"
                    )));
                }
            }
        }
        for p in 0..n / b {
            let j0 = p * b;
            if b == 1 {
                let d = s[(j0, j0)];
                if !(d.re > 0.0) || d.im.abs() > COCYCLE_TOL * scale {
                    return Err(RppError::InvariantViolation(format!(
                        "cocycle diagonal entry {} is not positive: {d}",
                        p + 1
                    )));
                }
            } else {
                let (a, bb, cc, d) = (s[(j0, j0)], s[(j0, j0 + 1)], s[(j0 + 1, j0)], s[(j0 + 1, j0 + 1)]);
                let herm = (bb - cc.conj()).norm().max(a.im.abs()).max(d.im.abs());
                let det = (a * d - bb * cc).re;
                let tr = a.re + d.re;
                if herm > COCYCLE_TOL * scale || !(tr > 0.0) || !(det > 0.0) {
                    return Err(RppError::InvariantViolation(format!(
                        "cocycle diagonal block {} is not positive Hermitian",
                        p + 1
                    )));
                }
            }
        }
        Ok(TriangularCocycle { s, class })
    }

    pub fn identity(class: SymmetryClass, l: usize) -> Self {
        let n = class.ambient_size(l);
        TriangularCocycle { s: ComplexMatrix::identity(n, n), class }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    pub fn channels(&self) -> usize {
        self.s.nrows() / self.class.block()
    }

    /// `g_p` for `p = 1..=L`.
    pub fn additive(&self, p: usize) -> Result<f64> {
        additive_cocycle(self, p, self.class)
    }

    pub fn all_additive(&self) -> Result<Vec<f64>> {
        (1..=self.channels()).map(|p| self.additive(p)).collect()
    }
}

/// `g_p = τ log(e_p* S e_p)`; for quaternions the 2×2 diagonal block enters
/// through `½ log det`, which is `log` of its `q0` coefficient when the
/// block is a multiple of `q0`.
pub fn additive_cocycle(s: &TriangularCocycle, p: usize, class: SymmetryClass) -> Result<f64> {
    if class != s.class {
        return Err(RppError::InvalidArgument(format!(
            "cocycle of class {} evaluated as class {class}",
            s.class
        )));
    }
    let l = s.channels();
    if p == 0 || p > l {
        return Err(RppError::InvalidArgument(format!("channel index {p} outside 1..={l}")));
    }
    let m = &s.s;
    if class.block() == 1 {
        let d = m[(p - 1, p - 1)];
        if !(d.re > 0.0) {
            return Err(RppError::InvariantViolation(format!("nonpositive cocycle diagonal {d}")));
        }
        Ok(class.tau() * d.re.ln())
    } else {
        let j0 = 2 * (p - 1);
        let det = (m[(j0, j0)] * m[(j0 + 1, j0 + 1)] - m[(j0, j0 + 1)] * m[(j0 + 1, j0)]).re;
        if !(det > 0.0) {
            return Err(RppError::InvariantViolation(format!(
                "nonpositive cocycle block determinant {det}"
            )));
        }
        Ok(class.tau() * det.ln())
    }
}

/// Relative tolerance used by [`act`] when testing membership of `T`.
fn membership_tolerance(t: &ComplexMatrix) -> f64 {
    let s = max_abs(t).max(1.0);
    MEMBERSHIP_TOL * s * s
}

/// `T·Φ = TΦ S(T,Φ)⁻¹` with the cocycle `S(T,Φ)`.
pub fn act(t: &ComplexMatrix, phi: &IsotropicFrame) -> Result<(IsotropicFrame, TriangularCocycle)> {
    let n = phi.ambient();
    if t.shape() != (2 * n, 2 * n) {
        return Err(RppError::dims(
            "transfer operator acting on frame",
            format!("{}x{}", 2 * n, 2 * n),
            format!("{}x{}", t.nrows(), t.ncols()),
        ));
    }
    let tol = membership_tolerance(t);
    let fr = form_residual(t, &j_form(n))?;
    let sym = match phi.class {
        SymmetryClass::Complex => 0.0,
        SymmetryClass::Real => reality_residual(t),
        SymmetryClass::Quaternion => quaternion_residual(t)?,
    };
    if fr > tol || sym > tol {
        return Err(RppError::InvariantViolation(format!(
            "operator is not hermitian symplectic of class {} (form {fr:.2e}, symmetry {sym:.2e})",
            phi.class
        )));
    }
    Ok(act_unchecked(t, phi)?)
}

/// [`act`] without the membership test on `T`.
pub fn act_unchecked(t: &ComplexMatrix, phi: &IsotropicFrame) -> Result<(IsotropicFrame, TriangularCocycle)> {
    let mut y = t * &phi.phi;
    let mut s = ComplexMatrix::zeros(0, 0);
    if phi.class == SymmetryClass::Real {
        let mut yr: DMatrix<f64> = y.map(|z| z.re);
        let mut sr = DMatrix::<f64>::zeros(0, 0);
        orthonormalize(&mut yr, 1, Some(&mut sr))?;
        y = yr.map(|x| C64::new(x, 0.0));
        s = sr.map(|x| C64::new(x, 0.0));
    } else {
        orthonormalize(&mut y, phi.class.block(), Some(&mut s))?;
    }
    Ok((
        IsotropicFrame { phi: y, class: phi.class },
        TriangularCocycle { s, class: phi.class },
    ))
}

/// `½ log det` of the Gram matrix of the first `k` columns of `y`.
pub fn half_log_gram_det(y: &ComplexMatrix, k: usize) -> Result<f64> {
    if k == 0 || k > y.ncols() {
        return Err(RppError::InvalidArgument(format!("column count {k} outside 1..={}", y.ncols())));
    }
    let cols = y.columns(0, k);
    let g = cols.adjoint() * cols;
    let chol = g
        .cholesky()
        .ok_or_else(|| RppError::SingularAction { column: k, step: None })?;
    Ok(chol.l().diagonal().iter().map(|d| d.re.ln()).sum())
}

/// The unitaries `(U, V)` with `√2·C·Φ = (U; V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UVPair {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
}

impl UVPair {
    pub fn new(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        if u.shape() != v.shape() || u.nrows() != u.ncols() || u.nrows() == 0 {
            return Err(RppError::dims(
                "unitary pair",
                "two square matrices of equal size",
                format!("{:?} and {:?}", u.shape(), v.shape()),
            ));
        }
        Ok(UVPair { u, v })
    }

    /// Largest unitarity residual of the two factors.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.u).max(unitarity_residual(&self.v))
    }

    /// `U·V*`.
    pub fn u_vstar(&self) -> ComplexMatrix {
        &self.u * self.v.adjoint()
    }
}

pub fn uv_of_frame(phi: &IsotropicFrame) -> UVPair {
    let n = phi.ambient();
    let top = phi.phi.rows(0, n);
    let bot = phi.phi.rows(n, n);
    let ib = bot * I_UNIT;
    UVPair { u: top - &ib, v: top + ib }
}

/// Inverse of [`uv_of_frame`]; checks unitarity and the class relation
/// between `U` and `V`.
pub fn frame_of_uv(uv: &UVPair, class: SymmetryClass) -> Result<IsotropicFrame> {
    let n = uv.u.nrows();
    if n % class.block() != 0 {
        return Err(RppError::dims("quaternion unitary pair", "even size", n));
    }
    let res = uv.unitarity_residual();
    if res > FRAME_TOL {
        return Err(RppError::NonUnitary { residual: res });
    }
    let rel = match class {
        SymmetryClass::Complex => 0.0,
        SymmetryClass::Real => max_abs_diff(&uv.v, &uv.u.conjugate()),
        SymmetryClass::Quaternion => {
            let i = i_form(n)?;
            max_abs_diff(&uv.v, &(i.adjoint() * uv.u.conjugate() * i))
        }
    };
    if rel > FRAME_TOL {
        return Err(RppError::InvariantViolation(format!(
            "V does not match the class-{class} conjugate of U (residual {rel:.2e})"
        )));
    }
    let mut phi = ComplexMatrix::zeros(2 * n, n);
    let half = C64::new(0.5, 0.0);
    phi.rows_mut(0, n).copy_from(&((&uv.u + &uv.v) * half));
    phi.rows_mut(n, n).copy_from(&((&uv.u - &uv.v) * (I_UNIT * half)));
    if class == SymmetryClass::Real {
        phi.iter_mut().for_each(|z| z.im = 0.0);
    }
    Ok(IsotropicFrame { phi, class })
}

/// Haar-random frame: `U` Haar on `U(n)`, `V` independent for C and
/// determined by `U` otherwise.
pub fn random_frame<R: Rng + ?Sized>(class: SymmetryClass, l: usize, rng: &mut R) -> Result<IsotropicFrame> {
    if l == 0 {
        return Err(RppError::InvalidArgument("frame needs at least one channel".into()));
    }
    let n = class.ambient_size(l);
    let (u, v) = match class {
        SymmetryClass::Real => {
            let u = sample_haar_unitary(n, rng)?;
            let v = u.conjugate();
            (u, v)
        }
        SymmetryClass::Complex => (sample_haar_unitary(n, rng)?, sample_haar_unitary(n, rng)?),
        SymmetryClass::Quaternion => {
            let u = sample_haar_unitary(n, rng)?;
            let i = i_form(n)?;
            let v = i.adjoint() * u.conjugate() * i;
            (u, v)
        }
    };
    frame_of_uv(&UVPair { u, v }, class)
}

/// Checks that `t` is an admissible diagonal unitary for the class:
/// phases (C), signs (R) or pairs `diag(z, z̄)` (H).
pub fn check_torus_element(t: &ComplexMatrix, class: SymmetryClass, n: usize) -> Result<()> {
    if t.shape() != (n, n) {
        return Err(RppError::dims("torus element", format!("{n}x{n}"), format!("{:?}", t.shape())));
    }
    let bad = |msg: String| Err(RppError::InvalidArgument(format!("torus element not admissible: {msg}")));
    for r in 0..n {
        for c in 0..n {
            if r != c && t[(r, c)].norm() > 1e-14 {
                return bad(format!("off-diagonal entry ({r}, {c})"));
            }
        }
        let z = t[(r, r)];
        if (z.norm() - 1.0).abs() > 1e-12 {
            return bad(format!("entry {r} has modulus {}", z.norm()));
        }
        if class == SymmetryClass::Real && z.im.abs() > 1e-12 {
            return bad(format!("entry {r} is not ±1"));
        }
    }
    if class == SymmetryClass::Quaternion {
        for b in 0..n / 2 {
            if (t[(2 * b + 1, 2 * b + 1)] - t[(2 * b, 2 * b)].conj()).norm() > 1e-12 {
                return bad(format!("block {b} does not commute with the quaternion structure"));
            }
        }
    }
    Ok(())
}

/// `‖S(T, Φt) − t⁻¹ S(T, Φ) t‖_max`.
pub fn torus_covariance_check(t_op: &ComplexMatrix, phi: &IsotropicFrame, t: &ComplexMatrix) -> Result<f64> {
    check_torus_element(t, phi.class, phi.ambient())?;
    let (_, s0) = act(t_op, phi)?;
    let rotated = IsotropicFrame { phi: &phi.phi * t, class: phi.class };
    let (_, s1) = act(t_op, &rotated)?;
    let expect = t.adjoint() * &s0.s * t;
    Ok(max_abs_diff(&s1.s, &expect))
}
