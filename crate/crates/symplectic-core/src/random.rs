use rand::Rng;
use rand_distr::StandardNormal;

use crate::class::SymmetryClass;
use crate::error::{Result, RppError};
use crate::forms::{j_form, quaternion_project, ComplexMatrix};
use crate::linalg::{c, cr, expm, C64};

/// Complex Ginibre matrix with entries of unit variance.
pub fn ginibre<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar-distributed `n×n` unitary: QR of a Ginibre matrix, with the phases
/// of the diagonal of R absorbed into Q.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(RppError::InvalidArgument("Haar unitary needs n >= 1".into()));
    }
    let qr = ginibre(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-distributed real orthogonal matrix (same construction over R).
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(RppError::InvalidArgument("Haar orthogonal needs n >= 1".into()));
    }
    let g = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    Ok(q.map(cr))
}

/// Random self-adjoint matrix with the conjugation symmetry of `class`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, class: SymmetryClass, rng: &mut R) -> Result<ComplexMatrix> {
    let g = ginibre(n, n, rng);
    let h = (&g + g.adjoint()) * cr(0.5);
    match class {
        SymmetryClass::Complex => Ok(h),
        SymmetryClass::Real => Ok(h.map(|z| cr(z.re))),
        SymmetryClass::Quaternion => quaternion_project(&h),
    }
}

/// Random element `J·H` of the Lie algebra hs(2n, K), scaled by `scale`.
/// For the quaternion class `n` counts complex channels (must be even).
pub fn random_hs_algebra<R: Rng + ?Sized>(
    n: usize,
    class: SymmetryClass,
    scale: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let h = random_hermitian(2 * n, class, rng)?;
    Ok(j_form(n) * h * cr(scale))
}

/// Random group element `e^{JH}` of HS(2n, K).
pub fn random_hs_group<R: Rng + ?Sized>(
    n: usize,
    class: SymmetryClass,
    scale: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    Ok(expm(&random_hs_algebra(n, class, scale, rng)?))
}

/// Random self-adjoint member of hs(2n, K): `[[X, Y], [Y, −X]]` with
/// `X, Y` self-adjoint of the class symmetry.
pub fn random_hs_selfadjoint<R: Rng + ?Sized>(
    n: usize,
    class: SymmetryClass,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let x = random_hermitian(n, class, rng)?;
    let y = random_hermitian(n, class, rng)?;
    Ok(crate::linalg::block2(&x, &y, &y, &(-&x)))
}
