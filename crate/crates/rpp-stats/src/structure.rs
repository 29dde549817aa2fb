//! Block structure of the frame unitaries and the polar decomposition of
//! transfer-matrix products.

use nalgebra::DVector;
use symplectic_core::forms::{cayley_conjugate, g_form, CayleyDirection};
use symplectic_core::linalg::{frobenius, max_abs_diff};
use symplectic_core::{cr, ComplexMatrix, Result, RppError};

fn indices(mask: &[bool], on: bool) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, m)| **m == on).map(|(i, _)| i).collect()
}

fn sub(u: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])])
}

/// Squared Hilbert–Schmidt norms of one unitary's off-diagonal and
/// hyperbolic blocks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockNorms {
    /// `‖π_e U π_h‖² + ‖π_h U π_e‖²`.
    pub offblock_sq: f64,
    /// `‖ |π_h U π_h| − π_h ‖²` with the modulus taken entrywise.
    pub hyperbolic_sq: f64,
}

/// Block norms of `u` for the elliptic mask over its columns.
///
/// The hyperbolic block converges to `π_h` only up to signs (channels with
/// negative multiplier flip the frame vector each step), so it is compared
/// entrywise in modulus.
pub fn block_norms(u: &ComplexMatrix, elliptic: &[bool]) -> Result<BlockNorms> {
    if u.nrows() != elliptic.len() || u.ncols() != elliptic.len() {
        return Err(RppError::dims("block mask", u.nrows(), elliptic.len()));
    }
    let (e, h) = (indices(elliptic, true), indices(elliptic, false));
    let off = frobenius(&sub(u, &e, &h)).powi(2) + frobenius(&sub(u, &h, &e)).powi(2);
    let hh = sub(u, &h, &h);
    let mut hyp = 0.0;
    for i in 0..h.len() {
        for j in 0..h.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            hyp += (hh[(i, j)].norm() - target).powi(2);
        }
    }
    Ok(BlockNorms { offblock_sq: off, hyperbolic_sq: hyp })
}

/// RMS block deviations over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStructure {
    pub offblock_rms: f64,
    pub hyperbolic_deviation: f64,
    pub samples: usize,
}

impl BlockStructure {
    pub fn from_norms(norms: &[BlockNorms]) -> Result<Self> {
        if norms.is_empty() {
            return Err(RppError::InvalidArgument("empty ensemble".into()));
        }
        let n = norms.len() as f64;
        Ok(BlockStructure {
            offblock_rms: (norms.iter().map(|b| b.offblock_sq).sum::<f64>() / n).sqrt(),
            hyperbolic_deviation: (norms.iter().map(|b| b.hyperbolic_sq).sum::<f64>() / n).sqrt(),
            samples: norms.len(),
        })
    }
}

pub fn block_structure_check(us: &[ComplexMatrix], elliptic: &[bool]) -> Result<BlockStructure> {
    let norms: Vec<BlockNorms> = us.iter().map(|u| block_norms(u, elliptic)).collect::<Result<_>>()?;
    BlockStructure::from_norms(&norms)
}

/// `C T C* = [[u, 0], [0, v]] [[√(1+Λ), √Λ], [√Λ, √(1+Λ)]] [[u′, 0], [0, v′]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecomposition {
    /// Non-decreasing, non-negative.
    pub lambda: Vec<f64>,
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub u_prime: ComplexMatrix,
    pub v_prime: ComplexMatrix,
    /// `‖C T C* − product‖_max`.
    pub residual: f64,
}

pub const POLAR_RECONSTRUCTION_TOL: f64 = 1e-8;

impl PolarDecomposition {
    /// The Lorentz-picture matrix rebuilt from the factors.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let l = self.lambda.len();
        let s = ComplexMatrix::from_diagonal(&DVector::from_iterator(l, self.lambda.iter().map(|x| cr((1.0 + x).sqrt()))));
        let r = ComplexMatrix::from_diagonal(&DVector::from_iterator(l, self.lambda.iter().map(|x| cr(x.sqrt()))));
        let mut m = ComplexMatrix::zeros(2 * l, 2 * l);
        m.view_mut((0, 0), (l, l)).copy_from(&(&self.u * &s * &self.u_prime));
        m.view_mut((0, l), (l, l)).copy_from(&(&self.u * &r * &self.v_prime));
        m.view_mut((l, 0), (l, l)).copy_from(&(&self.v * &r * &self.u_prime));
        m.view_mut((l, l), (l, l)).copy_from(&(&self.v * &s * &self.v_prime));
        m
    }

    /// `(1/2N)·ln(1 + Λ_max)`: the growth rate of the largest singular value
    /// of an `N`-fold product.
    pub fn top_growth_rate(&self, n: usize) -> f64 {
        let top = self.lambda.last().copied().unwrap_or(0.0);
        (1.0 + top).ln() / (2.0 * n as f64)
    }
}

/// Polar decomposition of a hermitian symplectic `t` in the Lorentz picture.
pub fn polar_diagnostic(t: &ComplexMatrix) -> Result<PolarDecomposition> {
    let m = cayley_conjugate(t, CayleyDirection::ToLorentz)?;
    let l = m.nrows() / 2;
    let g = g_form(l);
    let lorentz = max_abs_diff(&(m.adjoint() * &g * &m), &g) / (1.0 + frobenius(&m).powi(2));
    if lorentz > 1e-8 {
        return Err(RppError::InvariantViolation(format!("input is not in U(L,L): relative residual {lorentz:.3e}")));
    }
    let a = m.view((0, 0), (l, l)).into_owned();
    let b = m.view((0, l), (l, l)).into_owned();
    let d = m.view((l, l), (l, l)).into_owned();

    let svd = a.clone().svd(true, true);
    let (wu, wvt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(RppError::InvariantViolation("SVD did not converge".into())),
    };
    // Rows of u*B are √Λ_i v′_i, which fixes Λ without the cancellation in
    // s² − 1; rows with negligible Λ are completed to an orthonormal basis.
    let x0 = wu.adjoint() * &b;
    let lambda0: Vec<f64> = (0..l).map(|i| x0.row(i).norm_squared()).collect();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&i, &j| lambda0[i].total_cmp(&lambda0[j]));
    let u = ComplexMatrix::from_fn(l, l, |r, c| wu[(r, order[c])]);
    let u_prime = ComplexMatrix::from_fn(l, l, |r, c| wvt[(order[r], c)]);
    let x = ComplexMatrix::from_fn(l, l, |r, c| x0[(order[r], c)]);
    let lambda: Vec<f64> = order.iter().map(|&i| lambda0[i]).collect();
    let s: Vec<f64> = lambda.iter().map(|x| (1.0 + x).sqrt()).collect();
    let scale = s.iter().copied().fold(1.0, f64::max);
    let tol = 1e-24 * scale * scale;
    let mut vp = ComplexMatrix::zeros(l, l);
    let mut filled = vec![false; l];
    for i in 0..l {
        if lambda[i] > tol {
            let row = x.row(i) / cr(lambda[i].sqrt());
            vp.row_mut(i).copy_from(&row);
            filled[i] = true;
        }
    }
    complete_rows(&mut vp, &filled);
    let s_inv = ComplexMatrix::from_diagonal(&DVector::from_iterator(l, s.iter().map(|x| cr(1.0 / x))));
    let v = &d * vp.adjoint() * s_inv;
    let mut out = PolarDecomposition { lambda, u, v, u_prime, v_prime: vp, residual: 0.0 };
    out.residual = max_abs_diff(&out.reconstruct(), &m);
    if out.residual > POLAR_RECONSTRUCTION_TOL * scale * scale {
        return Err(RppError::InvariantViolation(format!("polar reconstruction residual {:.3e}", out.residual)));
    }
    Ok(out)
}

/// Fills unset rows so that all rows are orthonormal.
fn complete_rows(m: &mut ComplexMatrix, filled: &[bool]) {
    let l = m.nrows();
    let mut basis: Vec<DVector<symplectic_core::C64>> =
        (0..l).filter(|&i| filled[i]).map(|i| m.row(i).transpose()).collect();
    let mut next = (0..l).filter(|&i| !filled[i]);
    for k in 0..l {
        if basis.len() == l {
            break;
        }
        let mut e = DVector::from_element(l, cr(0.0));
        e[k] = cr(1.0);
        for b in &basis {
            let c = b.conjugate().dot(&e);
            e -= b * c;
        }
        for b in &basis {
            let c = b.conjugate().dot(&e);
            e -= b * c;
        }
        let n = e.norm();
        if n > 1e-6 {
            let e = e / cr(n);
            if let Some(i) = next.next() {
                m.row_mut(i).copy_from(&e.transpose());
            }
            basis.push(e);
        }
    }
}
