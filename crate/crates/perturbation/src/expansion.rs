//! Second-order expansion of `g_p(e^{λP}, Φ)` in `λ`.

use frames::{act_unchecked, IsotropicFrame};
use symplectic_core::{cr, exp_lie, ComplexMatrix, Result, RppError, SymmetryClass};

/// `P₁ = ½Φ*(P + P*)Φ` and `P₂ = ¼Φ*(2P*P + P² + (P*)²)Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerms {
    pub p1: ComplexMatrix,
    pub p2: ComplexMatrix,
}

impl ExpansionTerms {
    pub fn new(p: &ComplexMatrix, phi: &IsotropicFrame) -> Result<Self> {
        let f = phi.phi();
        if p.shape() != (f.nrows(), f.nrows()) {
            return Err(RppError::dims(
                "perturbation generator",
                format!("{0}x{0}", f.nrows()),
                format!("{}x{}", p.nrows(), p.ncols()),
            ));
        }
        let ps = p.adjoint();
        let p1 = f.adjoint() * (p + &ps) * f * cr(0.5);
        let inner = &ps * p * cr(2.0) + p * p + &ps * &ps;
        let p2 = f.adjoint() * inner * f * cr(0.25);
        Ok(ExpansionTerms { p1, p2 })
    }

    /// Largest deviation of `P₁`, `P₂` from self-adjointness.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = |m: &ComplexMatrix| (m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        d(&self.p1).max(d(&self.p2))
    }
}

fn channel_range(class: SymmetryClass, channels: usize, p: usize) -> Result<(usize, usize)> {
    if p == 0 || p > channels {
        return Err(RppError::InvalidArgument(format!("channel index {p} outside 1..={channels}")));
    }
    let b = class.block();
    Ok((b * (p - 1), b))
}

/// `τ·tr` of the diagonal block of channel `p` of `m`.
fn diag_block(m: &ComplexMatrix, start: usize, width: usize) -> ComplexMatrix {
    m.view((start, start), (width, width)).into_owned()
}

fn tau_trace(class: SymmetryClass, m: &ComplexMatrix) -> f64 {
    class.tau() * m.trace().re
}

/// First- and second-order coefficients `(c₁, c₂)` with
/// `g_p(e^{λP}, Φ) = λc₁ + λ²c₂ + O(λ³)`.
pub fn expansion_coefficients(p: &ComplexMatrix, phi: &IsotropicFrame, channel: usize) -> Result<(f64, f64)> {
    let class = phi.class();
    let (start, b) = channel_range(class, phi.channels(), channel)?;
    let t = ExpansionTerms::new(p, phi)?;
    let x = diag_block(&t.p1, start, b);
    let y = diag_block(&t.p2, start, b);
    let upto = start + b;
    let col = t.p1.view((0, start), (upto, b)).into_owned();
    let cross = col.adjoint() * &col;
    let c1 = tau_trace(class, &x);
    let c2 = tau_trace(class, &y) + tau_trace(class, &(&x * &x)) - 2.0 * tau_trace(class, &cross);
    Ok((c1, c2))
}

/// The truncated expansion at coupling `lambda`.
pub fn cocycle_expansion(p: &ComplexMatrix, phi: &IsotropicFrame, channel: usize, lambda: f64) -> Result<f64> {
    let (c1, c2) = expansion_coefficients(p, phi, channel)?;
    Ok(lambda * c1 + lambda * lambda * c2)
}

/// `g_p(e^{λP}, Φ)` evaluated through the frame action.
pub fn exact_cocycle(p: &ComplexMatrix, phi: &IsotropicFrame, channel: usize, lambda: f64) -> Result<f64> {
    let (t, _) = exp_lie(p, lambda);
    let (_, s) = act_unchecked(&t, phi)?;
    s.additive(channel)
}
