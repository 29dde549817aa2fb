//! Weak-disorder Lyapunov spectra from the random phase property.

use std::fmt;

use models::{slab_mu, tube_mu, ModelKind, ModelParams};
use symplectic_core::{Result, RppError, SymmetryClass};

use crate::moments::ipq_coefficient;

/// Smallest admissible `|sin k_l|` on an elliptic channel.
pub const DEFAULT_BAND_EDGE_TOL: f64 = 1e-3;

/// Channel counts and coupling entering the general formula.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaFormulaInputs {
    pub class: SymmetryClass,
    pub l: usize,
    pub l_e: usize,
    pub l_h: usize,
    /// 1-based exponent index, `p > L_h`.
    pub p: usize,
    pub lambda: f64,
}

impl GammaFormulaInputs {
    pub fn new(class: SymmetryClass, l: usize, l_e: usize, p: usize, lambda: f64) -> Result<Self> {
        if l_e == 0 || l_e > l {
            return Err(RppError::InvalidArgument(format!("need 1 <= L_e <= L, got L_e={l_e}, L={l}")));
        }
        let l_h = l - l_e;
        if p <= l_h || p > l {
            return Err(RppError::InvalidArgument(format!("exponent {p} is not elliptic (L_h={l_h}, L={l})")));
        }
        Ok(GammaFormulaInputs { class, l, l_e, l_h, p, lambda })
    }
}

/// `λ²/(4L_e(L_e + δ_R − ½δ_H)) · (L − p + ½δ_C + δ_R + ¼δ_H) · trace`, where
/// `trace` is `E Tr[Π_e(P* + P)Π_e P Π_e]` (half trace for quaternions).
pub fn theorem1_gamma(trace: f64, inputs: &GammaFormulaInputs) -> f64 {
    let (dr, dc, dh) = inputs.class.deltas();
    let le = inputs.l_e as f64;
    let count = inputs.l as f64 - inputs.p as f64 + 0.5 * dc + dr + 0.25 * dh;
    inputs.lambda * inputs.lambda / (4.0 * le * (le + dr - 0.5 * dh)) * count * trace
}

/// The same exponent assembled term by term from the moment integrals:
/// `¼λ²[I_p(A) − Σ_{q≤p}(2 − δ_{pq}) I_{p,q}(B)]` with `A = 2P*P + P² + (P*)²`
/// and `B = P + P*`, given `Tr[A_e]`, `Tr[Π_e B Π_h B Π_e]` and `Tr[B_e²]`.
pub fn term_assembly(inputs: &GammaFormulaInputs, trace_a_e: f64, trace_cross: f64, trace_b_e2: f64) -> f64 {
    let le = inputs.l_e as f64;
    let ip = trace_a_e / (2.0 * le);
    let hyperbolic = 2.0 * trace_cross / (4.0 * le);
    let elliptic: f64 = (inputs.l_h + 1..=inputs.p)
        .map(|q| {
            let same = q == inputs.p;
            let weight = if same { 1.0 } else { 2.0 };
            weight * ipq_coefficient(inputs.class, inputs.l_e, same) * trace_b_e2
        })
        .sum();
    0.25 * inputs.lambda * inputs.lambda * (ip - hyperbolic - elliptic)
}

/// `γ_p − γ_{p+1}` of [`theorem1_gamma`], independent of `p`.
pub fn equidistant_spacing(trace: f64, class: SymmetryClass, l_e: usize, lambda: f64) -> f64 {
    let (dr, _, dh) = class.deltas();
    let le = l_e as f64;
    lambda * lambda / (4.0 * le * (le + dr - 0.5 * dh)) * trace
}

/// `(γ_L^R/γ_L^C, γ_L^C/γ_L^H)` at equal trace with `L_e` elliptic channels.
pub fn class_ratios(l_e: usize) -> Result<(f64, f64)> {
    let g = |class| -> Result<f64> {
        Ok(theorem1_gamma(1.0, &GammaFormulaInputs::new(class, l_e, l_e, l_e, 1.0)?))
    };
    let (r, c, h) = (g(SymmetryClass::Real)?, g(SymmetryClass::Complex)?, g(SymmetryClass::Quaternion)?);
    Ok((r / c, c / h))
}

/// Which wavenumbers enter a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedFormKind {
    /// `h_k(φ)² = 1/|sin k_l(φ)|` at the model's actual flux.
    #[default]
    Exact,
    /// `1/|sin k_l|` at zero flux and zero spin-orbit coupling, the leading
    /// term for small `φ` or small `t`.
    SmallParameter,
}

impl fmt::Display for ClosedFormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClosedFormKind::Exact => "exact-h",
            ClosedFormKind::SmallParameter => "small-parameter",
        })
    }
}

/// An elliptic wavenumber `k_l ∈ (0, π)` with `2cos k_l = μ_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber {
    /// 1-based Fourier label.
    pub label: usize,
    pub k: f64,
}

/// Elliptic wavenumbers of the transverse energies, refusing any channel
/// with `√|1 − μ²/4| < band_edge_tol` (an internal band edge).
pub fn elliptic_wavenumbers(mu: &[f64], band_edge_tol: f64) -> Result<Vec<Wavenumber>> {
    let mut out = Vec::new();
    for (i, &m) in mu.iter().enumerate() {
        let arg = 0.5 * m;
        if (1.0 - arg * arg).abs().sqrt() < band_edge_tol {
            return Err(RppError::InternalBandEdge { l: i + 1, mu_abs: m.abs() });
        }
        if arg.abs() < 1.0 {
            out.push(Wavenumber { label: i + 1, k: arg.acos() });
        }
    }
    Ok(out)
}

/// A closed-form exponent with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub gamma: f64,
    pub kind: ClosedFormKind,
    pub class: SymmetryClass,
    pub l: usize,
    pub l_e: usize,
    /// `(1/L)(Σ_l 1/|sin k_l|)²`.
    pub trace: f64,
    pub wavenumbers: Vec<Wavenumber>,
}

fn transverse_energies(params: &ModelParams, kind: ClosedFormKind) -> Result<Vec<f64>> {
    let zero = kind == ClosedFormKind::SmallParameter;
    let flux = |i: usize| if zero { 0.0 } else { params.phi.get(i).copied().unwrap_or(0.0) };
    match params.model {
        ModelKind::AndersonReal => Ok(tube_mu(params.l, params.energy, 0.0)),
        ModelKind::AndersonMagnetic => Ok(tube_mu(params.l, params.energy, flux(0))),
        ModelKind::Ando => {
            if !zero && params.t != 0.0 {
                return Err(RppError::InvalidArgument(
                    "the spin-orbit model has a closed form only in its small-t limit".into(),
                ));
            }
            Ok(tube_mu(params.l, params.energy, 0.0))
        }
        ModelKind::Slab { n, d } => {
            let phis: Vec<f64> = (0..d - 1).map(flux).collect();
            Ok(slab_mu(n, d, params.energy, &phis))
        }
    }
}

/// Closed-form `γ_p` of class `class` for the model's transverse spectrum,
/// via [`theorem1_gamma`] with trace `(1/L)(Σ_l 1/|sin k_l|)²`.
pub fn closed_form_gamma(
    params: &ModelParams,
    p: usize,
    class: SymmetryClass,
    kind: ClosedFormKind,
    band_edge_tol: f64,
) -> Result<ClosedForm> {
    params.validate()?;
    let mu = transverse_energies(params, kind)?;
    let ks = elliptic_wavenumbers(&mu, band_edge_tol)?;
    let l = mu.len();
    let sum: f64 = ks.iter().map(|w| 1.0 / w.k.sin().abs()).sum();
    let trace = sum * sum / l as f64;
    let inputs = GammaFormulaInputs::new(class, l, ks.len(), p, params.lambda)?;
    Ok(ClosedForm {
        gamma: theorem1_gamma(trace, &inputs),
        kind,
        class,
        l,
        l_e: ks.len(),
        trace,
        wavenumbers: ks,
    })
}

/// All elliptic exponents `γ_{L_h+1}, …, γ_L` of [`closed_form_gamma`].
pub fn closed_form_spectrum(
    params: &ModelParams,
    class: SymmetryClass,
    kind: ClosedFormKind,
    band_edge_tol: f64,
) -> Result<Vec<(usize, f64)>> {
    let first = closed_form_gamma(params, params.l, class, kind, band_edge_tol)?;
    let l_h = first.l - first.l_e;
    (l_h + 1..=first.l)
        .map(|p| Ok((p, closed_form_gamma(params, p, class, kind, band_edge_tol)?.gamma)))
        .collect()
}
