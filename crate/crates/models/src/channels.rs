//! Channel classification of the free transfer matrix.

use symplectic_core::{c, Result, RppError, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Elliptic,
    Hyperbolic,
}

/// One channel of the normal form, in its ordered position.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    /// Frequency label: the 1-based Fourier index for the tube models, the
    /// flattened 0-based column for the slab, the pair index for the
    /// spin-orbit model.
    pub label: usize,
    /// Transverse energy `μ` (absent for the spin-orbit model).
    pub mu: Option<f64>,
    /// Eigenvalue of the channel: `|ρ| = 1` (elliptic) or `|ρ| > 1` in
    /// modulus (hyperbolic).
    pub rho: C64,
    pub kind: ChannelKind,
}

impl Channel {
    pub fn is_elliptic(&self) -> bool {
        self.kind == ChannelKind::Elliptic
    }

    /// `κ`: `ρ` on hyperbolic channels, 1 otherwise.
    pub fn kappa(&self) -> C64 {
        if self.is_elliptic() {
            c(1.0, 0.0)
        } else {
            self.rho
        }
    }

    /// `η`: `ρ` on elliptic channels, 1 otherwise.
    pub fn eta(&self) -> C64 {
        if self.is_elliptic() {
            self.rho
        } else {
            c(1.0, 0.0)
        }
    }

    /// `ln|κ|`, the free growth rate.
    pub fn ln_kappa(&self) -> f64 {
        self.kappa().norm().ln()
    }

    /// `h = |(ρ − ρ⁻¹)/2i|^{−1/2}` (elliptic) or `|ρ − ρ⁻¹|^{−1/2}`
    /// (hyperbolic); defined for channels carrying a transverse energy.
    pub fn h(&self) -> Option<f64> {
        self.mu?;
        let d = self.rho - self.rho.inv();
        let x = if self.is_elliptic() { 0.5 * d.norm() } else { d.norm() };
        Some(1.0 / x.sqrt())
    }
}

/// Ordered channels of one normal form: hyperbolic channels first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelData {
    pub channels: Vec<Channel>,
    /// `perm[p]` is the source column of ordered channel `p`.
    pub perm: Vec<usize>,
}

impl ChannelData {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn l_e(&self) -> usize {
        self.channels.iter().filter(|c| c.is_elliptic()).count()
    }

    pub fn l_h(&self) -> usize {
        self.len() - self.l_e()
    }

    pub fn pi_e(&self) -> Vec<bool> {
        self.channels.iter().map(Channel::is_elliptic).collect()
    }

    pub fn pi_h(&self) -> Vec<bool> {
        self.channels.iter().map(|c| !c.is_elliptic()).collect()
    }

    pub fn mu(&self) -> Option<Vec<f64>> {
        self.channels.iter().map(|c| c.mu).collect()
    }

    pub fn kappa(&self) -> Vec<C64> {
        self.channels.iter().map(Channel::kappa).collect()
    }

    pub fn eta(&self) -> Vec<C64> {
        self.channels.iter().map(Channel::eta).collect()
    }

    pub fn ln_kappa(&self) -> Vec<f64> {
        self.channels.iter().map(Channel::ln_kappa).collect()
    }

    /// `h_k` for every channel (tube and slab models only).
    pub fn h(&self) -> Option<Vec<f64>> {
        self.channels.iter().map(Channel::h).collect()
    }
}

/// `ρ = μ/2 + ½√(μ² − 4)` on the branch with `Im ρ > 0` (elliptic) or
/// `|ρ| > 1` (hyperbolic).
pub fn rho_of_mu(mu: f64) -> C64 {
    let q = 0.25 * mu * mu - 1.0;
    if q < 0.0 {
        c(0.5 * mu, (-q).sqrt())
    } else {
        c(0.5 * mu + mu.signum() * q.sqrt(), 0.0)
    }
}

/// Classifies and orders the channels of a diagonal `μ` (listed by source
/// column). Ordering is by `|μ|` non-increasing, stable in the source
/// order. `labels[j]` names column `j` in errors.
pub fn classify_tube(mu: &[f64], labels: &[usize], parabolic_tol: f64) -> Result<ChannelData> {
    debug_assert_eq!(mu.len(), labels.len());
    for (j, &m) in mu.iter().enumerate() {
        if (m.abs() - 2.0).abs() <= parabolic_tol {
            return Err(RppError::InternalBandEdge { l: labels[j], mu_abs: m.abs() });
        }
    }
    let mut perm: Vec<usize> = (0..mu.len()).collect();
    perm.sort_by(|&a, &b| mu[b].abs().total_cmp(&mu[a].abs()));
    let channels = perm
        .iter()
        .map(|&j| {
            let m = mu[j];
            Channel {
                label: labels[j],
                mu: Some(m),
                rho: rho_of_mu(m),
                kind: if m.abs() < 2.0 { ChannelKind::Elliptic } else { ChannelKind::Hyperbolic },
            }
        })
        .collect();
    Ok(ChannelData { channels, perm })
}
