//! Tube and slab models: transverse Fourier diagonalization followed by the
//! channel-wise basis change to rotations and expansions.

use std::f64::consts::PI;

use symplectic_core::linalg::block2;
use symplectic_core::{c, cr, ComplexMatrix, Result, RppError, C64};

use crate::bundle::{diag2, NormalFormBundle};
use crate::channels::{classify_tube, ChannelData, ChannelKind};
use crate::fourier::{dft, frequency, kron_power, real_fourier, shift, slab_index, slab_shift};
use crate::kernel::KernelSpec;
use crate::params::{ModelKind, ModelParams};

/// `[[E − Δ, −1], [1, 0]]`.
pub(crate) fn free_tube_transfer(energy: f64, delta: &ComplexMatrix) -> ComplexMatrix {
    let l = delta.nrows();
    let id = ComplexMatrix::identity(l, l);
    let a = &id * cr(energy) - delta;
    block2(&a, &(-&id), &id, &ComplexMatrix::zeros(l, l))
}

/// `e^{iφ} S + e^{−iφ} S*`.
pub fn tube_laplacian(l: usize, phi: f64) -> ComplexMatrix {
    let s = shift(l);
    let z = c(phi.cos(), phi.sin());
    &s * z + s.adjoint() * z.conj()
}

/// Transverse hopping of the slab, `Σ_j e^{iφ_j} S_j + h.c.`.
pub fn slab_laplacian(n: usize, phis: &[f64]) -> ComplexMatrix {
    let dirs = phis.len();
    let l = n.pow(dirs as u32);
    let mut delta = ComplexMatrix::zeros(l, l);
    for (j, &phi) in phis.iter().enumerate() {
        let s = slab_shift(n, dirs, j);
        let z = c(phi.cos(), phi.sin());
        delta += &s * z + s.adjoint() * z.conj();
    }
    delta
}

/// Per-channel 2×2 data: `N`, its inverse and `R`, as `[a, b, c, d]` rows.
struct ChannelBlocks {
    n: [C64; 4],
    n_inv: [C64; 4],
    r: [C64; 4],
}

fn channel_blocks(rho: C64, kind: ChannelKind) -> ChannelBlocks {
    match kind {
        ChannelKind::Elliptic => {
            let (co, si) = (rho.re, rho.im);
            let h = 1.0 / si.sqrt();
            let n = [cr(h), cr(0.0), cr(h * co), cr(h * si)];
            ChannelBlocks {
                n,
                n_inv: [n[3], -n[1], -n[2], n[0]],
                r: [cr(co), cr(-si), cr(si), cr(co)],
            }
        }
        ChannelKind::Hyperbolic => {
            let d = rho - rho.inv();
            let sigma = d.re.signum();
            let h = 1.0 / d.norm().sqrt();
            let n = [cr(h), cr(sigma * h), rho.inv() * h, rho * (sigma * h)];
            ChannelBlocks {
                n,
                n_inv: [n[3], -n[1], -n[2], n[0]],
                r: [rho, cr(0.0), cr(0.0), rho.inv()],
            }
        }
    }
}

/// Builds the bundle from a transverse basis `m` (columns diagonalize `Δ`)
/// with transverse energies `mu[col]`.
fn tube_bundle(
    params: &ModelParams,
    m: ComplexMatrix,
    delta: &ComplexMatrix,
    mu: &[f64],
    labels: &[usize],
) -> Result<NormalFormBundle> {
    let l = mu.len();
    let channels: ChannelData = classify_tube(mu, labels, params.parabolic_tol)?;
    let mut q = ComplexMatrix::zeros(l, l);
    for (p, &src) in channels.perm.iter().enumerate() {
        q[(src, p)] = cr(1.0);
    }
    let mut nm = ComplexMatrix::zeros(2 * l, 2 * l);
    let mut rm = ComplexMatrix::zeros(2 * l, 2 * l);
    let mut nd: [Vec<C64>; 4] = Default::default();
    let mut kd: [Vec<C64>; 4] = Default::default();
    for (p, ch) in channels.channels.iter().enumerate() {
        let b = channel_blocks(ch.rho, ch.kind);
        let pos = [(p, p), (p, l + p), (l + p, p), (l + p, l + p)];
        for (k, &(i, j)) in pos.iter().enumerate() {
            nm[(i, j)] = b.n[k];
            rm[(i, j)] = b.r[k];
        }
        // K = R N⁻¹ per channel.
        let [r0, r1, r2, r3] = b.r;
        let [i0, i1, i2, i3] = b.n_inv;
        let kk = [r0 * i0 + r1 * i2, r0 * i1 + r1 * i3, r2 * i0 + r3 * i2, r2 * i1 + r3 * i3];
        for k in 0..4 {
            nd[k].push(b.n[k]);
            kd[k].push(kk[k]);
        }
    }
    let f = &m * &q;
    let kernel = KernelSpec::Channel { n: nd, k: kd, f };
    let free = free_tube_transfer(params.energy, delta);
    NormalFormBundle::assemble(
        params.clone(),
        diag2(&m),
        diag2(&q),
        nm,
        rm,
        channels,
        free,
        1.0,
        1,
        Some(kernel),
    )
}

fn is_zero_flux(phi: f64) -> bool {
    let r = phi.rem_euclid(2.0 * PI);
    r.abs() < 1e-14 || (2.0 * PI - r).abs() < 1e-14
}

/// Transverse energies `μ_l = E − 2cos(φ + 2πl/L)` in Fourier order.
pub fn tube_mu(l: usize, energy: f64, phi: f64) -> Vec<f64> {
    (0..l).map(|col| energy - 2.0 * (phi + frequency(col, l)).cos()).collect()
}

pub fn build_normal_form_magnetic(params: &ModelParams) -> Result<NormalFormBundle> {
    params.validate()?;
    if params.model != ModelKind::AndersonMagnetic {
        return Err(RppError::InvalidArgument(format!(
            "magnetic builder called for model {}",
            params.model.name()
        )));
    }
    let (l, phi) = (params.l, params.flux());
    if is_zero_flux(phi) {
        return Err(RppError::InvalidArgument(
            "zero flux puts the tube in the real class; use the anderson-real model".into(),
        ));
    }
    let mu = tube_mu(l, params.energy, phi);
    let labels: Vec<usize> = (1..=l).collect();
    tube_bundle(params, dft(l), &tube_laplacian(l, phi), &mu, &labels)
}

pub fn build_normal_form_real(params: &ModelParams) -> Result<NormalFormBundle> {
    params.validate()?;
    if params.model != ModelKind::AndersonReal {
        return Err(RppError::InvalidArgument(format!(
            "real builder called for model {}",
            params.model.name()
        )));
    }
    if !is_zero_flux(params.flux()) {
        return Err(RppError::InvalidArgument("the real model has zero flux".into()));
    }
    let l = params.l;
    let mu = tube_mu(l, params.energy, 0.0);
    let labels: Vec<usize> = (1..=l).collect();
    let m = real_fourier(l).map(cr);
    tube_bundle(params, m, &tube_laplacian(l, 0.0), &mu, &labels)
}

/// Transverse energies `E − Σ_j 2cos(φ_j + 2πl_j/n)` of the slab, in
/// flattened Fourier order.
pub fn slab_mu(n: usize, d: usize, energy: f64, phis: &[f64]) -> Vec<f64> {
    let dirs = d - 1;
    (0..n.pow(dirs as u32))
        .map(|col| {
            let idx = slab_index(col, n, dirs);
            energy - idx.iter().zip(phis).map(|(&li, &ph)| 2.0 * (ph + frequency(li, n)).cos()).sum::<f64>()
        })
        .collect()
}

pub fn build_normal_form_slab(params: &ModelParams) -> Result<NormalFormBundle> {
    params.validate()?;
    let ModelKind::Slab { n, d } = params.model else {
        return Err(RppError::InvalidArgument(format!(
            "slab builder called for model {}",
            params.model.name()
        )));
    };
    let m = kron_power(&dft(n), d - 1);
    let mu = slab_mu(n, d, params.energy, &params.phi);
    let labels: Vec<usize> = (1..=params.l).collect();
    tube_bundle(params, m, &slab_laplacian(n, &params.phi), &mu, &labels)
}
