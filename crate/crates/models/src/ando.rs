//! Spin-orbit tube: quaternion transfer matrix, the 4×4 blocks `S_η` and the
//! per-frequency normal forms that assemble into the full bundle.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::DMatrix;
use symplectic_core::linalg::block2;
use symplectic_core::{
    c, cr, i_form, j_form, kron, max_abs, max_abs_diff, quaternion_units, ComplexMatrix, Result,
    RppError, C64,
};

use crate::bundle::NormalFormBundle;
use crate::channels::{rho_of_mu, Channel, ChannelData, ChannelKind};
use crate::fourier::{real_fourier, shift};
use crate::params::{ModelKind, ModelParams};

/// Eigenvalue constellation of `S_η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AndoCase {
    /// Four complex eigenvalues off the unit circle.
    G1,
    /// Two elliptic pairs.
    G2,
    /// One elliptic and one real hyperbolic pair.
    G3,
    /// Two real hyperbolic pairs.
    G4,
}

impl fmt::Display for AndoCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AndoCase::G1 => "G1",
            AndoCase::G2 => "G2",
            AndoCase::G3 => "G3",
            AndoCase::G4 => "G4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpectrum {
    pub a: f64,
    pub b: f64,
    pub nu_plus: C64,
    pub nu_minus: C64,
    pub kappa_plus: C64,
    pub kappa_minus: C64,
    pub case: AndoCase,
}

impl BlockSpectrum {
    /// `p(λ) = λ⁴ − aλ³ + bλ² − aλ + 1`.
    pub fn char_poly(&self, z: C64) -> C64 {
        let (a, b) = (self.a, self.b);
        (((z - a) * z + b) * z - a) * z + 1.0
    }

    /// All four eigenvalues `κ_±, 1/κ_±` (with conjugates where elliptic).
    pub fn eigenvalues(&self) -> [C64; 4] {
        [self.kappa_plus, self.kappa_plus.inv(), self.kappa_minus, self.kappa_minus.inv()]
    }
}

/// `e = E − 2cos η`, `f = 2t sin η`.
fn ef(energy: f64, t: f64, eta: f64) -> (f64, f64) {
    (energy - 2.0 * eta.cos(), 2.0 * t * eta.sin())
}

/// The explicit real 4×4 block `S_η`.
pub fn s_eta(energy: f64, t: f64, eta: f64) -> DMatrix<f64> {
    let (e, f) = ef(energy, t, eta);
    let d = 1.0 + t * t;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            (e - f * t) / d,
            (-e * t - f) / d,
            -1.0,
            t,
            (e * t - f) / d,
            (e + f * t) / d,
            -t,
            -1.0,
            1.0 / d,
            -t / d,
            0.0,
            0.0,
            t / d,
            1.0 / d,
            0.0,
            0.0,
        ],
    )
}

/// `‖diag(q₂,q₂)⁻¹ S_{−η} diag(q₂,q₂) − S_η‖_max`.
pub fn similarity_residual(energy: f64, t: f64, eta: f64) -> f64 {
    let q2 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let mut d = DMatrix::zeros(4, 4);
    d.view_mut((0, 0), (2, 2)).copy_from(&q2);
    d.view_mut((2, 2), (2, 2)).copy_from(&q2);
    let lhs = d.transpose() * s_eta(energy, t, -eta) * &d;
    (lhs - s_eta(energy, t, eta)).abs().max()
}

/// The closed form of `b` as printed in the literature; kept only to report
/// its disagreement with the trace formula.
pub fn printed_b(energy: f64, t: f64, eta: f64) -> f64 {
    let (e, f) = ef(energy, t, eta);
    let d = 1.0 + t * t;
    (e * e * t * t - f * f + 2.0 - 2.0 * t.powi(4)) / (d * d)
}

/// Root of `κ² − νκ + 1` with `Im κ ≥ 0`, or `|κ| ≥ 1` when real.
fn kappa_of_nu(nu: C64) -> C64 {
    let s = (nu * nu * 0.25 - 1.0).sqrt();
    let (k1, k2) = (nu * 0.5 + s, nu * 0.5 - s);
    let scale = 1e-12 * (1.0 + nu.norm());
    if k1.im.abs() > scale || k2.im.abs() > scale {
        if k1.im >= k2.im {
            k1
        } else {
            k2
        }
    } else if k1.norm() >= k2.norm() {
        c(k1.re, 0.0)
    } else {
        c(k2.re, 0.0)
    }
}

pub fn ando_block_spectrum(energy: f64, t: f64, eta: f64, case_tol: f64) -> Result<BlockSpectrum> {
    let s = s_eta(energy, t, eta);
    let a = s.trace();
    let b = 0.5 * (a * a - (&s * &s).trace());
    let disc = 0.25 * a * a + 2.0 - b;
    let degenerate = |detail: String| Err(RppError::DegenerateBlock { frequency: None, detail });
    if disc.abs() <= case_tol {
        return degenerate(format!("colliding eigenvalue pairs (discriminant {disc:.3e})"));
    }
    let (nu_plus, nu_minus, case) = if disc < 0.0 {
        let r = (-disc).sqrt();
        (c(0.5 * a, r), c(0.5 * a, -r), AndoCase::G1)
    } else {
        let r = disc.sqrt();
        let (np, nm) = (0.5 * a + r, 0.5 * a - r);
        for nu in [np, nm] {
            if (nu.abs() - 2.0).abs() <= case_tol {
                return degenerate(format!("eigenvalue at ±1 (ν = {nu:.12})"));
            }
        }
        let elliptic = [np, nm].iter().filter(|n| n.abs() < 2.0).count();
        let case = match elliptic {
            2 => AndoCase::G2,
            1 => AndoCase::G3,
            _ => AndoCase::G4,
        };
        (cr(np), cr(nm), case)
    };
    Ok(BlockSpectrum {
        a,
        b,
        nu_plus,
        nu_minus,
        kappa_plus: kappa_of_nu(nu_plus),
        kappa_minus: kappa_of_nu(nu_minus),
        case,
    })
}

/// Checker-board sum: the 2×2 blocks of `x` on the even block positions and
/// those of `y` on the odd ones of the 8×8 result.
pub fn checkerboard(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let mut z = ComplexMatrix::zeros(8, 8);
    for i in 0..2 {
        for j in 0..2 {
            z.view_mut((4 * i, 4 * j), (2, 2)).copy_from(&x.view((2 * i, 2 * j), (2, 2)));
            z.view_mut((4 * i + 2, 4 * j + 2), (2, 2)).copy_from(&y.view((2 * i, 2 * j), (2, 2)));
        }
    }
    z
}

/// The unitary `A = diag(a, a)` with `a = 2^{−1/2} [[−i, 1], [i, 1]] ⊗ 1₂`.
pub fn checkerboard_unitary() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    let a2 = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, -s), cr(s), c(0.0, s), cr(s)]);
    let a = kron(&a2, &ComplexMatrix::identity(2, 2));
    let z = ComplexMatrix::zeros(4, 4);
    block2(&a, &z, &z, &a)
}

/// `A* (S_η ⊕̃ S_{−η}) A`, the quaternion pair block of frequency `−η`.
pub fn ando_pair_block(energy: f64, t: f64, eta: f64) -> ComplexMatrix {
    let x = s_eta(energy, t, eta).map(cr);
    let y = s_eta(energy, t, -eta).map(cr);
    let a = checkerboard_unitary();
    a.adjoint() * checkerboard(&x, &y) * a
}

/// Structure map `θx = I x̄`.
fn theta(x: &ComplexMatrix) -> ComplexMatrix {
    let i = i_form(x.nrows()).expect("even size");
    i * x.map(|z| z.conj())
}

fn krein(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let j = j_form(a.nrows() / 2);
    (a.adjoint() * j * b)[(0, 0)] * c(0.0, -1.0)
}

/// Two right singular vectors of `a` with the smallest singular values.
fn null2(a: &ComplexMatrix, frequency: usize) -> Result<ComplexMatrix> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let sv = &svd.singular_values;
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&p, &q| sv[p].total_cmp(&sv[q]));
    let scale = sv.max().max(1.0);
    if sv[idx[1]] > 1e-6 * scale || sv[idx[2]] < 1e-8 * scale {
        return Err(RppError::DegenerateBlock {
            frequency: (frequency > 0).then_some(frequency),
            detail: format!(
                "eigenspace is not two-dimensional (singular values {:.3e}, {:.3e}, {:.3e})",
                sv[idx[0]],
                sv[idx[1]],
                sv[idx[2]]
            ),
        });
    }
    let mut out = ComplexMatrix::zeros(n, 2);
    for (k, &r) in idx[..2].iter().enumerate() {
        for j in 0..n {
            out[(j, k)] = vt[(r, j)].conj();
        }
    }
    Ok(out)
}

fn pairing_error(frequency: usize, value: f64) -> RppError {
    RppError::DegenerateBlock {
        frequency: (frequency > 0).then_some(frequency),
        detail: format!("isotropic normalization pairing vanishes ({value:.3e})"),
    }
}

/// One channel of a pair block: its `X`, `Y` columns and the diagonal of `R`.
struct PairChannel {
    kind: ChannelKind,
    kappa: C64,
    x: ComplexMatrix,
    y: ComplexMatrix,
    /// `R` restricted to the channel, 4×4 in `(top, bottom)` layout.
    r: ComplexMatrix,
}

fn elliptic_channel(blk: &ComplexMatrix, kappa: C64, frequency: usize) -> Result<PairChannel> {
    let n = blk.nrows();
    let id = ComplexMatrix::identity(n, n);
    let gram = |v: &ComplexMatrix| {
        let h = ComplexMatrix::from_fn(2, 2, |i, j| krein(&v.columns(i, 1).into_owned(), &v.columns(j, 1).into_owned()));
        let h = (&h + h.adjoint()) * cr(0.5);
        h.symmetric_eigen()
    };
    let mut k = kappa;
    let mut v = null2(&(blk - &id * k), frequency)?;
    let mut eig = gram(&v);
    if eig.eigenvalues.iter().all(|&w| w < 0.0) {
        k = k.conj();
        v = null2(&(blk - &id * k), frequency)?;
        eig = gram(&v);
    }
    let wmin = eig.eigenvalues.min();
    if wmin <= 1e-10 {
        return Err(pairing_error(frequency, wmin));
    }
    let mut z = &v * &eig.eigenvectors;
    for j in 0..2 {
        let s = (2.0 / eig.eigenvalues[j]).sqrt();
        z.column_mut(j).scale_mut(s);
    }
    let z1 = z.columns(0, 1).into_owned();
    let zp = -theta(&z.columns(1, 1).into_owned());
    let x1 = (&z1 - &zp) * c(0.0, -0.5);
    let y1 = (&z1 + &zp) * cr(0.5);
    let x = stack2(&x1, &theta(&x1));
    let y = stack2(&y1, &theta(&y1));
    let q0 = ComplexMatrix::identity(2, 2);
    let r = block2(&(&q0 * cr(k.re)), &(&q0 * cr(-k.im)), &(&q0 * cr(k.im)), &(&q0 * cr(k.re)));
    Ok(PairChannel { kind: ChannelKind::Elliptic, kappa: k, x, y, r })
}

fn stack2(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

/// Hyperbolic channels from `E_κ` and `E_{1/κ̄}`; one channel for real `κ`,
/// two for the complex quadruple.
fn hyperbolic_channels(blk: &ComplexMatrix, kappa: C64, frequency: usize) -> Result<Vec<PairChannel>> {
    let n = blk.nrows();
    let id = ComplexMatrix::identity(n, n);
    let complex = kappa.im.abs() > 1e-9 * kappa.norm();
    let nc = if complex { 2 } else { 1 };
    let v = null2(&(blk - &id * kappa), frequency)?;
    let w = null2(&(blk - &id * kappa.conj().inv()), frequency)?;
    let mut x = ComplexMatrix::zeros(n, 2 * nc);
    let mut y = ComplexMatrix::zeros(n, 2 * nc);
    for i in 0..nc {
        let vi = v.columns(i, 1).into_owned();
        let wi = w.columns(i, 1).into_owned();
        x.columns_mut(2 * i, 2).copy_from(&stack2(&vi, &theta(&vi)));
        y.columns_mut(2 * i, 2).copy_from(&stack2(&wi, &theta(&wi)));
    }
    let j = j_form(n / 2);
    let pairing = x.adjoint() * j * &y;
    let det = pairing.determinant().norm();
    if det < 1e-10 {
        return Err(pairing_error(frequency, det));
    }
    let inv = pairing.try_inverse().ok_or_else(|| pairing_error(frequency, det))?;
    let y = -(y * inv);
    let (top, bot) = if complex {
        ([kappa, kappa.conj()], [kappa.conj().inv(), kappa.inv()])
    } else {
        ([kappa, kappa], [kappa.inv(), kappa.inv()])
    };
    let r = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![top[0], top[1], bot[0], bot[1]]));
    Ok((0..nc)
        .map(|i| PairChannel {
            kind: ChannelKind::Hyperbolic,
            kappa,
            x: x.columns(2 * i, 2).into_owned(),
            y: y.columns(2 * i, 2).into_owned(),
            r: r.clone(),
        })
        .collect())
}

/// Normal form of one pair block.
#[derive(Debug, Clone)]
pub struct PairBasis {
    pub spectrum: BlockSpectrum,
    /// `Ñ_η`, columns `[X₁, X₂, Y₁, Y₂]` in 2-column quaternion units.
    pub n: ComplexMatrix,
    /// `D̃_η = Ñ⁻¹ T Ñ`.
    pub d: ComplexMatrix,
    /// Kind and eigenvalue of each channel, hyperbolic first.
    pub channels: [(ChannelKind, C64); 2],
}

fn basis_of_block(blk: &ComplexMatrix, spec: &BlockSpectrum, frequency: usize) -> Result<PairBasis> {
    let mut chans: Vec<PairChannel> = Vec::with_capacity(2);
    match spec.case {
        AndoCase::G1 => {
            let k = if spec.kappa_plus.norm() > 1.0 { spec.kappa_plus } else { spec.kappa_minus };
            let k = if k.norm() > 1.0 { k } else { k.inv() };
            chans.extend(hyperbolic_channels(blk, k, frequency)?);
        }
        _ => {
            let mut ks = [spec.kappa_plus, spec.kappa_minus];
            ks.sort_by(|a, b| {
                let ha = (a.norm() - 1.0).abs() > 1e-12;
                let hb = (b.norm() - 1.0).abs() > 1e-12;
                hb.cmp(&ha).then(b.norm().total_cmp(&a.norm()))
            });
            for k in ks {
                if k.im.abs() > 0.0 && (k.norm() - 1.0).abs() < 1e-9 {
                    chans.push(elliptic_channel(blk, k, frequency)?);
                } else {
                    chans.extend(hyperbolic_channels(blk, k, frequency)?);
                }
            }
        }
    }
    debug_assert_eq!(chans.len(), 2);
    let mut n = ComplexMatrix::zeros(8, 8);
    let mut d = ComplexMatrix::zeros(8, 8);
    for (i, ch) in chans.iter().enumerate() {
        n.columns_mut(2 * i, 2).copy_from(&ch.x);
        n.columns_mut(4 + 2 * i, 2).copy_from(&ch.y);
        let pos = [2 * i, 4 + 2 * i];
        for (bi, &ri) in pos.iter().enumerate() {
            for (bj, &rj) in pos.iter().enumerate() {
                d.view_mut((ri, rj), (2, 2)).copy_from(&ch.r.view((2 * bi, 2 * bj), (2, 2)));
            }
        }
    }
    let residual = max_abs_diff(&(blk * &n), &(&n * &d)) / max_abs(&n).max(1.0).powi(2);
    if residual > 1e-8 {
        return Err(RppError::DegenerateBlock {
            frequency: (frequency > 0).then_some(frequency),
            detail: format!("pair normal form residual {residual:.3e}"),
        });
    }
    Ok(PairBasis {
        spectrum: *spec,
        n,
        d,
        channels: [(chans[0].kind, chans[0].kappa), (chans[1].kind, chans[1].kappa)],
    })
}

/// `(Ñ_η, D̃_η)` for the pair block [`ando_pair_block`]`(E, t, η)`.
pub fn ando_block_basis(energy: f64, t: f64, eta: f64, case_tol: f64) -> Result<PairBasis> {
    let spec = ando_block_spectrum(energy, t, eta, case_tol)?;
    basis_of_block(&ando_pair_block(energy, t, eta), &spec, 0)
}

/// Eigenvector of `S_η` for eigenvalue `κ`. With `B = 1 + t q₂` the lower
/// half solves the pencil `(κ S₁₁ B + S₁₂ − κ² B) y = 0` and `x = κ B y`.
fn pencil_vector(energy: f64, t: f64, eta: f64, kappa: C64) -> nalgebra::DVector<C64> {
    let s = s_eta(energy, t, eta).map(cr);
    let b = ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(t), cr(-t), cr(1.0)]);
    let s11 = s.view((0, 0), (2, 2)).into_owned();
    let s12 = s.view((0, 2), (2, 2)).into_owned();
    let p = &s11 * &b * kappa + s12 - &b * (kappa * kappa);
    let (r0, r1) = (p.row(0).norm_squared(), p.row(1).norm_squared());
    let row = if r0 >= r1 { 0 } else { 1 };
    let y = nalgebra::DVector::from_vec(vec![-p[(row, 1)], p[(row, 0)]]);
    let x = &b * &y * kappa;
    nalgebra::DVector::from_vec(vec![x[0], x[1], y[0], y[1]])
}

fn bilinear(a: &nalgebra::DVector<C64>, b: &nalgebra::DVector<C64>) -> C64 {
    // aᵀ J b with J = [[0, −1], [1, 0]] on 2+2.
    -(a[0] * b[2] + a[1] * b[3]) + a[2] * b[0] + a[3] * b[1]
}

/// Symplectic eigenbasis `M_η` of the 4×4 block with `M_η⁻¹ S_η M_η = D_η`.
/// Columns are `(top₁, top₂, bottom₁, bottom₂)`; real for G2–G4.
pub fn s_eta_basis(energy: f64, t: f64, eta: f64, case_tol: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let spec = ando_block_spectrum(energy, t, eta, case_tol)?;
    let mut m = ComplexMatrix::zeros(4, 4);
    let mut d = ComplexMatrix::zeros(4, 4);
    let mut place = |slot: usize, top: &nalgebra::DVector<C64>, bot: &nalgebra::DVector<C64>, blk: [C64; 4]| {
        m.set_column(slot, top);
        m.set_column(2 + slot, bot);
        d[(slot, slot)] = blk[0];
        d[(slot, 2 + slot)] = blk[1];
        d[(2 + slot, slot)] = blk[2];
        d[(2 + slot, 2 + slot)] = blk[3];
    };
    match spec.case {
        AndoCase::G1 => {
            let kp = if spec.kappa_plus.norm() > 1.0 { spec.kappa_plus } else { spec.kappa_plus.conj().inv() };
            let km = kp.conj().inv();
            let vp = pencil_vector(energy, t, eta, kp);
            let vm = pencil_vector(energy, t, eta, km);
            let p = bilinear(&vp.map(|z| z.conj()), &vm);
            if p.norm() < 1e-10 {
                return Err(pairing_error(0, p.norm()));
            }
            let vm = vm * (-p.inv());
            let z = C64::new(0.0, 0.0);
            place(0, &vp, &vm, [kp, z, z, km]);
            place(1, &vp.map(|z| z.conj()), &vm.map(|z| z.conj()), [kp.conj(), z, z, km.conj()]);
        }
        _ => {
            for (slot, k) in [spec.kappa_plus, spec.kappa_minus].into_iter().enumerate() {
                let z = C64::new(0.0, 0.0);
                if k.im.abs() > 0.0 {
                    let mut k = k;
                    let mut v = pencil_vector(energy, t, eta, k);
                    let w = |v: &nalgebra::DVector<C64>| v.map(|z| cr(z.re));
                    let wp = |v: &nalgebra::DVector<C64>| v.map(|z| cr(z.im));
                    let mut p = bilinear(&wp(&v), &w(&v)).re;
                    if p > 0.0 {
                        v = v.map(|z| z.conj());
                        k = k.conj();
                        p = -p;
                    }
                    if p.abs() < 1e-10 {
                        return Err(pairing_error(0, p.abs()));
                    }
                    let s = 1.0 / p.abs().sqrt();
                    let top = wp(&v) * cr(s);
                    let bot = w(&v) * cr(s);
                    place(slot, &top, &bot, [cr(k.re), cr(-k.im), cr(k.im), cr(k.re)]);
                } else {
                    let v = pencil_vector(energy, t, eta, k).map(|z| cr(z.re));
                    let vi = pencil_vector(energy, t, eta, k.inv()).map(|z| cr(z.re));
                    let p = bilinear(&v, &vi);
                    if p.norm() < 1e-10 {
                        return Err(pairing_error(0, p.norm()));
                    }
                    let vi = vi * (-p.inv());
                    place(slot, &v, &vi, [k, z, z, k.inv()]);
                }
            }
        }
    }
    Ok((m, d))
}

/// The site-basis free transfer matrix `S̃₀` (index `2·site + spin`).
pub fn ando_free_transfer(l: usize, energy: f64, t: f64) -> ComplexMatrix {
    let [q0, _, q2, q3] = quaternion_units();
    let s = shift(l);
    let id_l = ComplexMatrix::identity(l, l);
    let one_tq2 = &q0 + &q2 * cr(t);
    let inv = one_tq2.clone().try_inverse().expect("1 + t q2 is invertible");
    let kin = kron(&(&s + s.transpose()), &q0) + kron(&(&s - s.transpose()), &q3) * cr(t);
    let id2l = ComplexMatrix::identity(2 * l, 2 * l);
    let a = (id2l * cr(energy) - kin) * kron(&id_l, &inv);
    block2(
        &a,
        &(-kron(&id_l, &one_tq2.adjoint())),
        &kron(&id_l, &inv),
        &ComplexMatrix::zeros(2 * l, 2 * l),
    )
}

/// `M̂ = 1₂ ⊗ m̂ ⊗ q₀`.
pub fn ando_transverse_basis(l: usize) -> ComplexMatrix {
    let mh = real_fourier(l).map(cr);
    kron(&ComplexMatrix::identity(2, 2), &kron(&mh, &ComplexMatrix::identity(2, 2)))
}

/// Normal form of a fundamental (spin-degenerate) slot with `η ∈ {0, π}`.
fn fundamental(energy: f64, t: f64, eta: f64, label: usize, tol: f64) -> Result<(ComplexMatrix, ComplexMatrix, Channel)> {
    let e = energy - 2.0 * eta.cos();
    let r = 1.0 / (1.0 + t * t).sqrt();
    let mu = e * r;
    if (mu.abs() - 2.0).abs() <= tol {
        return Err(RppError::InternalBandEdge { l: label, mu_abs: mu.abs() });
    }
    let rho = rho_of_mu(mu);
    let kind = if mu.abs() < 2.0 { ChannelKind::Elliptic } else { ChannelKind::Hyperbolic };
    let (n_tube, r_k) = match kind {
        ChannelKind::Elliptic => {
            let h = 1.0 / rho.im.sqrt();
            (
                [cr(h), cr(0.0), cr(h * rho.re), cr(h * rho.im)],
                [cr(rho.re), cr(-rho.im), cr(rho.im), cr(rho.re)],
            )
        }
        ChannelKind::Hyperbolic => {
            let dd = rho - rho.inv();
            let sigma = dd.re.signum();
            let h = 1.0 / dd.norm().sqrt();
            (
                [cr(h), cr(sigma * h), rho.inv() * h, rho * (sigma * h)],
                [rho, cr(0.0), cr(0.0), rho.inv()],
            )
        }
    };
    let sr = r.sqrt();
    let nk = ComplexMatrix::from_row_slice(2, 2, &[n_tube[0] / sr, n_tube[1] / sr, n_tube[2] * sr, n_tube[3] * sr]);
    let rk = ComplexMatrix::from_row_slice(2, 2, &r_k);
    let [q0, _, q2, _] = quaternion_units();
    let u = &q0 * cr(r) - &q2 * cr(t * r);
    let ch = Channel { label, mu: None, rho, kind };
    Ok((kron(&nk, &q0), kron(&rk, &u), ch))
}

fn place_block(target: &mut ComplexMatrix, idx: &[usize], block: &ComplexMatrix) {
    for (i, &gi) in idx.iter().enumerate() {
        for (j, &gj) in idx.iter().enumerate() {
            target[(gi, gj)] = block[(i, j)];
        }
    }
}

fn with_frequency(err: RppError, l: usize) -> RppError {
    match err {
        RppError::DegenerateBlock { detail, .. } => RppError::DegenerateBlock { frequency: Some(l), detail },
        other => other,
    }
}

/// Case of every pair frequency `l = 1..⌊(L−1)/2⌋`.
pub fn ando_cases(params: &ModelParams) -> Result<Vec<(usize, AndoCase)>> {
    let l = params.l;
    (1..=(l - 1) / 2)
        .map(|k| {
            let eta = -2.0 * PI * k as f64 / l as f64;
            ando_block_spectrum(params.energy, params.t, eta, params.case_tol)
                .map(|s| (k, s.case))
                .map_err(|e| with_frequency(e, k))
        })
        .collect()
}

pub fn build_normal_form_ando(params: &ModelParams) -> Result<NormalFormBundle> {
    params.validate()?;
    if params.model != ModelKind::Ando {
        return Err(RppError::InvalidArgument(format!(
            "spin-orbit builder called for model {}",
            params.model.name()
        )));
    }
    if params.flux() != 0.0 {
        return Err(RppError::InvalidArgument("the spin-orbit model has zero flux".into()));
    }
    if params.t == 0.0 {
        return Err(RppError::InvalidArgument(
            "t = 0 decouples the spin; use the anderson-real model".into(),
        ));
    }
    let (l, energy, t) = (params.l, params.energy, params.t);
    let dim = 4 * l;
    let mut n_full = ComplexMatrix::zeros(dim, dim);
    let mut r_full = ComplexMatrix::zeros(dim, dim);
    // (slot, channel) in Fourier slot order.
    let mut slots: Vec<(usize, Channel)> = Vec::with_capacity(l);
    let slot_idx = |c: usize| [2 * c, 2 * c + 1, 2 * l + 2 * c, 2 * l + 2 * c + 1];
    for k in 1..=(l - 1) / 2 {
        let eta = -2.0 * PI * k as f64 / l as f64;
        let (c1, c2) = (k - 1, l - k - 1);
        let pb = ando_block_spectrum(energy, t, eta, params.case_tol)
            .and_then(|s| basis_of_block(&ando_pair_block(energy, t, eta), &s, k))
            .map_err(|e| with_frequency(e, k))?;
        let idx = [2 * c1, 2 * c1 + 1, 2 * c2, 2 * c2 + 1, 2 * l + 2 * c1, 2 * l + 2 * c1 + 1, 2 * l + 2 * c2, 2 * l + 2 * c2 + 1];
        place_block(&mut n_full, &idx, &pb.n);
        place_block(&mut r_full, &idx, &pb.d);
        for (slot, (kind, kappa)) in [c1, c2].into_iter().zip(pb.channels) {
            slots.push((slot, Channel { label: k, mu: None, rho: kappa, kind }));
        }
    }
    let mut fundamentals = vec![(l - 1, 0.0, l)];
    if l % 2 == 0 {
        fundamentals.push((l / 2 - 1, PI, l / 2));
    }
    for (slot, eta, label) in fundamentals {
        let (nb, rb, ch) = fundamental(energy, t, eta, label, params.parabolic_tol)?;
        let idx = slot_idx(slot);
        place_block(&mut n_full, &idx, &nb);
        place_block(&mut r_full, &idx, &rb);
        slots.push((slot, ch));
    }
    slots.sort_by_key(|(s, _)| *s);
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&slots[a].1, &slots[b].1);
        ca.is_elliptic()
            .cmp(&cb.is_elliptic())
            .then(if ca.is_elliptic() { std::cmp::Ordering::Equal } else { cb.rho.norm().total_cmp(&ca.rho.norm()) })
    });
    let perm: Vec<usize> = order.iter().map(|&i| slots[i].0).collect();
    let channels = ChannelData { channels: order.iter().map(|&i| slots[i].1.clone()).collect(), perm: perm.clone() };
    let mut qs = ComplexMatrix::zeros(l, l);
    for (p, &src) in perm.iter().enumerate() {
        qs[(src, p)] = cr(1.0);
    }
    let q_half = kron(&qs, &ComplexMatrix::identity(2, 2));
    let z = ComplexMatrix::zeros(2 * l, 2 * l);
    let q = block2(&q_half, &z, &z, &q_half);
    let qt = q.transpose();
    let n = &qt * n_full * &q;
    let r = &qt * r_full * &q;
    NormalFormBundle::assemble(
        params.clone(),
        ando_transverse_basis(l),
        q,
        n,
        r,
        channels,
        ando_free_transfer(l, energy, t),
        1.0 / (1.0 + t * t),
        2,
        None,
    )
}
