//! Modified Gram-Schmidt over scalar columns or quaternion column pairs.
//!
//! Each column (block) is orthogonalized against the finished ones; if its
//! norm drops below `1/√2` of the incoming norm a second pass is made.

use nalgebra::DMatrix;
use symplectic_core::{Result, RppError, Scalar};

const REORTH_RATIO: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SINGULAR_RATIO: f64 = 1e-12;

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x.conj_s() * *y;
    }
    acc
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * *xi;
    }
}

#[inline]
fn norm2<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs2()).sum()
}

fn split_cols<T>(data: &mut [T], m: usize, done: usize) -> (&[T], &mut [T]) {
    let (head, tail) = data.split_at_mut(done * m);
    (head, tail)
}

/// Orthonormalizes the columns of `y` in place and returns the per-channel
/// additive cocycles (`log S_pp`, or `½ log det` of the 2×2 diagonal block).
/// When `s` is given it receives the upper-triangular factor with
/// `y_in = y_out · s`.
pub fn orthonormalize<T: Scalar>(
    y: &mut DMatrix<T>,
    block: usize,
    mut s: Option<&mut DMatrix<T>>,
) -> Result<Vec<f64>> {
    let (m, n) = y.shape();
    if n % block != 0 || !(block == 1 || block == 2) {
        return Err(RppError::dims("Gram-Schmidt block", "1 or 2 dividing the column count", block));
    }
    if let Some(s) = s.as_deref_mut() {
        if s.shape() != (n, n) {
            *s = DMatrix::zeros(n, n);
        } else {
            s.fill(T::zero());
        }
    }
    let data = y.as_mut_slice();
    let channels = n / block;
    let mut logs = Vec::with_capacity(channels);
    for ch in 0..channels {
        let j0 = ch * block;
        let (done, rest) = split_cols(data, m, j0);
        let cur = &mut rest[..block * m];
        let incoming: f64 = norm2(cur);
        if !incoming.is_finite() {
            return Err(RppError::SingularAction { column: ch + 1, step: None });
        }
        let mut before = incoming;
        for pass in 0..2 {
            for i in 0..j0 {
                let qi = &done[i * m..(i + 1) * m];
                for b in 0..block {
                    let col = &mut cur[b * m..(b + 1) * m];
                    let c = dot(qi, col);
                    axpy(c, qi, col);
                    if let Some(s) = s.as_deref_mut() {
                        s[(i, j0 + b)] += c;
                    }
                }
            }
            let after = norm2(cur);
            if pass == 0 && j0 > 0 && after < REORTH_RATIO * REORTH_RATIO * before {
                before = after;
                continue;
            }
            break;
        }
        if block == 1 {
            let r2 = norm2(cur);
            if r2 <= SINGULAR_RATIO * SINGULAR_RATIO * incoming || r2 == 0.0 {
                return Err(RppError::SingularAction { column: ch + 1, step: None });
            }
            let r = r2.sqrt();
            let inv = 1.0 / r;
            for x in cur.iter_mut() {
                *x = x.scale_re(inv);
            }
            if let Some(s) = s.as_deref_mut() {
                s[(j0, j0)] = T::from_real(r);
            }
            logs.push(r.ln());
        } else {
            let (c0, c1) = cur.split_at_mut(m);
            let g00 = norm2(c0);
            let g11 = norm2(c1);
            let g01 = dot(c0, c1);
            let det = g00 * g11 - g01.abs2();
            if det <= (SINGULAR_RATIO * SINGULAR_RATIO * incoming).powi(2) || !det.is_finite() {
                return Err(RppError::SingularAction { column: ch + 1, step: None });
            }
            // Hermitian square root of [[g00, g01], [conj g01, g11]].
            let sd = det.sqrt();
            let tr = g00 + g11 + 2.0 * sd;
            let st = tr.sqrt();
            let r00 = (g00 + sd) / st;
            let r11 = (g11 + sd) / st;
            let r01 = g01.scale_re(1.0 / st);
            // Inverse of the 2×2 Hermitian root; det(R) = sqrt(det G).
            let inv_det = 1.0 / sd;
            let i00 = T::from_real(r11 * inv_det);
            let i11 = T::from_real(r00 * inv_det);
            let i01 = -r01.scale_re(inv_det);
            let i10 = -r01.conj_s().scale_re(inv_det);
            for k in 0..m {
                let a = c0[k];
                let b = c1[k];
                c0[k] = a * i00 + b * i10;
                c1[k] = a * i01 + b * i11;
            }
            if let Some(s) = s.as_deref_mut() {
                s[(j0, j0)] = T::from_real(r00);
                s[(j0, j0 + 1)] = r01;
                s[(j0 + 1, j0)] = r01.conj_s();
                s[(j0 + 1, j0 + 1)] = T::from_real(r11);
            }
            logs.push(0.5 * sd.ln());
        }
    }
    Ok(logs)
}
