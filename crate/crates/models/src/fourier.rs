//! Transverse Fourier bases and shift operators.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use symplectic_core::{c, ComplexMatrix};

/// Cyclic shift `(S ψ)_k = ψ_{k+1}`.
pub fn shift(l: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(l, l);
    for k in 0..l {
        s[(k, (k + 1) % l)] = c(1.0, 0.0);
    }
    s
}

/// Discrete Fourier transform `m` with columns `f_l`, `f_{l,k} = e^{2πi lk/L}/√L`
/// for `l, k = 1..L`; `m* S m = diag(e^{2πi l/L})`.
pub fn dft(l: usize) -> ComplexMatrix {
    let norm = 1.0 / (l as f64).sqrt();
    ComplexMatrix::from_fn(l, l, |k, j| {
        let arg = 2.0 * PI * ((j + 1) * (k + 1)) as f64 / l as f64;
        c(norm * arg.cos(), norm * arg.sin())
    })
}

/// Real orthogonal Fourier basis of sines and cosines. Column `c` (0-based)
/// is an eigenvector of `S + S*` with eigenvalue `2cos(2π(c+1)/L)`.
pub fn real_fourier(l: usize) -> DMatrix<f64> {
    let lf = l as f64;
    let mut m = DMatrix::<f64>::zeros(l, l);
    let s2 = (2.0 / lf).sqrt();
    for j in 1..=(l - 1) / 2 {
        for k in 1..=l {
            let arg = 2.0 * PI * (j * k) as f64 / lf;
            m[(k - 1, j - 1)] = s2 * arg.sin();
            m[(k - 1, l - j - 1)] = s2 * arg.cos();
        }
    }
    for k in 0..l {
        m[(k, l - 1)] = 1.0 / lf.sqrt();
    }
    if l % 2 == 0 {
        for k in 1..=l {
            m[(k - 1, l / 2 - 1)] = if k % 2 == 0 { 1.0 } else { -1.0 } / lf.sqrt();
        }
    }
    m
}

/// Transverse frequency `2π(c+1)/L` of column `c` of [`dft`] and [`real_fourier`].
pub fn frequency(col: usize, l: usize) -> f64 {
    2.0 * PI * (col + 1) as f64 / l as f64
}

/// Frequency multi-index of column `col` of the slab basis `m_2 ⊗ … ⊗ m_d`
/// (first factor most significant).
pub fn slab_index(col: usize, n: usize, dirs: usize) -> Vec<usize> {
    let mut idx = vec![0; dirs];
    let mut rest = col;
    for j in (0..dirs).rev() {
        idx[j] = rest % n;
        rest /= n;
    }
    idx
}

/// Kronecker power `m ⊗ … ⊗ m` with `dirs` factors.
pub fn kron_power(m: &ComplexMatrix, dirs: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1, 1);
    for _ in 0..dirs {
        out = out.kronecker(m);
    }
    out
}

/// `1 ⊗ … ⊗ S ⊗ … ⊗ 1` with the shift in direction `j`.
pub fn slab_shift(n: usize, dirs: usize, j: usize) -> ComplexMatrix {
    let s = shift(n);
    let id = ComplexMatrix::identity(n, n);
    let mut out = ComplexMatrix::identity(1, 1);
    for k in 0..dirs {
        out = out.kronecker(if k == j { &s } else { &id });
    }
    out
}
