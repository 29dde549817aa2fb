//! Fast application of `R e^{λP}` to a frame.
//!
//! With the basis change `B` (site basis → normal form) the step reads
//! `T Φ = K (BΦ + λc (0; D_w (BΦ)_top))` where `K = B⁻¹ S₀` and `D_w` is the
//! on-site potential. For the tube and slab models `B = diag(F, F)·N` with
//! a channel-diagonal `N`, so the step only needs two products with the
//! transverse basis `F`.

use nalgebra::{DMatrix, DVector};
use symplectic_core::linalg::from_complex;
use symplectic_core::{ComplexMatrix, Result, RppError, Scalar, C64};

/// Complex description of the step, convertible to either scalar field.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Channel {
        /// Diagonals of the four blocks of `N`.
        n: [Vec<C64>; 4],
        /// Diagonals of the four blocks of `K = R N⁻¹`.
        k: [Vec<C64>; 4],
        /// Transverse basis `F = m q` (sites × channels).
        f: ComplexMatrix,
    },
    Dense {
        b: ComplexMatrix,
        k: ComplexMatrix,
        spin: usize,
    },
}

#[derive(Debug, Clone)]
pub enum Kernel<T: Scalar> {
    Channel {
        n: [DVector<T>; 4],
        k: [DVector<T>; 4],
        f: DMatrix<T>,
        fa: DMatrix<T>,
        coupling: f64,
    },
    Dense {
        b: DMatrix<T>,
        k: DMatrix<T>,
        coupling: f64,
        spin: usize,
    },
}

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Workspace<T: Scalar> {
    top: DMatrix<T>,
    bot: DMatrix<T>,
    z: DMatrix<T>,
    y: DMatrix<T>,
}

fn convert<T: Scalar>(m: &ComplexMatrix, what: &str) -> Result<DMatrix<T>> {
    let out: DMatrix<T> = from_complex(m);
    let back = symplectic_core::linalg::to_complex(&out);
    let scale = symplectic_core::max_abs(m).max(1.0);
    if symplectic_core::max_abs_diff(&back, m) > 1e-12 * scale {
        return Err(RppError::InvariantViolation(format!(
            "{what} is not representable in the requested scalar field"
        )));
    }
    Ok(out)
}

fn convert_vec<T: Scalar>(v: &[C64], what: &str) -> Result<DVector<T>> {
    let m = ComplexMatrix::from_column_slice(v.len(), 1, v);
    Ok(convert::<T>(&m, what)?.column(0).into_owned())
}

impl KernelSpec {
    pub fn to_kernel<T: Scalar>(&self, coupling: f64) -> Result<Kernel<T>> {
        Ok(match self {
            KernelSpec::Channel { n, k, f } => {
                let nv = [
                    convert_vec(&n[0], "N")?,
                    convert_vec(&n[1], "N")?,
                    convert_vec(&n[2], "N")?,
                    convert_vec(&n[3], "N")?,
                ];
                let kv = [
                    convert_vec(&k[0], "K")?,
                    convert_vec(&k[1], "K")?,
                    convert_vec(&k[2], "K")?,
                    convert_vec(&k[3], "K")?,
                ];
                let fm: DMatrix<T> = convert(f, "transverse basis")?;
                let fa = fm.adjoint();
                Kernel::Channel { n: nv, k: kv, f: fm, fa, coupling }
            }
            KernelSpec::Dense { b, k, spin } => Kernel::Dense {
                b: convert(b, "basis")?,
                k: convert(k, "kernel")?,
                coupling,
                spin: *spin,
            },
        })
    }
}

impl<T: Scalar> Kernel<T> {
    /// Rows of the transfer operator.
    pub fn dim(&self) -> usize {
        match self {
            Kernel::Channel { f, .. } => 2 * f.ncols(),
            Kernel::Dense { b, .. } => b.nrows(),
        }
    }

    /// Number of disorder values consumed per step.
    pub fn sites(&self) -> usize {
        match self {
            Kernel::Channel { f, .. } => f.nrows(),
            Kernel::Dense { b, spin, .. } => b.nrows() / (2 * spin),
        }
    }

    pub fn workspace(&self, cols: usize) -> Workspace<T> {
        let d = self.dim();
        let h = d / 2;
        match self {
            Kernel::Channel { f, .. } => Workspace {
                top: DMatrix::zeros(h, cols),
                bot: DMatrix::zeros(h, cols),
                z: DMatrix::zeros(f.nrows(), cols),
                y: DMatrix::zeros(0, 0),
            },
            Kernel::Dense { .. } => Workspace {
                top: DMatrix::zeros(0, 0),
                bot: DMatrix::zeros(0, 0),
                z: DMatrix::zeros(0, 0),
                y: DMatrix::zeros(d, cols),
            },
        }
    }

    /// `out = R e^{λP(w)} Φ`.
    pub fn apply(&self, phi: &DMatrix<T>, w: &[f64], lambda: f64, out: &mut DMatrix<T>, ws: &mut Workspace<T>) {
        let cols = phi.ncols();
        let h = self.dim() / 2;
        debug_assert_eq!(phi.nrows(), 2 * h);
        debug_assert_eq!(w.len(), self.sites());
        if out.shape() != phi.shape() {
            *out = DMatrix::zeros(phi.nrows(), cols);
        }
        match self {
            Kernel::Channel { n, k, f, fa, coupling } => {
                if ws.top.ncols() != cols {
                    *ws = self.workspace(cols);
                }
                for c in 0..cols {
                    for i in 0..h {
                        let a = phi[(i, c)];
                        let b = phi[(h + i, c)];
                        ws.top[(i, c)] = n[0][i] * a + n[1][i] * b;
                        ws.bot[(i, c)] = n[2][i] * a + n[3][i] * b;
                    }
                }
                if lambda != 0.0 {
                    f.mul_to(&ws.top, &mut ws.z);
                    let s = lambda * coupling;
                    for c in 0..cols {
                        for (r, wr) in w.iter().enumerate() {
                            ws.z[(r, c)] = ws.z[(r, c)].scale_re(s * wr);
                        }
                    }
                    ws.bot.gemm(T::one(), fa, &ws.z, T::one());
                }
                for c in 0..cols {
                    for i in 0..h {
                        let a = ws.top[(i, c)];
                        let b = ws.bot[(i, c)];
                        out[(i, c)] = k[0][i] * a + k[1][i] * b;
                        out[(h + i, c)] = k[2][i] * a + k[3][i] * b;
                    }
                }
            }
            Kernel::Dense { b, k, coupling, spin } => {
                if ws.y.ncols() != cols {
                    *ws = self.workspace(cols);
                }
                b.mul_to(phi, &mut ws.y);
                if lambda != 0.0 {
                    let s = lambda * coupling;
                    for c in 0..cols {
                        for r in 0..h {
                            let v = ws.y[(r, c)].scale_re(s * w[r / spin]);
                            ws.y[(h + r, c)] += v;
                        }
                    }
                }
                k.mul_to(&ws.y, out);
            }
        }
    }
}
