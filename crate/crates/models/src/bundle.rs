use rand::Rng;
use symplectic_core::linalg::{block2, hs_inverse};
use symplectic_core::{
    cr, exp_lie, is_hermitian_symplectic, max_abs, max_abs_diff, ComplexMatrix, Result, RppError, Scalar,
    SymmetryClass,
};

use crate::channels::ChannelData;
use crate::kernel::{Kernel, KernelSpec};
use crate::params::ModelParams;

/// Normal form `N⁻¹Q⁻¹M⁻¹ S MQN = R e^{λP}` of one model at one energy.
#[derive(Debug, Clone)]
pub struct NormalFormBundle {
    pub params: ModelParams,
    pub class: SymmetryClass,
    /// Transverse basis change (Fourier, real Fourier or spin Fourier).
    pub m: ComplexMatrix,
    /// Channel ordering permutation `diag(q, q)`.
    pub q: ComplexMatrix,
    /// Diagonalizing basis change.
    pub n: ComplexMatrix,
    /// Free normal form `R = R_h R_e`.
    pub r: ComplexMatrix,
    pub channels: ChannelData,
    /// Transfer matrix at `λ = 0` in the site basis.
    pub free_transfer: ComplexMatrix,
    /// Prefactor of the potential in the lower-left block (1, or `(1+t²)⁻¹`).
    pub coupling: f64,
    /// Complex rows per site (2 with spin).
    pub spin: usize,
    basis: ComplexMatrix,
    basis_inv: ComplexMatrix,
    kernel: KernelSpec,
}

/// A sampled disorder slice together with its generator `P`.
#[derive(Debug, Clone)]
pub struct PerturbationGenerator {
    pub w: Vec<f64>,
    pub p: ComplexMatrix,
}

impl NormalFormBundle {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        params: ModelParams,
        m: ComplexMatrix,
        q: ComplexMatrix,
        n: ComplexMatrix,
        r: ComplexMatrix,
        channels: ChannelData,
        free_transfer: ComplexMatrix,
        coupling: f64,
        spin: usize,
        kernel: Option<KernelSpec>,
    ) -> Result<Self> {
        let class = params.class();
        let basis = &m * &q * &n;
        let basis_inv = hs_inverse(&basis);
        let kernel = kernel.unwrap_or_else(|| KernelSpec::Dense {
            b: basis.clone(),
            k: &basis_inv * &free_transfer,
            spin,
        });
        let bundle = NormalFormBundle {
            params,
            class,
            m,
            q,
            n,
            r,
            channels,
            free_transfer,
            coupling,
            spin,
            basis,
            basis_inv,
            kernel,
        };
        bundle.check_membership()?;
        Ok(bundle)
    }

    fn check_membership(&self) -> Result<()> {
        for (name, mat) in [("M", &self.m), ("Q", &self.q), ("N", &self.n), ("R", &self.r)] {
            let tol = 1e-10 * max_abs(mat).max(1.0).powi(2);
            if !is_hermitian_symplectic(mat, self.class, tol)? {
                return Err(RppError::InvariantViolation(format!(
                    "normal-form factor {name} is not in HS of class {}",
                    self.class
                )));
            }
        }
        Ok(())
    }

    /// Complex size of one half (`L` or `2L`).
    pub fn ambient(&self) -> usize {
        self.r.nrows() / 2
    }

    pub fn l(&self) -> usize {
        self.channels.len()
    }

    /// Disorder values per slice.
    pub fn sites(&self) -> usize {
        self.ambient() / self.spin
    }

    /// `MQN`, mapping normal-form coordinates to the site basis.
    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn basis_inv(&self) -> &ComplexMatrix {
        &self.basis_inv
    }

    pub fn kernel_spec(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn kernel<T: Scalar>(&self) -> Result<Kernel<T>> {
        self.kernel.to_kernel(self.coupling)
    }

    fn potential_block(&self, w: &[f64]) -> Result<ComplexMatrix> {
        if w.len() != self.sites() {
            return Err(RppError::dims("disorder slice", self.sites(), w.len()));
        }
        let n = self.ambient();
        let mut lower = ComplexMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            lower[(n + r, r)] = cr(self.coupling * w[r / self.spin]);
        }
        Ok(lower)
    }

    /// Site-basis transfer matrix `S₀ (1 0; λc w 1)`.
    pub fn transfer(&self, w: &[f64]) -> Result<ComplexMatrix> {
        let mut low = self.potential_block(w)? * cr(self.params.lambda);
        let n = 2 * self.ambient();
        low += ComplexMatrix::identity(n, n);
        Ok(&self.free_transfer * low)
    }

    /// `P = (MQN)⁻¹ (0 0; c w 0) MQN`.
    pub fn perturbation(&self, w: &[f64]) -> Result<ComplexMatrix> {
        Ok(&self.basis_inv * self.potential_block(w)? * &self.basis)
    }

    pub fn sample_disorder<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut w = vec![0.0; self.sites()];
        self.params.disorder.fill(&mut w, rng);
        w
    }

    pub fn sample_perturbation<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PerturbationGenerator> {
        let w = self.sample_disorder(rng);
        let p = self.perturbation(&w)?;
        Ok(PerturbationGenerator { w, p })
    }

    /// `R e^{λP(w)}`.
    pub fn normal_transfer(&self, w: &[f64]) -> Result<ComplexMatrix> {
        let p = self.perturbation(w)?;
        let (e, _) = exp_lie(&p, self.params.lambda);
        Ok(&self.r * e)
    }

    /// `‖(MQN)⁻¹ S (MQN) − R e^{λP}‖_max`, relative to the size of `S`.
    pub fn reconstruction_residual(&self, w: &[f64]) -> Result<f64> {
        let s = self.transfer(w)?;
        let lhs = &self.basis_inv * &s * &self.basis;
        let rhs = self.normal_transfer(w)?;
        Ok(max_abs_diff(&lhs, &rhs) / max_abs(&s).max(1.0))
    }

    /// Frame-coordinate projection onto elliptic (`true`) or hyperbolic
    /// channels, as a 0/1 mask over the `n` complex columns.
    pub fn channel_mask(&self, elliptic: bool) -> Vec<bool> {
        let b = self.class.block();
        self.channels
            .channels
            .iter()
            .flat_map(|ch| std::iter::repeat(ch.is_elliptic() == elliptic).take(b))
            .collect()
    }

    /// `Π = diag(π, π)` for elliptic or hyperbolic channels.
    pub fn projection(&self, elliptic: bool) -> ComplexMatrix {
        let mask = self.channel_mask(elliptic);
        let n = mask.len();
        let mut p = ComplexMatrix::zeros(2 * n, 2 * n);
        for (i, &on) in mask.iter().enumerate() {
            if on {
                p[(i, i)] = cr(1.0);
                p[(n + i, n + i)] = cr(1.0);
            }
        }
        p
    }

    /// `R_h = Π_h R Π_h + Π_e`.
    pub fn r_h(&self) -> ComplexMatrix {
        let ph = self.projection(false);
        &ph * &self.r * &ph + self.projection(true)
    }

    /// `R_e = Π_e R Π_e + Π_h`.
    pub fn r_e(&self) -> ComplexMatrix {
        let pe = self.projection(true);
        &pe * &self.r * &pe + self.projection(false)
    }

    /// Potential in the transverse basis, `m* w m` (top-left block of `M`).
    pub fn transverse_potential(&self, w: &[f64]) -> Result<ComplexMatrix> {
        let low = self.potential_block(w)?;
        let n = self.ambient();
        let d = low.view((n, 0), (n, n)).into_owned();
        let mm = self.m.view((0, 0), (n, n)).into_owned();
        Ok(mm.adjoint() * d * mm * cr(1.0 / self.coupling))
    }

    /// `R` written as `[[A, B], [C, D]]` blocks.
    pub fn r_blocks(&self) -> [ComplexMatrix; 4] {
        let n = self.ambient();
        let v = |r, c| self.r.view((r, c), (n, n)).into_owned();
        [v(0, 0), v(0, n), v(n, 0), v(n, n)]
    }
}

/// `diag(x, x)`.
pub(crate) fn diag2(x: &ComplexMatrix) -> ComplexMatrix {
    let z = ComplexMatrix::zeros(x.nrows(), x.ncols());
    block2(x, &z, &z, x)
}
