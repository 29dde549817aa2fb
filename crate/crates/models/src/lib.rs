//! Transfer matrices of the disordered tube, slab and spin-orbit models and
//! their hermitian-symplectic normal forms `N⁻¹Q⁻¹M⁻¹ S MQN = R e^{λP}`.

pub mod ando;
pub mod bundle;
pub mod channels;
pub mod fixture;
pub mod fourier;
pub mod kernel;
pub mod params;
pub mod tube;

pub use ando::{
    ando_block_basis, ando_block_spectrum, ando_cases, ando_free_transfer, ando_pair_block, build_normal_form_ando,
    s_eta, s_eta_basis, similarity_residual, AndoCase, BlockSpectrum, PairBasis,
};
pub use bundle::{NormalFormBundle, PerturbationGenerator};
pub use channels::{classify_tube, rho_of_mu, Channel, ChannelData, ChannelKind};
pub use fixture::{read_fixture, write_fixture, Fixture};
pub use kernel::{Kernel, KernelSpec, Workspace};
pub use params::{Disorder, ModelKind, ModelParams, DEFAULT_CASE_TOL, DEFAULT_PARABOLIC_TOL, MAX_SLAB_CHANNELS};
pub use tube::{build_normal_form_magnetic, build_normal_form_real, build_normal_form_slab, slab_laplacian, slab_mu, tube_laplacian, tube_mu};

use symplectic_core::{cr, ComplexMatrix, Result, RppError};

/// Normal form for any of the four models.
pub fn build_normal_form(params: &ModelParams) -> Result<NormalFormBundle> {
    match params.model {
        ModelKind::AndersonMagnetic => build_normal_form_magnetic(params),
        ModelKind::AndersonReal => build_normal_form_real(params),
        ModelKind::Ando => build_normal_form_ando(params),
        ModelKind::Slab { .. } => build_normal_form_slab(params),
    }
}

/// Site-basis transfer matrix `S(w)` of one slice, built directly from the
/// Hamiltonian (valid at band edges too).
pub fn transfer_matrix(params: &ModelParams, w: &[f64]) -> Result<ComplexMatrix> {
    params.validate()?;
    if w.len() != params.sites() {
        return Err(RppError::dims("disorder slice", params.sites(), w.len()));
    }
    let (free, coupling, spin) = match params.model {
        ModelKind::AndersonMagnetic | ModelKind::AndersonReal => (
            tube::free_tube_transfer(params.energy, &tube_laplacian(params.l, params.flux())),
            1.0,
            1,
        ),
        ModelKind::Slab { n, .. } => {
            (tube::free_tube_transfer(params.energy, &slab_laplacian(n, &params.phi)), 1.0, 1)
        }
        ModelKind::Ando => (ando_free_transfer(params.l, params.energy, params.t), 1.0 / (1.0 + params.t * params.t), 2),
    };
    let dim = free.nrows();
    let half = dim / 2;
    let mut low = ComplexMatrix::identity(dim, dim);
    for r in 0..half {
        low[(half + r, r)] = cr(params.lambda * coupling * w[r / spin]);
    }
    Ok(free * low)
}
