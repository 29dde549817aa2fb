//! Random-matrix statistics of frame ensembles: eigenphase spacings and
//! densities, entry moduli, `U V*` correlations, block structure, and the
//! polar decomposition of transfer-matrix products.

pub mod ensemble;
pub mod ks;
pub mod spectra;
pub mod structure;
pub mod surmise;

pub use ensemble::{discriminate, Discrimination, RppSample, RppSummary, DISCRIMINATION_GROUPS};
pub use ks::{entry_modulus_cdf, entry_modulus_pdf, ks_sorted, ks_statistic, uniform_phase_cdf};
pub use spectra::{
    block_phases, eigenphase_density, eigenphase_spacings, eigenphases, entry_moduli, restrict, spacings, BlockPhases,
    Histogram, SpacingHistogram, Spacings, SPACING_BINS, SPACING_MAX,
};
pub use structure::{block_norms, block_structure_check, polar_diagnostic, BlockNorms, BlockStructure, PolarDecomposition};
pub use surmise::{surmise, SurmiseCurve};
