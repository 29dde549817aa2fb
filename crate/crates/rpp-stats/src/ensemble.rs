//! Per-snapshot statistics and their ensemble summary.

use frames::UVPair;
use rayon::prelude::*;
use symplectic_core::{Result, RppError};

use crate::ks::{entry_modulus_cdf, ks_statistic, uniform_phase_cdf};
use crate::spectra::{block_phases, entry_moduli, spacings, Histogram, SpacingHistogram, Spacings};
use crate::structure::{block_norms, BlockNorms, BlockStructure};
use crate::surmise::surmise;

/// Everything the summary needs from one frame snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct RppSample {
    /// Eigenphases of the polar factor of `π_e U π_e`.
    pub phases: Vec<f64>,
    pub polar_deviation: f64,
    /// `|U_ij|` over the elliptic block.
    pub moduli: Vec<f64>,
    /// Eigenphases of the polar factor of `π_e U V* π_e`.
    pub uv_phases: Vec<f64>,
    pub norms: BlockNorms,
}

impl RppSample {
    /// `elliptic` masks the complex columns of `U`.
    pub fn from_uv(uv: &UVPair, elliptic: &[bool]) -> Result<Self> {
        let bp = block_phases(&uv.u, Some(elliptic))?;
        let uvp = block_phases(&uv.u_vstar(), Some(elliptic))?;
        Ok(RppSample {
            phases: bp.phases,
            polar_deviation: bp.polar_deviation,
            moduli: entry_moduli(&uv.u, Some(elliptic))?,
            uv_phases: uvp.phases,
            norms: block_norms(&uv.u, elliptic)?,
        })
    }

    pub fn from_ensemble(uvs: &[UVPair], elliptic: &[bool]) -> Result<Vec<Self>> {
        uvs.par_iter().map(|uv| RppSample::from_uv(uv, elliptic)).collect()
    }
}

/// Which circular ensemble a set of spacings is closer to, and how clearly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrimination {
    pub ks_coe: f64,
    pub ks_cue: f64,
    /// Dyson index with the smaller KS distance.
    pub selected: u32,
    /// `|ks_coe − ks_cue|`.
    pub margin: f64,
    /// Standard error of the KS difference from `groups` disjoint groups.
    pub fluctuation: f64,
    pub groups: usize,
}

impl Discrimination {
    pub fn resolves(&self, beta: u32, sigmas: f64) -> bool {
        self.selected == beta && self.margin >= sigmas * self.fluctuation
    }
}

pub const DISCRIMINATION_GROUPS: usize = 10;

/// Compares pooled spacings of the phase sets with the COE and CUE surmises.
pub fn discriminate(phase_sets: &[&[f64]], groups: usize) -> Result<Discrimination> {
    if groups < 2 || phase_sets.len() < groups {
        return Err(RppError::InvalidArgument(format!(
            "need at least {groups} ≥ 2 phase sets, got {}",
            phase_sets.len()
        )));
    }
    let (coe, cue) = (surmise(1)?, surmise(2)?);
    let diff = |sp: &Spacings| {
        let a = ks_statistic(&sp.values, |s| coe.cdf(s));
        let b = ks_statistic(&sp.values, |s| cue.cdf(s));
        (a, b)
    };
    let all = spacings(phase_sets.iter().copied());
    if all.values.is_empty() {
        return Err(RppError::InvalidArgument("no spacings".into()));
    }
    let (ks_coe, ks_cue) = diff(&all);
    let size = phase_sets.len().div_ceil(groups);
    let ds: Vec<f64> = phase_sets
        .chunks(size)
        .map(|c| {
            let (a, b) = diff(&spacings(c.iter().copied()));
            a - b
        })
        .collect();
    let g = ds.len() as f64;
    let mean = ds.iter().sum::<f64>() / g;
    let sd = (ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (g - 1.0)).sqrt();
    Ok(Discrimination {
        ks_coe,
        ks_cue,
        selected: if ks_cue <= ks_coe { 2 } else { 1 },
        margin: (ks_coe - ks_cue).abs(),
        fluctuation: sd / g.sqrt(),
        groups: ds.len(),
    })
}

/// Ensemble-level random-phase statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RppSummary {
    pub samples: usize,
    /// Size of the elliptic block.
    pub l_e: usize,
    pub spacing: SpacingHistogram,
    pub ks_spacing_cue: f64,
    pub polar_deviation_max: f64,
    pub density: Histogram,
    pub ks_uniform: f64,
    pub moduli: Histogram,
    pub ks_moduli: f64,
    pub uv_spacing: SpacingHistogram,
    pub uv: Discrimination,
    pub structure: BlockStructure,
}

pub const DENSITY_BINS: usize = 50;
pub const MODULUS_BINS: usize = 50;

impl RppSummary {
    pub fn new(samples: &[RppSample]) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(RppError::InvalidArgument("empty ensemble".into()));
        };
        let l_e = first.phases.len();
        if l_e < 2 {
            return Err(RppError::InvalidArgument(format!("elliptic block of size {l_e} has no spacings")));
        }
        let cue = surmise(2)?;
        let sp = spacings(samples.iter().map(|s| s.phases.as_slice()));
        let spacing = SpacingHistogram::new(sp)?;
        let ks_spacing_cue = ks_statistic(&spacing.spacings.values, |s| cue.cdf(s));

        let phases: Vec<f64> = samples.iter().flat_map(|s| s.phases.iter().copied()).collect();
        let density = Histogram::new(&phases, DENSITY_BINS, -std::f64::consts::PI, std::f64::consts::PI)?;
        let ks_uniform = ks_statistic(&phases, uniform_phase_cdf);

        let moduli: Vec<f64> = samples.iter().flat_map(|s| s.moduli.iter().copied()).collect();
        let mod_hist = Histogram::new(&moduli, MODULUS_BINS, 0.0, 1.0)?;
        let ks_moduli = ks_statistic(&moduli, entry_modulus_cdf(l_e));

        let uv_sets: Vec<&[f64]> = samples.iter().map(|s| s.uv_phases.as_slice()).collect();
        let uv_spacing = SpacingHistogram::new(spacings(uv_sets.iter().copied()))?;
        let uv = discriminate(&uv_sets, DISCRIMINATION_GROUPS.min(samples.len()))?;

        let norms: Vec<BlockNorms> = samples.iter().map(|s| s.norms).collect();
        Ok(RppSummary {
            samples: samples.len(),
            l_e,
            spacing,
            ks_spacing_cue,
            polar_deviation_max: samples.iter().map(|s| s.polar_deviation).fold(0.0, f64::max),
            density,
            ks_uniform,
            moduli: mod_hist,
            ks_moduli,
            uv_spacing,
            uv,
            structure: BlockStructure::from_norms(&norms)?,
        })
    }
}
