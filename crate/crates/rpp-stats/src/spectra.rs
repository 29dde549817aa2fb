//! Eigenphases of unitary blocks, their spacings and histograms.

use std::f64::consts::PI;

use nalgebra::linalg::Schur;
use symplectic_core::linalg::{frobenius, polar_unitary};
use symplectic_core::{ComplexMatrix, Result, RppError};

/// Phases closer than this are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-13;

/// Rows/columns kept by a block restriction.
pub fn restrict(u: &ComplexMatrix, mask: &[bool]) -> Result<ComplexMatrix> {
    if u.nrows() != mask.len() || u.ncols() != mask.len() {
        return Err(RppError::dims("block mask", u.nrows(), mask.len()));
    }
    let idx: Vec<usize> = mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect();
    Ok(ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| u[(idx[r], idx[c])]))
}

/// Sorted eigenphases in `(−π, π]` of a unitary matrix.
pub fn eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>> {
    if u.nrows() != u.ncols() {
        return Err(RppError::dims("eigenphases", "square matrix", format!("{:?}", u.shape())));
    }
    if u.nrows() == 0 {
        return Ok(Vec::new());
    }
    let ev = Schur::new(u.clone())
        .eigenvalues()
        .ok_or_else(|| RppError::InvariantViolation("Schur decomposition failed".into()))?;
    let mut ph: Vec<f64> = ev.iter().map(|z| z.arg()).collect();
    ph.sort_by(f64::total_cmp);
    Ok(ph)
}

/// Eigenphases of a (sub-)block after re-unitarization by its polar factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPhases {
    pub phases: Vec<f64>,
    /// `‖B − polar(B)‖_F` of the restricted block (0 for the full matrix).
    pub polar_deviation: f64,
}

/// Phases of `u` itself (`mask = None`) or of its polar-unitarized block.
pub fn block_phases(u: &ComplexMatrix, mask: Option<&[bool]>) -> Result<BlockPhases> {
    match mask {
        None => Ok(BlockPhases { phases: eigenphases(u)?, polar_deviation: 0.0 }),
        Some(m) => {
            let b = restrict(u, m)?;
            let p = polar_unitary(&b)?;
            Ok(BlockPhases { phases: eigenphases(&p)?, polar_deviation: frobenius(&(&b - &p)) })
        }
    }
}

/// Pooled nearest-neighbour spacings, normalized to unit mean.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spacings {
    pub values: Vec<f64>,
    /// Mean spacing before normalization.
    pub mean_spacing: f64,
    /// Spacings dropped as coincident phases.
    pub dropped: usize,
}

/// Circular spacings of every phase set, pooled and scaled to unit mean.
pub fn spacings<'a>(phase_sets: impl IntoIterator<Item = &'a [f64]>) -> Spacings {
    let mut raw = Vec::new();
    let mut dropped = 0;
    for ph in phase_sets {
        let n = ph.len();
        if n < 2 {
            continue;
        }
        for i in 0..n {
            let s = if i + 1 < n { ph[i + 1] - ph[i] } else { ph[0] + 2.0 * PI - ph[n - 1] };
            if s < COINCIDENCE_TOL {
                dropped += 1;
            } else {
                raw.push(s);
            }
        }
    }
    let mean = if raw.is_empty() { 0.0 } else { raw.iter().sum::<f64>() / raw.len() as f64 };
    if mean > 0.0 {
        raw.iter_mut().for_each(|s| *s /= mean);
    }
    Spacings { values: raw, mean_spacing: mean, dropped }
}

/// Normalized histogram; samples outside the range are counted separately
/// and excluded from the normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub counts: Vec<usize>,
    pub samples: usize,
    pub outside: usize,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(RppError::InvalidArgument(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        let mut outside = 0;
        for &v in values {
            if v < lo || v > hi || !v.is_finite() {
                outside += 1;
            } else {
                counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
            }
        }
        let inside = values.len() - outside;
        let density = counts.iter().map(|&c| if inside > 0 { c as f64 / (inside as f64 * w) } else { 0.0 }).collect();
        let edges = (0..=bins).map(|i| lo + w * i as f64).collect();
        Ok(Histogram { edges, density, counts, samples: values.len(), outside })
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// `Σ density·width`.
    pub fn integral(&self) -> f64 {
        self.edges.windows(2).zip(&self.density).map(|(e, d)| d * (e[1] - e[0])).sum()
    }
}

/// Spacing histogram on `[0, 4]` with 50 bins, plus the pooled spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    pub histogram: Histogram,
    pub spacings: Spacings,
}

pub const SPACING_BINS: usize = 50;
pub const SPACING_MAX: f64 = 4.0;

impl SpacingHistogram {
    pub fn new(spacings: Spacings) -> Result<Self> {
        if spacings.values.is_empty() {
            return Err(RppError::InvalidArgument("no spacings (all phase sets degenerate)".into()));
        }
        Ok(SpacingHistogram { histogram: Histogram::new(&spacings.values, SPACING_BINS, 0.0, SPACING_MAX)?, spacings })
    }

    /// Coincident phases were dropped, or every spacing fell in one bin.
    pub fn is_degenerate(&self) -> bool {
        let inside = self.histogram.samples - self.histogram.outside;
        self.spacings.dropped > 0 || self.histogram.counts.iter().any(|&c| c == inside)
    }
}

/// Spacing statistics of the unitaries, restricted to `mask` if given.
pub fn eigenphase_spacings(us: &[ComplexMatrix], mask: Option<&[bool]>) -> Result<(SpacingHistogram, Vec<f64>)> {
    let blocks: Vec<BlockPhases> = us.iter().map(|u| block_phases(u, mask)).collect::<Result<_>>()?;
    let dev = blocks.iter().map(|b| b.polar_deviation).collect();
    let sp = spacings(blocks.iter().map(|b| b.phases.as_slice()));
    Ok((SpacingHistogram::new(sp)?, dev))
}

/// Pooled eigenphase histogram on `(−π, π]`.
pub fn eigenphase_density<'a>(phase_sets: impl IntoIterator<Item = &'a [f64]>, bins: usize) -> Result<(Histogram, Vec<f64>)> {
    let pooled: Vec<f64> = phase_sets.into_iter().flatten().copied().collect();
    Ok((Histogram::new(&pooled, bins, -PI, PI)?, pooled))
}

/// Moduli of all entries of the restricted block.
pub fn entry_moduli(u: &ComplexMatrix, mask: Option<&[bool]>) -> Result<Vec<f64>> {
    let b = match mask {
        Some(m) => restrict(u, m)?,
        None => u.clone(),
    };
    Ok(b.iter().map(|z| z.norm()).collect())
}
