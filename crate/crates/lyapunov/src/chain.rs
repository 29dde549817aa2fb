//! One realization of the frame chain `Φ_n = T_n·Φ_{n−1}`.

use frames::{orthonormalize, quaternion_symmetrize, random_frame, reproject_raw, uv_of_frame, IsotropicFrame, UVPair};
use models::{Kernel, NormalFormBundle, Workspace};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symplectic_core::linalg::{from_complex, to_complex};
use symplectic_core::{Result, RppError, Scalar, SymmetryClass, C64};

use crate::config::{ChainConfig, InitialFrame};

/// A harvested frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub realization: usize,
    /// Steps taken when the snapshot was recorded.
    pub step: usize,
    pub uv: UVPair,
}

/// Random stream of realization `r` under `seed` (stream `u64::MAX` is
/// reserved for the shared initial frame).
pub fn chain_rng(seed: u64, realization: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization as u64);
    rng
}

/// Cocycle sums collected in equal-length chunks; the chunk length doubles
/// whenever the chunk count reaches a bound, so memory stays fixed.
#[derive(Debug, Clone)]
struct Chunks {
    len: usize,
    filled: usize,
    current: Vec<f64>,
    full: Vec<Vec<f64>>,
}

const MAX_CHUNKS: usize = 512;
const BATCHES: usize = 32;

impl Chunks {
    fn new(dim: usize) -> Self {
        Chunks { len: 8, filled: 0, current: vec![0.0; dim], full: Vec::new() }
    }

    fn push(&mut self, logs: &[f64], steps: usize) {
        for (a, l) in self.current.iter_mut().zip(logs) {
            *a += l;
        }
        self.filled += steps;
        if self.filled >= self.len {
            let dim = self.current.len();
            self.full.push(std::mem::replace(&mut self.current, vec![0.0; dim]));
            self.filled = 0;
            if self.full.len() >= MAX_CHUNKS {
                self.full = self
                    .full
                    .chunks(2)
                    .map(|pair| pair[0].iter().zip(&pair[1]).map(|(a, b)| a + b).collect())
                    .collect();
                self.len *= 2;
            }
        }
    }

    /// Batch-means standard error of the per-step mean.
    fn stderr(&self) -> Vec<f64> {
        let dim = self.current.len();
        let nb = self.full.len().min(BATCHES);
        if nb < 2 {
            return vec![f64::NAN; dim];
        }
        let per = self.full.len() / nb;
        let steps = (per * self.len) as f64;
        let means: Vec<Vec<f64>> = (0..nb)
            .map(|b| {
                let mut s = vec![0.0; dim];
                for c in &self.full[b * per..(b + 1) * per] {
                    for (a, x) in s.iter_mut().zip(c) {
                        *a += x;
                    }
                }
                s.iter().map(|x| x / steps).collect()
            })
            .collect();
        (0..dim)
            .map(|p| {
                let xs: Vec<f64> = means.iter().map(|m| m[p]).collect();
                sample_sd(&xs) / (nb as f64).sqrt()
            })
            .collect()
    }
}

pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Result of one chain: Birkhoff means and the within-chain error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub realization: usize,
    pub gamma: Vec<f64>,
    /// Batch-means standard errors (NaN for very short chains).
    pub stderr: Vec<f64>,
    pub counted_steps: usize,
}

/// Resumable state of one chain over the scalar field `T`.
pub struct Chain<'a, T: Scalar> {
    bundle: &'a NormalFormBundle,
    kernel: Kernel<T>,
    ws: Workspace<T>,
    phi: DMatrix<T>,
    next: DMatrix<T>,
    w: Vec<f64>,
    rng: ChaCha8Rng,
    realization: usize,
    step: usize,
    block: usize,
    sums: Vec<f64>,
    counted: usize,
    chunks: Chunks,
    config: ChainConfig,
}

impl<'a, T: Scalar> Chain<'a, T> {
    pub fn new(bundle: &'a NormalFormBundle, config: &ChainConfig, realization: usize) -> Result<Self> {
        config.validate()?;
        let class = bundle.class;
        let kernel = bundle.kernel::<T>()?;
        let mut rng = chain_rng(config.seed, realization);
        let frame = match config.initial {
            InitialFrame::Axis => IsotropicFrame::axis(class, bundle.l())?,
            InitialFrame::Random => random_frame(class, bundle.l(), &mut rng)?,
            InitialFrame::Shared => random_frame(class, bundle.l(), &mut chain_rng(config.seed, usize::MAX))?,
        };
        let phi: DMatrix<T> = from_complex(frame.phi());
        let n = phi.ncols();
        let channels = n / class.block();
        Ok(Chain {
            bundle,
            ws: kernel.workspace(n),
            kernel,
            next: phi.clone(),
            phi,
            w: vec![0.0; bundle.sites()],
            rng,
            realization,
            step: 0,
            block: class.block(),
            sums: vec![0.0; channels],
            counted: 0,
            chunks: Chunks::new(channels),
            config: config.clone(),
        })
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn frame(&self) -> Result<IsotropicFrame> {
        IsotropicFrame::new_unchecked(to_complex(&self.phi), self.bundle.class)
    }

    /// Advances `n` steps, calling `sink` for each snapshot due.
    pub fn advance(&mut self, n: usize, sink: &mut dyn FnMut(Snapshot)) -> Result<()> {
        let lambda = self.bundle.params.lambda;
        let disorder = self.bundle.params.disorder;
        let cfg = self.config.clone();
        for _ in 0..n {
            disorder.fill(&mut self.w, &mut self.rng);
            self.kernel.apply(&self.phi, &self.w, lambda, &mut self.next, &mut self.ws);
            std::mem::swap(&mut self.phi, &mut self.next);
            self.step += 1;
            let s = self.step;
            if s % cfg.renorm_every == 0 {
                let logs = orthonormalize(&mut self.phi, self.block, None).map_err(|e| at_step(e, s))?;
                if s > cfg.burn_in {
                    for (a, l) in self.sums.iter_mut().zip(&logs) {
                        *a += l;
                    }
                    self.counted += cfg.renorm_every;
                    self.chunks.push(&logs, cfg.renorm_every);
                }
            }
            if cfg.reproject_every > 0 && s % cfg.reproject_every == 0 && s % cfg.renorm_every == 0 {
                self.reproject().map_err(|e| at_step(e, s))?;
            }
            if cfg.harvest && s > cfg.burn_in && (s - cfg.burn_in) % cfg.stride == 0 {
                let uv = uv_of_frame(&self.frame()?);
                sink(Snapshot { realization: self.realization, step: s, uv });
            }
        }
        Ok(())
    }

    fn reproject(&mut self) -> Result<()> {
        if self.bundle.class == SymmetryClass::Quaternion {
            let sym = quaternion_symmetrize(&to_complex(&self.phi))?;
            self.phi = from_complex(&sym);
        }
        reproject_raw(&mut self.phi, self.block)
    }

    pub fn summary(&self) -> ChainSummary {
        let c = self.counted.max(1) as f64;
        ChainSummary {
            realization: self.realization,
            gamma: self.sums.iter().map(|s| s / c).collect(),
            stderr: self.chunks.stderr(),
            counted_steps: self.counted,
        }
    }
}

fn at_step(e: RppError, step: usize) -> RppError {
    match e {
        RppError::SingularAction { column, .. } => RppError::SingularAction { column, step: Some(step as u64) },
        other => other,
    }
}

/// A chain over whichever scalar field the bundle's class needs.
pub enum AnyChain<'a> {
    Real(Chain<'a, f64>),
    Complex(Chain<'a, C64>),
}

impl<'a> AnyChain<'a> {
    pub fn new(bundle: &'a NormalFormBundle, config: &ChainConfig, realization: usize) -> Result<Self> {
        Ok(if bundle.class == SymmetryClass::Real {
            AnyChain::Real(Chain::new(bundle, config, realization)?)
        } else {
            AnyChain::Complex(Chain::new(bundle, config, realization)?)
        })
    }

    pub fn advance(&mut self, n: usize, sink: &mut dyn FnMut(Snapshot)) -> Result<()> {
        match self {
            AnyChain::Real(c) => c.advance(n, sink),
            AnyChain::Complex(c) => c.advance(n, sink),
        }
    }

    pub fn summary(&self) -> ChainSummary {
        match self {
            AnyChain::Real(c) => c.summary(),
            AnyChain::Complex(c) => c.summary(),
        }
    }

    pub fn step(&self) -> usize {
        match self {
            AnyChain::Real(c) => c.step(),
            AnyChain::Complex(c) => c.step(),
        }
    }

    pub fn frame(&self) -> Result<IsotropicFrame> {
        match self {
            AnyChain::Real(c) => c.frame(),
            AnyChain::Complex(c) => c.frame(),
        }
    }
}
