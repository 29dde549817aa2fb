//! Lyapunov exponents of the random frame chain: Birkhoff means of the
//! additive cocycles over independent realizations, plus frame snapshots
//! for the random-phase statistics.

mod chain;
mod config;

use models::NormalFormBundle;
use rayon::prelude::*;
use symplectic_core::{Result, RppError};

pub use chain::{chain_rng, AnyChain, Chain, ChainSummary, Snapshot};
pub use config::{ChainConfig, InitialFrame};

/// Aggregated exponents with error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// `γ_p`, `p = 1..L`, in channel order (hyperbolic first).
    pub gamma: Vec<f64>,
    /// Across-realization standard error (batch means when `R = 1`).
    pub stderr: Vec<f64>,
    /// Steps per chain including burn-in.
    pub steps: usize,
    pub burn_in: usize,
    pub realizations: usize,
    pub seed: u64,
    pub chains: Vec<ChainSummary>,
}

impl LyapunovEstimate {
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// `stderr_p / |γ_p|` for the 1-based exponent `p`.
    pub fn relative_error(&self, p: usize) -> f64 {
        self.stderr[p - 1] / self.gamma[p - 1].abs()
    }

    fn from_chains(chains: Vec<ChainSummary>, config: &ChainConfig, steps: usize) -> Self {
        let r = chains.len();
        let dim = chains[0].gamma.len();
        let gamma: Vec<f64> = (0..dim).map(|p| chains.iter().map(|c| c.gamma[p]).sum::<f64>() / r as f64).collect();
        let stderr = if r == 1 {
            chains[0].stderr.clone()
        } else {
            (0..dim)
                .map(|p| {
                    let xs: Vec<f64> = chains.iter().map(|c| c.gamma[p]).collect();
                    chain::sample_sd(&xs) / (r as f64).sqrt()
                })
                .collect()
        };
        LyapunovEstimate {
            gamma,
            stderr,
            steps,
            burn_in: config.burn_in,
            realizations: r,
            seed: config.seed,
            chains,
        }
    }
}

/// Snapshots of all realizations, ordered by realization then step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameEnsemble {
    pub snapshots: Vec<Snapshot>,
}

impl FrameEnsemble {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn merge(&mut self, other: FrameEnsemble) {
        self.snapshots.extend(other.snapshots);
        self.snapshots.sort_by_key(|s| (s.realization, s.step));
    }
}

fn collect_failures<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failed = Vec::new();
    let mut first = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed.push(i);
                first.get_or_insert(e);
            }
        }
    }
    match first {
        None => Ok(ok),
        Some(e) if total == 1 => Err(e),
        Some(e) => Err(RppError::ChainFailure { failed, total, first: Box::new(e) }),
    }
}

/// Runs realization `realization` of the ensemble alone.
pub fn run_single(
    bundle: &NormalFormBundle,
    config: &ChainConfig,
    realization: usize,
    sink: &mut dyn FnMut(Snapshot),
) -> Result<ChainSummary> {
    let mut chain = AnyChain::new(bundle, config, realization)?;
    chain.advance(config.steps, sink)?;
    Ok(chain.summary())
}

/// One chain (realization 0); `R` in `config` is ignored.
pub fn run_chain(bundle: &NormalFormBundle, config: &ChainConfig) -> Result<(LyapunovEstimate, FrameEnsemble)> {
    let mut snaps = Vec::new();
    let s = run_single(bundle, config, 0, &mut |s| snaps.push(s))?;
    Ok((LyapunovEstimate::from_chains(vec![s], config, config.steps), FrameEnsemble { snapshots: snaps }))
}

/// `R` independent chains in parallel; `harvest` maps every snapshot to
/// the stored value. Results are independent of the thread count.
pub fn run_ensemble_with<A, F>(bundle: &NormalFormBundle, config: &ChainConfig, harvest: F) -> Result<(LyapunovEstimate, Vec<A>)>
where
    A: Send,
    F: Fn(Snapshot) -> A + Sync,
{
    config.validate()?;
    let results: Vec<Result<(ChainSummary, Vec<A>)>> = (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let mut out = Vec::with_capacity(config.snapshots_per_chain());
            let s = run_single(bundle, config, r, &mut |snap| out.push(harvest(snap)))?;
            Ok((s, out))
        })
        .collect();
    let ok = collect_failures(results)?;
    let mut chains = Vec::with_capacity(ok.len());
    let mut harvested = Vec::new();
    for (s, h) in ok {
        chains.push(s);
        harvested.extend(h);
    }
    Ok((LyapunovEstimate::from_chains(chains, config, config.steps), harvested))
}

pub fn run_ensemble(bundle: &NormalFormBundle, config: &ChainConfig) -> Result<(LyapunovEstimate, FrameEnsemble)> {
    let (est, snapshots) = run_ensemble_with(bundle, config, |s| s)?;
    Ok((est, FrameEnsemble { snapshots }))
}

/// Stopping rule for [`run_adaptive`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveTarget {
    /// Required `stderr/|γ|`.
    pub relative_error: f64,
    /// 1-based exponents the rule applies to (all when empty).
    pub exponents: Vec<usize>,
    /// Upper bound on steps per chain.
    pub max_steps: usize,
}

/// Runs the ensemble, doubling every chain's length until the target
/// exponents reach the requested relative error or `max_steps` is hit.
/// Snapshots are not collected.
pub fn run_adaptive(bundle: &NormalFormBundle, config: &ChainConfig, target: &AdaptiveTarget) -> Result<LyapunovEstimate> {
    let mut cfg = config.clone();
    cfg.harvest = false;
    cfg.validate()?;
    let chains: Vec<Result<AnyChain>> = (0..cfg.realizations).map(|r| AnyChain::new(bundle, &cfg, r)).collect();
    let mut chains = collect_failures(chains)?;
    let mut steps = cfg.steps;
    let mut todo = cfg.steps;
    loop {
        let results: Vec<Result<()>> = chains.par_iter_mut().map(|c| c.advance(todo, &mut |_| {})).collect();
        collect_failures(results)?;
        let est = LyapunovEstimate::from_chains(chains.iter().map(AnyChain::summary).collect(), &cfg, steps);
        let ps: Vec<usize> = if target.exponents.is_empty() { (1..=est.len()).collect() } else { target.exponents.clone() };
        let done = ps.iter().all(|&p| est.relative_error(p) <= target.relative_error);
        if done || steps >= target.max_steps {
            return Ok(est);
        }
        todo = steps.min(target.max_steps - steps);
        steps += todo;
    }
}
