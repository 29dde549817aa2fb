use symplectic_core::{Result, RppError};

/// Starting frame of every chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialFrame {
    /// `(1; 0)`.
    #[default]
    Axis,
    /// Haar-random frame drawn from the chain's own stream.
    Random,
    /// One Haar-random frame drawn from the seed alone, shared by every
    /// realization.
    Shared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Total steps per chain, burn-in included.
    pub steps: usize,
    /// Leading steps excluded from the averages and from harvesting.
    pub burn_in: usize,
    /// Snapshot spacing after burn-in.
    pub stride: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Gram-Schmidt every this many steps.
    pub renorm_every: usize,
    /// Isotropy re-projection every this many steps (0 disables).
    pub reproject_every: usize,
    pub initial: InitialFrame,
    /// Collect frame snapshots.
    pub harvest: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            steps: 10_000,
            burn_in: 100,
            stride: 10,
            realizations: 1,
            seed: 0,
            renorm_every: 1,
            reproject_every: 100,
            initial: InitialFrame::Axis,
            harvest: false,
        }
    }
}

impl ChainConfig {
    pub fn new(steps: usize, realizations: usize, seed: u64) -> Self {
        ChainConfig { steps, realizations, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RppError::InvalidArgument(m));
        if self.burn_in >= self.steps {
            return bad(format!("burn-in {} must be below the step count {}", self.burn_in, self.steps));
        }
        if self.stride == 0 || self.renorm_every == 0 || self.realizations == 0 {
            return bad("stride, renorm_every and realizations must be positive".into());
        }
        if self.burn_in % self.renorm_every != 0 || (self.harvest && self.stride % self.renorm_every != 0) {
            return bad(format!(
                "burn-in and stride must be multiples of renorm_every = {}",
                self.renorm_every
            ));
        }
        Ok(())
    }

    /// Steps entering the averages.
    pub fn counted_steps(&self) -> usize {
        self.steps - self.burn_in
    }

    /// Snapshots per chain.
    pub fn snapshots_per_chain(&self) -> usize {
        if self.harvest {
            self.counted_steps() / self.stride
        } else {
            0
        }
    }
}
