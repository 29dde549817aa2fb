use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erf;
use symplectic_core::{Result, RppError, SymmetryClass};

/// Distribution of the on-site potential; every variant is centered with
/// unit variance and compact support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Disorder {
    /// Uniform on `[−√3, √3]`.
    Uniform,
    /// Symmetric `±1`.
    Binary,
    /// Standard normal conditioned on `|x| ≤ cut`, rescaled to unit variance.
    TruncatedGaussian { cut: f64 },
}

impl Default for Disorder {
    fn default() -> Self {
        Disorder::Uniform
    }
}

impl Disorder {
    fn truncated_variance(cut: f64) -> f64 {
        let density = (-0.5 * cut * cut).exp() / (2.0 * PI).sqrt();
        let mass = erf(cut / std::f64::consts::SQRT_2);
        1.0 - 2.0 * cut * density / mass
    }

    pub fn validate(&self) -> Result<()> {
        if let Disorder::TruncatedGaussian { cut } = self {
            if !(cut.is_finite() && *cut > 0.1) {
                return Err(RppError::InvalidArgument(format!(
                    "truncated Gaussian cut must be a finite value above 0.1, got {cut}"
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Disorder::Uniform => {
                let s = 3f64.sqrt();
                rng.random_range(-s..=s)
            }
            Disorder::Binary => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Disorder::TruncatedGaussian { cut } => {
                let scale = Self::truncated_variance(cut).sqrt();
                loop {
                    let x: f64 = rng.sample(StandardNormal);
                    if x.abs() <= cut {
                        return x / scale;
                    }
                }
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        for x in out {
            *x = self.sample(rng);
        }
    }
}

impl fmt::Display for Disorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disorder::Uniform => write!(f, "uniform"),
            Disorder::Binary => write!(f, "binary"),
            Disorder::TruncatedGaussian { cut } => write!(f, "gaussian:{cut}"),
        }
    }
}

impl FromStr for Disorder {
    type Err = RppError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let d = match s.as_str() {
            "uniform" => Disorder::Uniform,
            "binary" => Disorder::Binary,
            "gaussian" => Disorder::TruncatedGaussian { cut: 3.0 },
            other => match other.strip_prefix("gaussian:") {
                Some(c) => Disorder::TruncatedGaussian {
                    cut: c
                        .parse()
                        .map_err(|_| RppError::InvalidArgument(format!("bad Gaussian cut '{c}'")))?,
                },
                None => {
                    return Err(RppError::InvalidArgument(format!(
                        "unknown disorder '{other}' (uniform, binary, gaussian[:cut])"
                    )))
                }
            },
        };
        d.validate()?;
        Ok(d)
    }
}

/// Which of the four models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Tube with flux `φ ≠ 0`, class C.
    AndersonMagnetic,
    /// Tube without flux, class R.
    AndersonReal,
    /// Spin-orbit tube, class H.
    Ando,
    /// `d`-dimensional slab with `n` sites per transverse direction, class C.
    Slab { n: usize, d: usize },
}

impl ModelKind {
    pub fn class(self) -> SymmetryClass {
        match self {
            ModelKind::AndersonReal => SymmetryClass::Real,
            ModelKind::Ando => SymmetryClass::Quaternion,
            _ => SymmetryClass::Complex,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::AndersonMagnetic => "anderson-magnetic",
            ModelKind::AndersonReal => "anderson-real",
            ModelKind::Ando => "ando",
            ModelKind::Slab { .. } => "slab",
        }
    }
}

/// Largest transverse size accepted by the slab builder.
pub const MAX_SLAB_CHANNELS: usize = 4096;

/// Parameters of one model at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub model: ModelKind,
    /// Channel count (sites per slice; `n^{d−1}` for the slab).
    pub l: usize,
    pub energy: f64,
    pub lambda: f64,
    /// Flux per transverse direction (one entry for the tube).
    pub phi: Vec<f64>,
    /// Spin-orbit coupling.
    pub t: f64,
    pub disorder: Disorder,
    /// Margin on `||μ| − 2|` below which a channel counts as parabolic.
    pub parabolic_tol: f64,
    /// Margin of the spin-orbit eigenvalue constellations.
    pub case_tol: f64,
}

pub const DEFAULT_PARABOLIC_TOL: f64 = 1e-6;
pub const DEFAULT_CASE_TOL: f64 = 1e-8;

impl ModelParams {
    fn base(model: ModelKind, l: usize, energy: f64, lambda: f64) -> Self {
        ModelParams {
            model,
            l,
            energy,
            lambda,
            phi: vec![0.0],
            t: 0.0,
            disorder: Disorder::Uniform,
            parabolic_tol: DEFAULT_PARABOLIC_TOL,
            case_tol: DEFAULT_CASE_TOL,
        }
    }

    pub fn magnetic(l: usize, energy: f64, lambda: f64, phi: f64) -> Self {
        ModelParams { phi: vec![phi], ..Self::base(ModelKind::AndersonMagnetic, l, energy, lambda) }
    }

    pub fn real(l: usize, energy: f64, lambda: f64) -> Self {
        Self::base(ModelKind::AndersonReal, l, energy, lambda)
    }

    pub fn ando(l: usize, energy: f64, lambda: f64, t: f64) -> Self {
        ModelParams { t, ..Self::base(ModelKind::Ando, l, energy, lambda) }
    }

    pub fn slab(n: usize, d: usize, energy: f64, lambda: f64, phi: Vec<f64>) -> Self {
        let l = if d >= 2 { n.saturating_pow((d - 1) as u32) } else { 0 };
        ModelParams { phi, ..Self::base(ModelKind::Slab { n, d }, l, energy, lambda) }
    }

    pub fn with_disorder(mut self, disorder: Disorder) -> Self {
        self.disorder = disorder;
        self
    }

    pub fn class(&self) -> SymmetryClass {
        self.model.class()
    }

    /// Complex size of one half of a frame.
    pub fn ambient(&self) -> usize {
        self.class().ambient_size(self.l)
    }

    /// Number of disorder values per slice.
    pub fn sites(&self) -> usize {
        self.l
    }

    pub fn flux(&self) -> f64 {
        self.phi.first().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RppError::InvalidArgument(m));
        if self.l == 0 {
            return bad("channel count must be positive".into());
        }
        if !self.energy.is_finite() {
            return bad(format!("energy must be finite, got {}", self.energy));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("coupling must be finite and >= 0, got {}", self.lambda));
        }
        if !(self.parabolic_tol > 0.0 && self.case_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.phi.iter().any(|p| !p.is_finite()) || !self.t.is_finite() {
            return bad("flux and spin-orbit coupling must be finite".into());
        }
        self.disorder.validate()?;
        match self.model {
            ModelKind::Slab { n, d } => {
                if d < 2 || n == 0 {
                    return bad(format!("slab needs d >= 2 and n >= 1, got d={d}, n={n}"));
                }
                let l = (n as u128).pow((d - 1) as u32);
                if l > MAX_SLAB_CHANNELS as u128 {
                    return bad(format!("slab with {l} channels exceeds the limit {MAX_SLAB_CHANNELS}"));
                }
                if self.l as u128 != l {
                    return bad(format!("slab channel count must be n^(d-1) = {l}, got {}", self.l));
                }
                if self.phi.len() != d - 1 {
                    return bad(format!("slab needs {} flux values, got {}", d - 1, self.phi.len()));
                }
            }
            _ => {
                if self.phi.len() != 1 {
                    return bad(format!("tube models take one flux value, got {}", self.phi.len()));
                }
            }
        }
        Ok(())
    }
}
