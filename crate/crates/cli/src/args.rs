//! Command-line surface of `rpp`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(name = "rpp", version, about = "Lyapunov spectra and random-phase statistics of disordered wires")]
pub struct Cli {
    /// Line-oriented `key=value` file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Lyapunov spectrum of one model at one energy.
    #[command(args_override_self = true)]
    Lyapunov(LyapunovArgs),
    /// Simulated and closed-form exponents over an energy grid.
    #[command(name = "spectrum-scan", args_override_self = true)]
    SpectrumScan(ScanArgs),
    /// Random-phase statistics of the harvested frame ensemble.
    #[command(args_override_self = true)]
    Rpp(RppArgs),
    /// Algebraic and statistical self-checks.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Closed-form exponents without simulation.
    #[command(args_override_self = true)]
    Formula(FormulaArgs),
}

/// Model selection shared by all subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// anderson-real, anderson-magnetic, ando or slab.
    #[arg(long)]
    pub model: Option<String>,
    /// Channel count of the tube models.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Energy.
    #[arg(long = "E", allow_hyphen_values = true)]
    pub energy: Option<f64>,
    /// Disorder strength (standard deviation of the potential).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Box width of uniform disorder; sets lambda = W/√12.
    #[arg(long = "W")]
    pub w: Option<f64>,
    /// Flux in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Flux in units of 2π.
    #[arg(long, allow_hyphen_values = true)]
    pub flux: Option<f64>,
    /// Slab fluxes in radians, comma separated (one per transverse direction).
    #[arg(long, allow_hyphen_values = true)]
    pub phis: Option<String>,
    /// Spin-orbit coupling of the ando model.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Slab sites per transverse direction.
    #[arg(long)]
    pub n: Option<usize>,
    /// Slab dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// uniform, binary or gaussian[:cut].
    #[arg(long)]
    pub disorder: Option<String>,
    #[arg(long)]
    pub parabolic_tol: Option<f64>,
    #[arg(long)]
    pub case_tol: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialArg {
    Axis,
    Random,
    Shared,
}

/// Chain length, seeding and adaptivity. Counts accept `1e6` notation.
#[derive(Args, Debug, Clone, Default)]
pub struct ChainArgs {
    /// Steps per chain including burn-in.
    #[arg(long, value_parser = parse_count)]
    pub steps: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    pub burn_in: Option<usize>,
    /// Snapshot stride after burn-in.
    #[arg(long, value_parser = parse_count)]
    pub stride: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub renorm_every: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    pub reproject_every: Option<usize>,
    #[arg(long, value_enum)]
    pub initial: Option<InitialArg>,
    /// Double the chains until stderr/|γ| reaches this value.
    #[arg(long)]
    pub target_rel_error: Option<f64>,
    /// Cap for adaptive runs.
    #[arg(long, value_parser = parse_count)]
    pub max_steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    Exact,
    SmallParameter,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// `start:stop:count` or a comma-separated list.
    #[arg(long = "E-grid", allow_hyphen_values = true)]
    pub e_grid: Option<String>,
    /// Report only the smallest k exponents.
    #[arg(long)]
    pub smallest: Option<usize>,
    /// Closed form used for the formula column.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Skip energies where an elliptic |sin k| falls below this value.
    #[arg(long)]
    pub band_edge_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RppArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Directory for the statistic CSVs.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Quick,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negate one block of J in the membership suite.
    CorruptJ,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "quick")]
    pub level: VerifyLevel,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, hide = true)]
    pub fault: Option<Fault>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassArg {
    R,
    C,
    H,
}

#[derive(Args, Debug, Clone)]
pub struct FormulaArgs {
    /// Symmetry class; picks the model when --model is absent.
    #[arg(long, value_enum, ignore_case = true)]
    pub class: Option<ClassArg>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// 1-based exponent index (all elliptic exponents when absent).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub band_edge_tol: Option<f64>,
}

/// Non-negative integer, also written as `1e6` or `2.5e5`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if x < 0.0 || x.fract() != 0.0 || x > 1e15 {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    Ok(x as usize)
}
