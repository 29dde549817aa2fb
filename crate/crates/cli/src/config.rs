//! Config files, flag resolution and the echo written into CSV headers.

use std::f64::consts::PI;
use std::path::Path;

use clap::Parser;
use lyapunov::{AdaptiveTarget, ChainConfig, InitialFrame};
use models::{Disorder, ModelKind, ModelParams, DEFAULT_CASE_TOL, DEFAULT_PARABOLIC_TOL};
use perturbation::ClosedFormKind;
use symplectic_core::SymmetryClass;

use crate::args::{ChainArgs, ClassArg, Cli, InitialArg, KindArg, ModelArgs};
use crate::CliError;

const SUBCOMMANDS: [&str; 5] = ["lyapunov", "spectrum-scan", "rpp", "verify", "formula"];

/// `key=value` pairs of a config file with their line numbers. Blank lines
/// and `#` comments are skipped; keys may carry a leading `--`.
pub fn read_config(path: &Path) -> Result<Vec<(usize, String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

pub fn parse_config(text: &str, origin: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{origin}:{}: expected key=value, got '{line}'", i + 1)));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config(format!("{origin}:{}: empty key", i + 1)));
        }
        out.push((i + 1, key, v.trim().to_string()));
    }
    Ok(out)
}

/// Splices the config file (if any) in front of the command-line flags, so
/// that flags win, and checks every config field on its own for precise
/// diagnostics.
pub fn expand_args(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let Some(sub) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let entries = read_config(Path::new(&path))?;
    let mut injected = Vec::new();
    for (line, key, value) in entries {
        let pair = vec![format!("--{key}"), value.clone()];
        let probe: Vec<String> = [argv[0].clone(), argv[sub].clone()].into_iter().chain(pair.iter().cloned()).collect();
        if let Err(e) = Cli::try_parse_from(&probe) {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Err(CliError::Config(format!("{path}:{line}: field '{key}' = '{value}': {first}")));
        }
        injected.extend(pair);
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(injected);
    out.extend(argv[sub + 1..].iter().cloned());
    Ok(out)
}


/// Ordered `key=value` lines echoed at the top of every output file.
#[derive(Debug, Clone, Default)]
pub struct Echo {
    pub entries: Vec<(String, String)>,
}

impl Echo {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn header(&self, command: &str) -> String {
        let mut s = format!("# rpp {command}\n");
        for (k, v) in &self.entries {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s
    }
}

fn class_model(class: ClassArg) -> &'static str {
    match class {
        ClassArg::R => "anderson-real",
        ClassArg::C => "anderson-magnetic",
        ClassArg::H => "ando",
    }
}

pub fn class_of(class: ClassArg) -> SymmetryClass {
    match class {
        ClassArg::R => SymmetryClass::Real,
        ClassArg::C => SymmetryClass::Complex,
        ClassArg::H => SymmetryClass::Quaternion,
    }
}

pub fn kind_of(kind: Option<KindArg>, model: ModelKind) -> ClosedFormKind {
    match kind {
        Some(KindArg::Exact) => ClosedFormKind::Exact,
        Some(KindArg::SmallParameter) => ClosedFormKind::SmallParameter,
        None if model == ModelKind::Ando => ClosedFormKind::SmallParameter,
        None => ClosedFormKind::Exact,
    }
}

/// Builds model parameters at `energy`, echoing the resolved values.
pub fn resolve_model(
    m: &ModelArgs,
    class: Option<ClassArg>,
    energy: Option<f64>,
    echo: &mut Echo,
) -> Result<ModelParams, CliError> {
    let cfg = |s: String| CliError::Config(s);
    let name = match (&m.model, class) {
        (Some(name), Some(c)) if name != class_model(c) && !(c == ClassArg::C && name == "slab") => {
            return Err(cfg(format!("model {name} is not of class {c:?}")));
        }
        (Some(name), _) => name.clone(),
        (None, Some(c)) => class_model(c).to_string(),
        (None, None) => "anderson-real".to_string(),
    };
    let lambda = match (m.lambda, m.w) {
        (Some(_), Some(_)) => return Err(cfg("give either lambda or W, not both".into())),
        (Some(l), None) => l,
        (None, Some(w)) => w / 12f64.sqrt(),
        (None, None) => return Err(cfg("missing disorder strength (lambda or W)".into())),
    };
    let phi = match (m.phi, m.flux) {
        (Some(_), Some(_)) => return Err(cfg("give either phi or flux, not both".into())),
        (Some(p), None) => p,
        (None, Some(f)) => 2.0 * PI * f,
        (None, None) => 0.0,
    };
    let energy = energy.or(m.energy).ok_or_else(|| cfg("missing energy E".into()))?;
    let need_l = || m.l.ok_or_else(|| cfg(format!("model {name} needs L")));
    let mut params = match name.as_str() {
        "anderson-real" => ModelParams::real(need_l()?, energy, lambda),
        "anderson-magnetic" => ModelParams::magnetic(need_l()?, energy, lambda, phi),
        "ando" => ModelParams::ando(need_l()?, energy, lambda, m.t.unwrap_or(0.0)),
        "slab" => {
            let (n, d) = match (m.n, m.d) {
                (Some(n), Some(d)) => (n, d),
                _ => return Err(cfg("slab needs n and d".into())),
            };
            let phis = match &m.phis {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| cfg(format!("bad flux '{x}' in phis"))))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![phi; d.saturating_sub(1)],
            };
            ModelParams::slab(n, d, energy, lambda, phis)
        }
        other => {
            return Err(cfg(format!(
                "unknown model '{other}' (anderson-real, anderson-magnetic, ando, slab)"
            )))
        }
    };
    if let Some(d) = &m.disorder {
        params.disorder = d.parse::<Disorder>().map_err(|e| cfg(e.to_string()))?;
    }
    params.parabolic_tol = m.parabolic_tol.unwrap_or(DEFAULT_PARABOLIC_TOL);
    params.case_tol = m.case_tol.unwrap_or(DEFAULT_CASE_TOL);
    params.validate().map_err(|e| cfg(e.to_string()))?;

    echo.push("model", params.model.name());
    if let ModelKind::Slab { n, d } = params.model {
        echo.push("n", n);
        echo.push("d", d);
        let phis: Vec<String> = params.phi.iter().map(|p| format!("{p:?}")).collect();
        echo.push("phis", phis.join(","));
    } else {
        echo.push("L", params.l);
        echo.push("phi", format!("{:?}", params.flux()));
    }
    echo.push("E", format!("{energy:?}"));
    echo.push("lambda", format!("{lambda:?}"));
    if params.model == ModelKind::Ando {
        echo.push("t", format!("{:?}", params.t));
    }
    echo.push("disorder", params.disorder);
    echo.push("parabolic-tol", format!("{:?}", params.parabolic_tol));
    echo.push("case-tol", format!("{:?}", params.case_tol));
    Ok(params)
}

/// Per-command chain defaults.
#[derive(Debug, Clone, Copy)]
pub struct ChainDefaults {
    pub steps: usize,
    pub burn_in: usize,
    pub stride: usize,
    pub realizations: usize,
    pub harvest: bool,
    pub initial: InitialArg,
}

pub const LYAPUNOV_DEFAULTS: ChainDefaults =
    ChainDefaults { steps: 100_000, burn_in: 1000, stride: 10, realizations: 8, harvest: false, initial: InitialArg::Axis };
pub const RPP_DEFAULTS: ChainDefaults =
    ChainDefaults { steps: 1000, burn_in: 100, stride: 10, realizations: 100, harvest: true, initial: InitialArg::Shared };

pub const DEFAULT_SEED: u64 = 1;

pub fn resolve_chain(
    c: &ChainArgs,
    defaults: ChainDefaults,
    echo: &mut Echo,
) -> Result<(ChainConfig, Option<AdaptiveTarget>), CliError> {
    let mut cfg = ChainConfig::new(
        c.steps.unwrap_or(defaults.steps),
        c.realizations.unwrap_or(defaults.realizations),
        c.seed.unwrap_or(DEFAULT_SEED),
    );
    cfg.burn_in = c.burn_in.unwrap_or(defaults.burn_in.min(cfg.steps / 10));
    cfg.stride = c.stride.unwrap_or(defaults.stride);
    if let Some(r) = c.renorm_every {
        cfg.renorm_every = r;
    }
    if let Some(r) = c.reproject_every {
        cfg.reproject_every = r;
    }
    cfg.initial = match c.initial.unwrap_or(defaults.initial) {
        InitialArg::Axis => InitialFrame::Axis,
        InitialArg::Random => InitialFrame::Random,
        InitialArg::Shared => InitialFrame::Shared,
    };
    cfg.harvest = defaults.harvest;
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    echo.push("steps", cfg.steps);
    echo.push("burn-in", cfg.burn_in);
    echo.push("stride", cfg.stride);
    echo.push("realizations", cfg.realizations);
    echo.push("seed", cfg.seed);
    echo.push("renorm-every", cfg.renorm_every);
    echo.push("reproject-every", cfg.reproject_every);
    echo.push(
        "initial",
        match cfg.initial {
            InitialFrame::Axis => "axis",
            InitialFrame::Random => "random",
            InitialFrame::Shared => "shared",
        },
    );
    let target = match c.target_rel_error {
        None => {
            if c.max_steps.is_some() {
                return Err(CliError::Config("max-steps needs target-rel-error".into()));
            }
            None
        }
        Some(t) if !(t > 0.0) => return Err(CliError::Config(format!("target-rel-error must be positive, got {t}"))),
        Some(t) => {
            let max = c.max_steps.unwrap_or(cfg.steps.saturating_mul(64));
            if max < cfg.steps {
                return Err(CliError::Config(format!("max-steps {max} is below steps {}", cfg.steps)));
            }
            echo.push("target-rel-error", format!("{t:?}"));
            echo.push("max-steps", max);
            Some(AdaptiveTarget { relative_error: t, exponents: Vec::new(), max_steps: max })
        }
    };
    Ok((cfg, target))
}

/// `start:stop:count` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("bad energy grid '{s}' (start:stop:count or a,b,c)"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        return match n {
            0 => Err(bad()),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        };
    }
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
}

/// The flag value selecting `kind`.
pub fn kind_flag(kind: ClosedFormKind) -> &'static str {
    match kind {
        ClosedFormKind::Exact => "exact",
        ClosedFormKind::SmallParameter => "small-parameter",
    }
}
