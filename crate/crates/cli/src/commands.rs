//! The simulation and evaluation subcommands.

use std::fmt::Write as _;
use std::path::Path;

use lyapunov::{run_adaptive, run_ensemble, run_ensemble_with, LyapunovEstimate};
use models::{build_normal_form, NormalFormBundle};
use perturbation::{class_ratios, closed_form_gamma, closed_form_spectrum, equidistant_spacing, DEFAULT_BAND_EDGE_TOL};
use rpp_stats::{Histogram, RppSample, RppSummary};
use symplectic_core::RppError;

use crate::args::{FormulaArgs, LyapunovArgs, RppArgs, ScanArgs};
use crate::config::{
    class_of, kind_flag, kind_of, parse_grid, resolve_chain, resolve_model, Echo, LYAPUNOV_DEFAULTS, RPP_DEFAULTS,
};
use crate::output::{emit, write_file};
use crate::CliError;

fn simulate(
    bundle: &NormalFormBundle,
    cfg: &lyapunov::ChainConfig,
    target: &Option<lyapunov::AdaptiveTarget>,
) -> Result<LyapunovEstimate, RppError> {
    match target {
        Some(t) => run_adaptive(bundle, cfg, t),
        None => Ok(run_ensemble(bundle, cfg)?.0),
    }
}

pub fn lyapunov(args: &LyapunovArgs) -> Result<(), CliError> {
    let mut echo = Echo::default();
    let params = resolve_model(&args.model, None, None, &mut echo)?;
    let (cfg, target) = resolve_chain(&args.chain, LYAPUNOV_DEFAULTS, &mut echo)?;
    let bundle = build_normal_form(&params)?;
    let est = simulate(&bundle, &cfg, &target)?;
    let mut csv = echo.header("lyapunov");
    if target.is_some() {
        let _ = writeln!(csv, "# adaptive run used {} steps per chain", est.steps);
    }
    csv.push_str("p,gamma,stderr,ln_kappa_p,channel_type\n");
    for (i, ch) in bundle.channels.channels.iter().enumerate() {
        let kind = if ch.is_elliptic() { "elliptic" } else { "hyperbolic" };
        let _ = writeln!(csv, "{},{:.12e},{:.6e},{:.12e},{kind}", i + 1, est.gamma[i], est.stderr[i], ch.ln_kappa());
    }
    emit(args.out.as_deref(), &csv)
}

pub fn spectrum_scan(args: &ScanArgs) -> Result<(), CliError> {
    let mut echo = Echo::default();
    let grid = match &args.e_grid {
        Some(g) => parse_grid(g)?,
        None => vec![args.model.energy.ok_or_else(|| CliError::Config("missing E-grid (or E)".into()))?],
    };
    let first = resolve_model(&args.model, None, Some(grid[0]), &mut echo)?;
    echo.entries.retain(|(k, _)| k != "E");
    echo.push("E-grid", args.e_grid.clone().unwrap_or_else(|| format!("{:?}", grid[0])));
    let (cfg, target) = resolve_chain(&args.chain, LYAPUNOV_DEFAULTS, &mut echo)?;
    let kind = kind_of(args.kind, first.model);
    let tol = args.band_edge_tol.unwrap_or(DEFAULT_BAND_EDGE_TOL);
    echo.push("kind", kind_flag(kind));
    echo.push("band-edge-tol", format!("{tol:?}"));
    let l = first.l;
    let smallest = args.smallest.unwrap_or(l).clamp(1, l);
    echo.push("smallest", smallest);
    let class = first.class();

    let mut rows = String::from("E,p,gamma_sim,stderr,gamma_formula\n");
    let mut notes = String::new();
    for &e in &grid {
        let mut params = first.clone();
        params.energy = e;
        let formula = match closed_form_spectrum(&params, class, kind, tol) {
            Ok(f) => f,
            Err(err @ (RppError::InternalBandEdge { .. } | RppError::DegenerateBlock { .. })) => {
                eprintln!("skipping E={e}: {err}");
                let _ = writeln!(notes, "# gap E={e:?}: {err}");
                continue;
            }
            Err(err) => return Err(err.into()),
        };
        let bundle = match build_normal_form(&params) {
            Ok(b) => b,
            Err(err) if err.is_numerical() => {
                eprintln!("skipping E={e}: {err}");
                let _ = writeln!(notes, "# gap E={e:?}: {err}");
                continue;
            }
            Err(err) => return Err(err.into()),
        };
        eprintln!("E={e}: simulating");
        let est = simulate(&bundle, &cfg, &target)?;
        if target.is_some() {
            let _ = writeln!(notes, "# E={e:?}: adaptive run used {} steps per chain", est.steps);
        }
        for p in (l - smallest + 1)..=l {
            let ch = &bundle.channels.channels[p - 1];
            let f = if ch.is_elliptic() {
                formula.iter().find(|(q, _)| *q == p).map(|(_, g)| *g).unwrap_or(f64::NAN)
            } else {
                ch.ln_kappa()
            };
            let _ = writeln!(rows, "{e:?},{p},{:.12e},{:.6e},{:.12e}", est.gamma[p - 1], est.stderr[p - 1], f);
        }
    }
    let mut csv = echo.header("spectrum-scan");
    csv.push_str(&notes);
    csv.push_str(&rows);
    emit(args.out.as_deref(), &csv)
}

fn histogram_csv(header: &str, h: &Histogram) -> String {
    let mut s = header.to_string();
    let _ = writeln!(s, "# samples={} outside={}", h.samples, h.outside);
    s.push_str("x,density,count\n");
    for ((x, d), c) in h.centers().iter().zip(&h.density).zip(&h.counts) {
        let _ = writeln!(s, "{x:.6},{d:.9e},{c}");
    }
    s
}

pub fn rpp(args: &RppArgs) -> Result<(), CliError> {
    let mut echo = Echo::default();
    let params = resolve_model(&args.model, None, None, &mut echo)?;
    let (cfg, target) = resolve_chain(&args.chain, RPP_DEFAULTS, &mut echo)?;
    if target.is_some() {
        return Err(CliError::Config("rpp runs fixed-length chains; drop target-rel-error".into()));
    }
    let bundle = build_normal_form(&params)?;
    let mask = bundle.channel_mask(true);
    let l_e = bundle.channels.l_e();
    if l_e < 2 {
        return Err(CliError::Config(format!("the model has {l_e} elliptic channels; rpp needs at least 2")));
    }
    let (est, harvested) = run_ensemble_with(&bundle, &cfg, |s| RppSample::from_uv(&s.uv, &mask))?;
    let samples: Vec<RppSample> = harvested.into_iter().collect::<Result<_, _>>()?;
    let sum = RppSummary::new(&samples)?;
    echo.push("L_e", l_e);

    let header = echo.header("rpp");
    let mut summary = header.clone();
    summary.push_str("statistic,value\n");
    let uv_law = if sum.uv.selected == 2 { "CUE" } else { "COE" };
    let stats: Vec<(&str, String)> = vec![
        ("snapshots", sum.samples.to_string()),
        ("l_e", sum.l_e.to_string()),
        ("ks_spacing_cue", format!("{:.6}", sum.ks_spacing_cue)),
        ("spacings_dropped", sum.spacing.spacings.dropped.to_string()),
        ("mean_spacing", format!("{:.9}", sum.spacing.spacings.mean_spacing)),
        ("polar_deviation_max", format!("{:.6e}", sum.polar_deviation_max)),
        ("ks_phase_uniform", format!("{:.6}", sum.ks_uniform)),
        ("ks_entry_modulus", format!("{:.6}", sum.ks_moduli)),
        ("uv_ks_coe", format!("{:.6}", sum.uv.ks_coe)),
        ("uv_ks_cue", format!("{:.6}", sum.uv.ks_cue)),
        ("uv_selected", uv_law.to_string()),
        ("uv_margin", format!("{:.6}", sum.uv.margin)),
        ("uv_fluctuation", format!("{:.6}", sum.uv.fluctuation)),
        ("offblock_rms", format!("{:.6e}", sum.structure.offblock_rms)),
        ("hyperbolic_deviation", format!("{:.6e}", sum.structure.hyperbolic_deviation)),
        ("gamma_min", format!("{:.9e}", est.gamma.last().copied().unwrap_or(f64::NAN))),
    ];
    for (k, v) in &stats {
        let _ = writeln!(summary, "{k},{v}");
    }
    match &args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
            let files = [
                ("spacing.csv", &sum.spacing.histogram),
                ("phase_density.csv", &sum.density),
                ("entry_modulus.csv", &sum.moduli),
                ("uv_spacing.csv", &sum.uv_spacing.histogram),
            ];
            for (name, h) in files {
                write_file(&dir.join(name), &histogram_csv(&header, h))?;
            }
            write_file(&dir.join("summary.csv"), &summary)?;
            print!("{summary}");
            Ok(())
        }
        None => emit(None, &summary),
    }
}

pub fn formula(args: &FormulaArgs) -> Result<(), CliError> {
    let mut echo = Echo::default();
    let params = resolve_model(&args.model, args.class, None, &mut echo)?;
    let class = args.class.map(class_of).unwrap_or_else(|| params.class());
    let kind = kind_of(args.kind, params.model);
    let tol = args.band_edge_tol.unwrap_or(DEFAULT_BAND_EDGE_TOL);
    echo.push("class", class.letter());
    echo.push("kind", kind_flag(kind));
    let mut out = echo.header("formula");
    let spectrum = match args.p {
        Some(p) => vec![(p, closed_form_gamma(&params, p, class, kind, tol)?.gamma)],
        None => closed_form_spectrum(&params, class, kind, tol)?,
    };
    let cf = closed_form_gamma(&params, params.l, class, kind, tol)?;
    out.push_str("p,gamma\n");
    for (p, g) in &spectrum {
        let _ = writeln!(out, "{p},{g:.12e}");
    }
    let _ = writeln!(out, "# L_e={} trace={:.12e}", cf.l_e, cf.trace);
    let _ = writeln!(
        out,
        "# equidistant spacing gamma_p - gamma_(p+1) = {:.12e}",
        equidistant_spacing(cf.trace, class, cf.l_e, params.lambda)
    );
    if let Ok((rc, ch)) = class_ratios(cf.l_e) {
        let _ = writeln!(out, "# class ratios at L_e={}: R/C = {rc:.12} C/H = {ch:.12}", cf.l_e);
    }
    emit(None, &out)
}

pub(crate) fn ensure_dir(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
    }
    Ok(())
}
