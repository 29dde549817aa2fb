//! Self-check suites behind `rpp verify`.

use std::time::Instant;

use frames::{act, act_unchecked, random_frame, torus_covariance_check};
use lyapunov::{run_ensemble, ChainConfig};
use models::ando::{printed_b, s_eta};
use models::{build_normal_form, ModelParams};
use nalgebra::DVector;
use perturbation::{cocycle_expansion, exact_cocycle, haar_moment_check, ipq_coefficient};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpp_stats::{eigenphase_spacings, ks_statistic, surmise};
use symplectic_core::forms::{form_residual, j_form};
use symplectic_core::linalg::max_abs_diff;
use symplectic_core::random::{random_hs_algebra, random_hs_group};
use symplectic_core::{c, sample_haar_unitary, ComplexMatrix, Result, SymmetryClass, ONE};

use crate::args::{Fault, VerifyLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Known, expected discrepancy; never fails the run.
    ExpectedWarning,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    /// `module/invariant`.
    pub id: String,
    pub outcome: Outcome,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::ExpectedWarning => "WARN (expected)",
        };
        format!("{tag} {} [{:.2}s]: {}", self.id, self.seconds, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| c.outcome == Outcome::Fail).collect()
    }
}

const CLASSES: [SymmetryClass; 3] = [SymmetryClass::Real, SymmetryClass::Complex, SymmetryClass::Quaternion];

/// `(worst, tolerance)` of a check; passes when `worst ≤ tolerance`.
type Measure = Result<(f64, f64)>;

fn record(report: &mut VerifyReport, id: &str, f: impl FnOnce() -> Measure) {
    let start = Instant::now();
    let (outcome, detail) = match f() {
        Ok((worst, tol)) if worst <= tol => (Outcome::Pass, format!("{worst:.3e} <= {tol:.1e}")),
        Ok((worst, tol)) => (Outcome::Fail, format!("{worst:.3e} > {tol:.1e}")),
        Err(e) => (Outcome::Fail, format!("error: {e}")),
    };
    report.checks.push(CheckResult { id: id.into(), outcome, detail, seconds: start.elapsed().as_secs_f64() });
}

fn op(class: SymmetryClass, l: usize, scale: f64, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix> {
    random_hs_group(class.ambient_size(l), class, scale, rng)
}

fn membership(rng: &mut ChaCha8Rng, fault: Option<Fault>) -> Measure {
    let mut worst: f64 = 0.0;
    for class in CLASSES {
        let n = class.ambient_size(3);
        let mut j = j_form(n);
        if fault == Some(Fault::CorruptJ) {
            for k in 0..n {
                j[(k, n + k)] = ONE;
            }
        }
        for _ in 0..20 {
            worst = worst.max(form_residual(&op(class, 3, 0.7, rng)?, &j)?);
        }
    }
    Ok((worst, 1e-10))
}

fn cocycle_identity(rng: &mut ChaCha8Rng) -> Measure {
    let mut worst: f64 = 0.0;
    for class in CLASSES {
        for _ in 0..50 {
            let (t, tp) = (op(class, 3, 0.6, rng)?, op(class, 3, 0.6, rng)?);
            let phi = random_frame(class, 3, rng)?;
            let (_, s_prod) = act(&(&t * &tp), &phi)?;
            let (mid, s_tp) = act(&tp, &phi)?;
            let (_, s_t) = act(&t, &mid)?;
            worst = worst.max(max_abs_diff(s_prod.matrix(), &(s_t.matrix() * s_tp.matrix())));
        }
    }
    Ok((worst, 1e-9))
}

fn torus_element(class: SymmetryClass, n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let phase = |a: f64| c(a.cos(), a.sin());
    let d: Vec<_> = match class {
        SymmetryClass::Real => (0..n).map(|_| if rng.random::<bool>() { ONE } else { -ONE }).collect(),
        SymmetryClass::Complex => (0..n).map(|_| phase(rng.random_range(-3.1..3.1))).collect(),
        SymmetryClass::Quaternion => (0..n / 2)
            .flat_map(|_| {
                let z = phase(rng.random_range(-3.1..3.1));
                [z, z.conj()]
            })
            .collect(),
    };
    ComplexMatrix::from_diagonal(&DVector::from_vec(d))
}

fn torus_covariance(rng: &mut ChaCha8Rng) -> Measure {
    let mut worst: f64 = 0.0;
    for class in CLASSES {
        for _ in 0..20 {
            let t = op(class, 3, 0.7, rng)?;
            let phi = random_frame(class, 3, rng)?;
            let tor = torus_element(class, class.ambient_size(3), rng);
            worst = worst.max(torus_covariance_check(&t, &phi, &tor)?);
        }
    }
    Ok((worst, 1e-9))
}

fn sum_rule() -> Measure {
    let mut worst: f64 = 0.0;
    for class in CLASSES {
        let start = if class == SymmetryClass::Quaternion { 2 } else { 1 };
        for l_e in start..=40 {
            let sum = (l_e as f64 - 1.0) * ipq_coefficient(class, l_e, false) + ipq_coefficient(class, l_e, true);
            worst = worst.max((sum - 0.25 / l_e as f64).abs());
        }
    }
    Ok((worst, 1e-14))
}

fn long_chain(rng: &mut ChaCha8Rng) -> Measure {
    let mut worst: f64 = 0.0;
    for class in CLASSES {
        let ops: Vec<ComplexMatrix> = (0..16).map(|_| op(class, 2, 0.4, rng)).collect::<Result<_>>()?;
        let mut phi = random_frame(class, 2, rng)?;
        for step in 1..=10_000 {
            phi = act_unchecked(&ops[step % ops.len()], &phi)?.0;
            if step % 100 == 0 {
                worst = worst.max(phi.reproject()?.max());
            }
        }
        worst = worst.max(phi.residual()?.max());
    }
    Ok((worst, 1e-8))
}

fn reconstruction(rng: &mut ChaCha8Rng) -> Measure {
    let models = [
        ModelParams::real(4, 1.0, 0.3),
        ModelParams::magnetic(4, 1.0, 0.3, 0.4),
        ModelParams::ando(3, 1.0, 0.3, 0.3),
        ModelParams::slab(3, 3, 0.5, 0.3, vec![0.2, 0.5]),
    ];
    let mut worst: f64 = 0.0;
    for p in models {
        let b = build_normal_form(&p)?;
        for _ in 0..3 {
            worst = worst.max(b.reconstruction_residual(&b.sample_disorder(rng))?);
        }
    }
    Ok((worst, 1e-9))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Worst `|slope − 3|` of the expansion residual over random draws of a
/// unit-norm generator.
pub fn expansion_order(draws: usize, l: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let lambdas: Vec<f64> = (0..9).map(|i| 10f64.powf(-1.0 - 0.25 * i as f64)).collect();
    let logs: Vec<f64> = lambdas.iter().map(|x| x.ln()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let class = CLASSES[i % 3];
        let phi = random_frame(class, l, rng)?;
        let p = random_hs_algebra(class.ambient_size(l), class, 1.0, rng)?;
        let p = p.unscale(p.norm());
        let ch = 1 + rng.random_range(0..l);
        let errs: Vec<f64> = lambdas
            .iter()
            .map(|&x| Ok((exact_cocycle(&p, &phi, ch, x)? - cocycle_expansion(&p, &phi, ch, x)?).abs().ln()))
            .collect::<Result<_>>()?;
        worst = worst.max((slope(&logs, &errs) - 3.0).abs());
    }
    Ok(worst)
}

fn single_channel(seed: u64) -> Measure {
    let lambda = 0.1;
    let bundle = build_normal_form(&ModelParams::real(1, 1.0, lambda))?;
    let (est, _) = run_ensemble(&bundle, &ChainConfig::new(1_000_000, 4, seed))?;
    let exact = lambda * lambda / (8.0 * 0.5f64.acos().sin().powi(2));
    Ok(((est.gamma[0] - exact).abs() / exact, 0.05))
}

fn haar_spacings(rng: &mut ChaCha8Rng) -> Measure {
    let us: Vec<ComplexMatrix> = (0..2000).map(|_| sample_haar_unitary(20, rng)).collect::<Result<_>>()?;
    let (h, _) = eigenphase_spacings(&us, None)?;
    let cue = surmise(2)?;
    Ok((ks_statistic(&h.spacings.values, |s| cue.cdf(s)), 0.05))
}

fn printed_b_note() -> CheckResult {
    let (e, t, eta) = (1.0, 0.3, 0.7);
    let s = s_eta(e, t, eta);
    let a = s.trace();
    let b = 0.5 * (a * a - (&s * &s).trace());
    CheckResult {
        id: "models/spin-orbit-b-coefficient".into(),
        outcome: Outcome::ExpectedWarning,
        detail: format!(
            "printed closed form b = {:.6} disagrees with the trace value {b:.6} at E={e}, t={t}, eta={eta}; trace value used",
            printed_b(e, t, eta)
        ),
        seconds: 0.0,
    }
}

pub fn run_verify(level: VerifyLevel, seed: u64, fault: Option<Fault>) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    record(&mut report, "symplectic-core/membership", || membership(&mut rng, fault));
    record(&mut report, "frames/cocycle-identity", || cocycle_identity(&mut rng));
    record(&mut report, "frames/torus-covariance", || torus_covariance(&mut rng));
    record(&mut report, "perturbation/sum-rule", sum_rule);
    record(&mut report, "frames/long-chain-invariants", || long_chain(&mut rng));
    record(&mut report, "models/normal-form-reconstruction", || reconstruction(&mut rng));
    if level == VerifyLevel::Full {
        record(&mut report, "perturbation/expansion-order", || Ok((expansion_order(12, 4, &mut rng)?, 0.2)));
        record(&mut report, "perturbation/haar-moments", || {
            Ok((haar_moment_check(4, 40_000, seed)?.max_sigmas(), 4.0))
        });
        record(&mut report, "lyapunov/single-channel", || single_channel(seed));
        record(&mut report, "rpp-stats/haar-spacings", || haar_spacings(&mut rng));
        report.checks.push(printed_b_note());
    }
    report
}
