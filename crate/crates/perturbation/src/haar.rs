//! Monte Carlo check of the second and fourth Haar moments on `U(n)` and
//! of the trace identities built from them.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use symplectic_core::random::ginibre;
use symplectic_core::{c, sample_haar_unitary, ComplexMatrix, Result, RppError, C64};

/// One Monte Carlo average against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub name: String,
    pub expected: C64,
    pub mean: C64,
    /// Standard errors of the real and imaginary parts.
    pub stderr: (f64, f64),
}

impl MomentCheck {
    pub fn deviation(&self) -> f64 {
        (self.mean - self.expected).norm()
    }

    /// Larger of the real and imaginary deviations in units of their
    /// standard errors (deviations below 1e-12 count as zero).
    pub fn sigmas(&self) -> f64 {
        let d = self.mean - self.expected;
        let part = |x: f64, s: f64| {
            if x.abs() < 1e-12 {
                0.0
            } else if s > 0.0 {
                x.abs() / s
            } else {
                f64::INFINITY
            }
        };
        part(d.re, self.stderr.0).max(part(d.im, self.stderr.1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub samples: usize,
    pub checks: Vec<MomentCheck>,
}

impl MomentReport {
    pub fn max_sigmas(&self) -> f64 {
        self.checks.iter().map(MomentCheck::sigmas).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&MomentCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

type Estimator = Box<dyn Fn(&ComplexMatrix) -> C64 + Sync>;

struct Target {
    name: String,
    expected: C64,
    f: Estimator,
}

const CHUNK: usize = 1024;

/// Accumulates `(Σx, Σx²)` per part for every target.
fn monte_carlo(n: usize, samples: usize, seed: u64, targets: Vec<Target>) -> Result<Vec<MomentCheck>> {
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Result<Vec<[f64; 4]>>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let mut acc = vec![[0.0; 4]; targets.len()];
            let count = CHUNK.min(samples - ci * CHUNK);
            for _ in 0..count {
                let u = sample_haar_unitary(n, &mut rng)?;
                for (a, t) in acc.iter_mut().zip(&targets) {
                    let z = (t.f)(&u);
                    a[0] += z.re;
                    a[1] += z.re * z.re;
                    a[2] += z.im;
                    a[3] += z.im * z.im;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![[0.0; 4]; targets.len()];
    for part in partial {
        for (t, a) in total.iter_mut().zip(part?) {
            for k in 0..4 {
                t[k] += a[k];
            }
        }
    }
    let m = samples as f64;
    let se = |s: f64, s2: f64| ((s2 / m - (s / m).powi(2)).max(0.0) * m / (m - 1.0) / m).sqrt();
    Ok(targets
        .into_iter()
        .zip(total)
        .map(|(t, a)| MomentCheck {
            name: t.name,
            expected: t.expected,
            mean: c(a[0] / m, a[2] / m),
            stderr: (se(a[0], a[1]), se(a[2], a[3])),
        })
        .collect())
}

fn tr(m: &ComplexMatrix) -> C64 {
    m.trace()
}

fn entry_targets(n: usize) -> Vec<Target> {
    let nf = n as f64;
    let q = |k: usize, l: usize, m_: usize, nn: usize, p: usize, qq: usize| -> Estimator {
        Box::new(move |u: &ComplexMatrix| u[(k, p)].conj() * u[(l, qq)].conj() * u[(m_, qq)] * u[(nn, p)])
    };
    vec![
        Target { name: "first moment".into(), expected: c(0.0, 0.0), f: Box::new(|u| u[(0, 0)]) },
        Target { name: "moment 1".into(), expected: c(1.0 / nf, 0.0), f: Box::new(|u| u[(0, 1)].conj() * u[(0, 1)]) },
        Target { name: "moment 2".into(), expected: c(1.0 / (nf * nf - 1.0), 0.0), f: q(0, 1, 1, 0, 0, 1) },
        Target { name: "moment 3".into(), expected: c(-1.0 / (nf * (nf * nf - 1.0)), 0.0), f: q(0, 1, 0, 1, 0, 1) },
        Target { name: "moment 4".into(), expected: c(1.0 / (nf * (nf + 1.0)), 0.0), f: q(0, 0, 0, 0, 0, 1) },
        Target { name: "moment 5a".into(), expected: c(1.0 / (nf * (nf + 1.0)), 0.0), f: q(0, 1, 1, 0, 0, 0) },
        Target { name: "moment 5b".into(), expected: c(1.0 / (nf * (nf + 1.0)), 0.0), f: q(0, 1, 0, 1, 0, 0) },
        Target { name: "moment 6".into(), expected: c(2.0 / (nf * (nf + 1.0)), 0.0), f: q(0, 0, 0, 0, 0, 0) },
    ]
}

fn trace_targets(n: usize, mats: [ComplexMatrix; 4]) -> Vec<Target> {
    let nf = n as f64;
    let k1 = c(1.0 / (nf * nf - 1.0), 0.0);
    let k2 = c(1.0 / (nf * (nf * nf - 1.0)), 0.0);
    let [a, b, cm, d] = &mats;
    let (ct, dt) = (cm.transpose(), d.transpose());
    let (tra, trb, trc, trd) = (tr(a), tr(b), tr(cm), tr(d));
    let (ac, bd, act, bdt) = (tr(&(a * cm)), tr(&(b * d)), tr(&(a * &ct)), tr(&(b * &dt)));
    let i = tra * trb / nf;
    let ii = tr(&(a * b.transpose())) / nf;
    let iii = k1 * (tra * trc * bd + ac * trb * trd) - k2 * (ac * bd + tra * trb * trc * trd);
    let iv = k1 * (tra * trc * bd + act * bdt) - k2 * (act * bd + tra * trc * bdt);
    let v = k1 * (act * bdt + ac * trb * trd) - k2 * (ac * bdt + act * trb * trd);
    let m = Arc::new(mats);
    let mk = |name: &str, expected: C64, f: fn(&[ComplexMatrix; 4], &ComplexMatrix) -> C64| {
        let m = Arc::clone(&m);
        Target { name: name.into(), expected, f: Box::new(move |u| f(&m, u)) }
    };
    vec![
        mk("trace identity i", i, |[a, b, ..], u| tr(&(u.adjoint() * a * u * b))),
        mk("trace identity ii", ii, |[a, b, ..], u| tr(&(u.conjugate() * a * u * b))),
        mk("trace identity iii", iii, |[a, b, c_, d], u| {
            let us = u.adjoint();
            tr(&(&us * a * u * b * &us * c_ * u * d))
        }),
        mk("trace identity iv", iv, |[a, b, c_, d], u| {
            tr(&(u.adjoint() * a * u * b * u.transpose() * c_ * u.conjugate() * d))
        }),
        mk("trace identity v", v, |[a, b, c_, d], u| {
            tr(&(u.adjoint() * a * u.conjugate() * b * u.transpose() * c_ * u * d))
        }),
        mk("trace identity iii conjugated", iii, |[a, b, c_, d], u| {
            let (ut, ub) = (u.transpose(), u.conjugate());
            tr(&(&ut * a * &ub * b * &ut * c_ * &ub * d))
        }),
    ]
}

/// Second and fourth moments, a vanishing first moment, and the trace identities
/// for fixed random `A, B, C, D` drawn from `seed`.
pub fn haar_moment_check(n: usize, samples: usize, seed: u64) -> Result<MomentReport> {
    if n < 2 || samples < 2 {
        return Err(RppError::InvalidArgument(format!("need n >= 2 and samples >= 2, got n={n}, samples={samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ab1e);
    let mats = [0, 1, 2, 3].map(|_| ginibre(n, n, &mut rng));
    let mut targets = entry_targets(n);
    targets.extend(trace_targets(n, mats));
    Ok(MomentReport { n, samples, checks: monte_carlo(n, samples, seed, targets)? })
}

/// Trace identities for caller-supplied `A, B, C, D`.
pub fn trace_identity_check(mats: [ComplexMatrix; 4], samples: usize, seed: u64) -> Result<MomentReport> {
    let n = mats[0].nrows();
    if n < 2 || mats.iter().any(|m| m.shape() != (n, n)) {
        return Err(RppError::InvalidArgument("need four square matrices of equal size n >= 2".into()));
    }
    Ok(MomentReport { n, samples, checks: monte_carlo(n, samples, seed, trace_targets(n, mats))? })
}
