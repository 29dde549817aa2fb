use frames::UVPair;
use lyapunov::{run_chain, run_ensemble_with, ChainConfig};
use models::{build_normal_form, ModelParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rpp_stats::*;
use symplectic_core::random::random_hs_group;
use symplectic_core::{sample_haar_unitary, ComplexMatrix, SymmetryClass};

fn haar(n: usize, count: usize, seed: u64) -> Vec<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample_haar_unitary(n, &mut rng).unwrap()).collect()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn surmises_are_normalized_with_unit_mean() {
    for beta in [1, 2, 4] {
        let p = surmise(beta).unwrap();
        let norm = simpson(|s| p.pdf(s), 0.0, 12.0, 20_000);
        let mean = simpson(|s| s * p.pdf(s), 0.0, 12.0, 20_000);
        assert!((norm - 1.0).abs() < 1e-8, "beta {beta}: norm {norm}");
        assert!((mean - 1.0).abs() < 1e-8, "beta {beta}: mean {mean}");
        assert!((p.moment(0) - 1.0).abs() < 1e-12 && (p.moment(1) - 1.0).abs() < 1e-12);
        let partial = simpson(|s| p.pdf(s), 0.0, 0.8, 2_000);
        assert!((p.cdf(0.8) - partial).abs() < 1e-10);
        assert!((p.cdf(50.0) - 1.0).abs() < 1e-14);
    }
    assert!(surmise(3).is_err());
    assert!(surmise(0).is_err());
}

#[test]
fn cue_surmise_rises_quadratically() {
    let p = surmise(2).unwrap();
    assert_eq!(p.pdf(0.0), 0.0);
    let r = p.pdf(1e-3) / p.pdf(2e-3);
    assert!((r - 0.25).abs() < 1e-5, "{r}");
    assert_eq!(p.name(), "CUE");
}

#[test]
fn haar_spacings_follow_cue() {
    let us = haar(31, 9000, 1);
    let (hist, dev) = eigenphase_spacings(&us, None).unwrap();
    assert!(dev.iter().all(|&d| d == 0.0));
    assert_eq!(hist.spacings.values.len() + hist.spacings.dropped, 9000 * 31);
    let cue = surmise(2).unwrap();
    let ks = ks_statistic(&hist.spacings.values, |s| cue.cdf(s));
    assert!(ks < 0.05, "KS {ks}");
    let coe = surmise(1).unwrap();
    assert!(ks < ks_statistic(&hist.spacings.values, |s| coe.cdf(s)));
    assert!((hist.histogram.integral() - 1.0).abs() < 1e-6);
    let mean = hist.spacings.values.iter().sum::<f64>() / hist.spacings.values.len() as f64;
    assert!((mean - 1.0).abs() < 1e-12);
    assert!((hist.spacings.mean_spacing - 2.0 * std::f64::consts::PI / 31.0).abs() < 1e-9);
    assert!(!hist.is_degenerate());
}

#[test]
fn haar_phase_density_is_flat() {
    let us = haar(20, 500, 2);
    let sets: Vec<Vec<f64>> = us.iter().map(|u| eigenphases(u).unwrap()).collect();
    let (hist, pooled) = eigenphase_density(sets.iter().map(Vec::as_slice), 40).unwrap();
    assert!((hist.integral() - 1.0).abs() < 1e-9);
    let ks = ks_statistic(&pooled, uniform_phase_cdf);
    assert!(ks < 0.05, "KS {ks}");
}

#[test]
fn haar_entry_moduli_follow_the_invariant_law() {
    let n = 31;
    let us = haar(n, 120, 3);
    let mods: Vec<f64> = us.iter().flat_map(|u| entry_moduli(u, None).unwrap()).collect();
    assert!(mods.len() >= 100_000);
    let ks = ks_statistic(&mods, entry_modulus_cdf(n));
    assert!(ks < 0.05, "KS {ks}");
    assert!(ks_statistic(&mods, entry_modulus_cdf(n / 2)) > 0.1);
}

#[test]
fn entry_law_for_two_channels_is_the_disc() {
    let cdf = entry_modulus_cdf(2);
    for r in [0.0, 0.3, 0.7, 1.0] {
        assert!((cdf(r) - r * r).abs() < 1e-15);
        assert!((entry_modulus_pdf(2, r) - 2.0 * r).abs() < 1e-15);
    }
}

#[test]
fn identity_ensemble_is_degenerate() {
    let us = vec![ComplexMatrix::identity(6, 6); 20];
    let (hist, _) = eigenphase_spacings(&us, None).unwrap();
    assert!(hist.is_degenerate());
    assert_eq!(hist.spacings.dropped, 20 * 5);
    assert!(hist.spacings.values.iter().all(|&s| (s - 1.0).abs() < 1e-12));
    let sets: Vec<Vec<f64>> = us.iter().map(|u| eigenphases(u).unwrap()).collect();
    let (dens, _) = eigenphase_density(sets.iter().map(Vec::as_slice), 50).unwrap();
    let peak = dens.counts.iter().position(|&c| c > 0).unwrap();
    assert_eq!(dens.counts[peak], 120);
    assert!(dens.edges[peak] <= 0.0 && dens.edges[peak + 1] >= 0.0);
}

fn synthetic_uv(n: usize, count: usize, seed: u64, orthogonal: bool) -> Vec<UVPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = sample_haar_unitary(n, &mut rng).unwrap();
            let v = if orthogonal { u.conjugate() } else { sample_haar_unitary(n, &mut rng).unwrap() };
            UVPair::new(u, v).unwrap()
        })
        .collect()
}

#[test]
fn uv_statistic_separates_coe_and_cue() {
    let n = 20;
    let mask = vec![true; n];
    for (orthogonal, beta) in [(true, 1), (false, 2)] {
        let samples = RppSample::from_ensemble(&synthetic_uv(n, 1000, 4, orthogonal), &mask).unwrap();
        let sets: Vec<&[f64]> = samples.iter().map(|s| s.uv_phases.as_slice()).collect();
        let d = discriminate(&sets, DISCRIMINATION_GROUPS).unwrap();
        assert!(d.resolves(beta, 3.0), "expected beta {beta}: {d:?}");
        assert_eq!(d.groups, DISCRIMINATION_GROUPS);
    }
}

#[test]
fn summary_of_haar_pairs() {
    let n = 12;
    let mask: Vec<bool> = (0..n).map(|i| i >= 2).collect();
    let samples = RppSample::from_ensemble(&synthetic_uv(n, 400, 5, false), &mask).unwrap();
    let s = RppSummary::new(&samples).unwrap();
    assert_eq!(s.l_e, 10);
    assert_eq!(s.samples, 400);
    assert!(s.polar_deviation_max > 0.0);
    assert!(s.structure.offblock_rms > 0.5);
    for h in [&s.spacing.histogram, &s.density, &s.moduli, &s.uv_spacing.histogram] {
        assert!((h.integral() - 1.0).abs() < 1e-6);
    }
    assert!(RppSummary::new(&[]).is_err());
}

#[test]
fn zero_disorder_keeps_the_block_structure() {
    let bundle = build_normal_form(&ModelParams::magnetic(6, 2.5, 0.0, 0.3)).unwrap();
    assert!(bundle.channels.l_h() > 0 && bundle.channels.l_e() > 0);
    let mut cfg = ChainConfig::new(400, 1, 1);
    cfg.harvest = true;
    let (_, ens) = run_chain(&bundle, &cfg).unwrap();
    let us: Vec<ComplexMatrix> = ens.snapshots.iter().map(|s| s.uv.u.clone()).collect();
    let b = block_structure_check(&us, &bundle.channel_mask(true)).unwrap();
    assert!(b.offblock_rms < 1e-10 && b.hyperbolic_deviation < 1e-10, "{b:?}");
    assert_eq!(b.samples, 30);
}

#[test]
fn offblock_norm_scales_with_disorder() {
    let run = |lambda: f64| {
        let bundle = build_normal_form(&ModelParams::magnetic(6, 2.5, lambda, 0.3)).unwrap();
        let mask = bundle.channel_mask(true);
        let mut cfg = ChainConfig::new(1000, 4, 9);
        cfg.harvest = true;
        let (_, norms) = run_ensemble_with(&bundle, &cfg, |s| block_norms(&s.uv.u, &mask).unwrap()).unwrap();
        BlockStructure::from_norms(&norms).unwrap()
    };
    let (a, b) = (run(0.2), run(0.1));
    let ratio = (a.offblock_rms / b.offblock_rms).powi(2);
    assert!(ratio >= 2.0, "offblock² ratio {ratio}");
}

#[test]
fn polar_decomposition_of_identity() {
    let d = polar_diagnostic(&ComplexMatrix::identity(8, 8)).unwrap();
    assert!(d.lambda.iter().all(|&x| x.abs() < 1e-14));
    assert!(d.residual < 1e-12);
}

#[test]
fn polar_decomposition_of_random_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for class in [SymmetryClass::Real, SymmetryClass::Complex, SymmetryClass::Quaternion] {
        let n = class.ambient_size(4);
        let mut t = ComplexMatrix::identity(2 * n, 2 * n);
        for _ in 0..50 {
            t = random_hs_group(n, class, 0.1, &mut rng).unwrap() * t;
        }
        let d = polar_diagnostic(&t).unwrap();
        let scale = 1.0 + d.lambda.last().unwrap();
        assert!(d.residual / scale < 1e-8, "{class:?}: {}", d.residual);
        assert!(d.lambda.windows(2).all(|w| w[0] <= w[1]) && d.lambda[0] >= 0.0);
        for m in [&d.u, &d.v, &d.u_prime, &d.v_prime] {
            assert!(symplectic_core::linalg::unitarity_residual(m) < 1e-6);
        }
    }
}

#[test]
fn polar_growth_matches_lyapunov_exponent() {
    let bundle = build_normal_form(&ModelParams::real(4, 1.0, 0.0)).unwrap();
    let steps = 150;
    let w = vec![0.0; bundle.sites()];
    let step = bundle.normal_transfer(&w).unwrap();
    let mut t = ComplexMatrix::identity(step.nrows(), step.nrows());
    for _ in 0..steps {
        t = &step * t;
    }
    let d = polar_diagnostic(&t).unwrap();
    let top = bundle.channels.ln_kappa().into_iter().fold(0.0, f64::max);
    assert!((d.top_growth_rate(steps) - top).abs() < 2f64.ln() / steps as f64 + 1e-12);

    let lambda = 0.3;
    let bundle = build_normal_form(&ModelParams::real(4, 1.0, lambda)).unwrap();
    let (est, _) = run_chain(&bundle, &ChainConfig::new(100_000, 1, 7)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rates: Vec<f64> = (0..8)
        .map(|_| {
            let mut t = ComplexMatrix::identity(step.nrows(), step.nrows());
            for _ in 0..steps {
                let w = bundle.sample_disorder(&mut rng);
                t = bundle.normal_transfer(&w).unwrap() * t;
            }
            polar_diagnostic(&t).unwrap().top_growth_rate(steps)
        })
        .collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    assert!((mean - est.gamma[0]).abs() / est.gamma[0] < 0.05, "{mean} vs {}", est.gamma[0]);
}

#[test]
fn polar_rejects_non_symplectic_input() {
    let mut t = ComplexMatrix::identity(4, 4);
    t[(0, 0)] = symplectic_core::cr(2.0);
    assert!(polar_diagnostic(&t).is_err());
}

proptest! {
    #[test]
    fn spacings_have_unit_mean(sets in prop::collection::vec(prop::collection::vec(-3.1f64..3.1, 2..12), 1..8)) {
        let sorted: Vec<Vec<f64>> = sets.into_iter().map(|mut s| { s.sort_by(f64::total_cmp); s }).collect();
        let sp = spacings(sorted.iter().map(Vec::as_slice));
        prop_assume!(!sp.values.is_empty());
        let mean = sp.values.iter().sum::<f64>() / sp.values.len() as f64;
        prop_assert!((mean - 1.0).abs() < 1e-12);
        prop_assert!(sp.values.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn histograms_integrate_to_one(xs in prop::collection::vec(-1.0f64..5.0, 1..200), bins in 1usize..60) {
        let h = Histogram::new(&xs, bins, 0.0, 4.0).unwrap();
        prop_assume!(h.samples > h.outside);
        prop_assert!((h.integral() - 1.0).abs() < 1e-9);
        prop_assert_eq!(h.counts.iter().sum::<usize>() + h.outside, xs.len());
    }

    #[test]
    fn ks_is_a_distance(xs in prop::collection::vec(0.0f64..3.0, 1..100)) {
        let p = surmise(2).unwrap();
        let d = ks_statistic(&xs, |s| p.cdf(s));
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
