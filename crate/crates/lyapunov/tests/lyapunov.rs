use lyapunov::{run_adaptive, run_chain, run_ensemble, run_ensemble_with, AdaptiveTarget, AnyChain, ChainConfig, InitialFrame};
use models::{build_normal_form, ModelParams};
use proptest::prelude::*;
use symplectic_core::RppError;

fn quiet(steps: usize, realizations: usize, seed: u64) -> ChainConfig {
    ChainConfig::new(steps, realizations, seed)
}

#[test]
fn zero_disorder_is_deterministic_growth() {
    let cases = [
        ModelParams::magnetic(6, 2.5, 0.0, 0.3),
        ModelParams::real(7, 1.31, 0.0),
        ModelParams::ando(4, 1.0, 0.0, 0.3),
    ];
    for params in cases {
        let bundle = build_normal_form(&params).unwrap();
        let (est, _) = run_chain(&bundle, &quiet(600, 1, 1)).unwrap();
        let ln_kappa = bundle.channels.ln_kappa();
        assert!(bundle.channels.l_h() > 0, "{params:?} has no hyperbolic channel");
        for (p, (g, k)) in est.gamma.iter().zip(&ln_kappa).enumerate() {
            assert!((g - k).abs() < 1e-12, "{:?} p={} gamma={g} ln|kappa|={k}", params.model, p + 1);
        }
    }
}

#[test]
fn single_channel_weak_disorder() {
    let lambda = 0.1;
    let bundle = build_normal_form(&ModelParams::real(1, 1.0, lambda)).unwrap();
    let k = 0.5f64.acos();
    let exact = lambda * lambda / (8.0 * k.sin().powi(2));
    let (est, _) = run_ensemble(&bundle, &quiet(4_000_000, 8, 11)).unwrap();
    let rel = (est.gamma[0] - exact).abs() / exact;
    assert!(rel < 0.03, "gamma {} vs {exact} (stderr {})", est.gamma[0], est.stderr[0]);
}

#[test]
fn same_seed_is_bitwise_reproducible() {
    let bundle = build_normal_form(&ModelParams::magnetic(5, 0.7, 0.3, 0.2)).unwrap();
    let mut cfg = quiet(800, 3, 5);
    cfg.harvest = true;
    let (a, fa) = run_ensemble(&bundle, &cfg).unwrap();
    let (b, fb) = run_ensemble(&bundle, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(fa, fb);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (c, fc) = pool.install(|| run_ensemble(&bundle, &cfg)).unwrap();
    assert_eq!(a, c);
    assert_eq!(fa, fc);
    let (d, _) = run_ensemble(&bundle, &quiet(800, 3, 6)).unwrap();
    assert_ne!(a.gamma, d.gamma);
}

#[test]
fn one_realization_matches_run_chain() {
    let bundle = build_normal_form(&ModelParams::real(4, 0.4, 0.4)).unwrap();
    let mut cfg = quiet(1000, 1, 3);
    cfg.harvest = true;
    let (a, fa) = run_chain(&bundle, &cfg).unwrap();
    let (b, fb) = run_ensemble(&bundle, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(fa, fb);
    assert!(a.stderr.iter().all(|s| s.is_finite() && *s > 0.0));
}

#[test]
fn stderr_scales_with_realizations() {
    let bundle = build_normal_form(&ModelParams::real(6, 0.4, 0.5)).unwrap();
    let (few, _) = run_ensemble(&bundle, &quiet(2000, 25, 21)).unwrap();
    let (many, _) = run_ensemble(&bundle, &quiet(2000, 100, 22)).unwrap();
    let ratios: Vec<f64> = few.stderr.iter().zip(&many.stderr).map(|(a, b)| a / b).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 2.0).abs() <= 0.3, "ratios {ratios:?}");
}

#[test]
fn initial_frame_does_not_matter() {
    let bundle = build_normal_form(&ModelParams::magnetic(4, 0.5, 0.5, 0.15)).unwrap();
    let axis = quiet(20_000, 8, 9);
    let random = ChainConfig { initial: InitialFrame::Random, seed: 10, ..axis.clone() };
    let (a, _) = run_ensemble(&bundle, &axis).unwrap();
    let (b, _) = run_ensemble(&bundle, &random).unwrap();
    for p in 0..a.len() {
        let tol = 4.0 * a.stderr[p].hypot(b.stderr[p]);
        assert!((a.gamma[p] - b.gamma[p]).abs() < tol, "p={} {} vs {}", p + 1, a.gamma[p], b.gamma[p]);
    }
}

#[test]
fn spectrum_is_nonnegative_and_ordered() {
    for params in [
        ModelParams::real(5, 0.3, 0.6),
        ModelParams::magnetic(5, 0.3, 0.6, 0.2),
        ModelParams::ando(3, 0.3, 0.6, 0.4),
    ] {
        let bundle = build_normal_form(&params).unwrap();
        let (est, _) = run_ensemble(&bundle, &quiet(20_000, 4, 2)).unwrap();
        for p in 0..est.len() {
            assert!(est.gamma[p] > -3.0 * est.stderr[p], "{:?} {est:?}", params.model);
            if p + 1 < est.len() {
                let tol = 3.0 * est.stderr[p].hypot(est.stderr[p + 1]);
                assert!(est.gamma[p] >= est.gamma[p + 1] - tol, "{:?} {:?}", params.model, est.gamma);
            }
        }
    }
}

#[test]
fn quaternion_chain_tracks_real_chain_at_small_t() {
    let real = build_normal_form(&ModelParams::real(3, 0.3, 0.5)).unwrap();
    let ando = build_normal_form(&ModelParams::ando(3, 0.3, 0.5, 1e-3)).unwrap();
    let (r, _) = run_ensemble(&real, &quiet(40_000, 8, 4)).unwrap();
    let (h, _) = run_ensemble(&ando, &quiet(40_000, 8, 4)).unwrap();
    assert_eq!(r.len(), h.len());
    let mut rs = r.gamma.clone();
    let mut hs = h.gamma.clone();
    rs.sort_by(|a, b| b.total_cmp(a));
    hs.sort_by(|a, b| b.total_cmp(a));
    for p in 0..rs.len() {
        let tol = 4.0 * r.stderr[p].hypot(h.stderr[p]) + 0.01 * rs[p].abs();
        assert!((rs[p] - hs[p]).abs() < tol, "p={} real {} ando {}", p + 1, rs[p], hs[p]);
    }
}

#[test]
fn snapshot_policy() {
    let bundle = build_normal_form(&ModelParams::magnetic(3, 0.5, 0.2, 0.23)).unwrap();
    let mut cfg = quiet(1000, 100, 0);
    cfg.harvest = true;
    let (est, steps) = run_ensemble_with(&bundle, &cfg, |s| (s.realization, s.step)).unwrap();
    assert_eq!(steps.len(), 9000);
    assert_eq!(est.realizations, 100);
    for (i, &(r, s)) in steps.iter().enumerate() {
        assert_eq!(r, i / 90);
        assert_eq!(s, 100 + 10 * (i % 90 + 1));
    }
    cfg.harvest = false;
    let (_, none) = run_ensemble(&bundle, &cfg).unwrap();
    assert!(none.is_empty());
}

#[test]
fn invalid_configs_are_rejected() {
    let bundle = build_normal_form(&ModelParams::real(2, 0.3, 0.1)).unwrap();
    for cfg in [
        ChainConfig { burn_in: 100, ..quiet(100, 1, 0) },
        ChainConfig { stride: 0, ..quiet(1000, 1, 0) },
        ChainConfig { realizations: 0, ..quiet(1000, 1, 0) },
        ChainConfig { renorm_every: 3, ..quiet(1000, 1, 0) },
    ] {
        assert!(matches!(run_ensemble(&bundle, &cfg), Err(RppError::InvalidArgument(_))), "{cfg:?}");
    }
}

#[test]
fn sparse_renormalization_agrees() {
    let bundle = build_normal_form(&ModelParams::real(4, 0.6, 0.4)).unwrap();
    let every = quiet(20_000, 4, 8);
    let sparse = ChainConfig { renorm_every: 5, ..every.clone() };
    let (a, _) = run_ensemble(&bundle, &every).unwrap();
    let (b, _) = run_ensemble(&bundle, &sparse).unwrap();
    for p in 0..a.len() {
        assert!((a.gamma[p] - b.gamma[p]).abs() < 1e-9, "p={} {} vs {}", p + 1, a.gamma[p], b.gamma[p]);
    }
}

#[test]
fn adaptive_run_reaches_target() {
    let bundle = build_normal_form(&ModelParams::real(2, 0.5, 0.5)).unwrap();
    let target = AdaptiveTarget { relative_error: 0.02, exponents: vec![2], max_steps: 2_000_000 };
    let est = run_adaptive(&bundle, &quiet(1000, 4, 1), &target).unwrap();
    assert!(est.relative_error(2) <= 0.02, "{est:?}");
    assert!(est.steps > 1000 && est.steps <= 2_000_000);
    let capped = AdaptiveTarget { relative_error: 1e-9, exponents: vec![], max_steps: 5000 };
    let est = run_adaptive(&bundle, &quiet(1000, 2, 1), &capped).unwrap();
    assert_eq!(est.steps, 5000);
    assert_eq!(est.chains[0].counted_steps, 4900);
}

#[test]
fn resumed_chain_equals_straight_run() {
    let bundle = build_normal_form(&ModelParams::magnetic(3, 0.2, 0.3, 0.1)).unwrap();
    let cfg = quiet(3000, 1, 17);
    let mut a = AnyChain::new(&bundle, &cfg, 0).unwrap();
    a.advance(3000, &mut |_| {}).unwrap();
    let mut b = AnyChain::new(&bundle, &cfg, 0).unwrap();
    for _ in 0..3 {
        b.advance(1000, &mut |_| {}).unwrap();
    }
    assert_eq!(a.summary(), b.summary());
    assert_eq!(a.step(), 3000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn frames_stay_isotropic(seed in 0u64..1000, l in 1usize..5, model in 0usize..3, lambda in 0.05f64..1.0) {
        let params = match model {
            0 => ModelParams::real(l, 0.37, lambda),
            1 => ModelParams::magnetic(l, 0.37, lambda, 0.21),
            _ => ModelParams::ando(l, 0.37, lambda, 0.3),
        };
        let bundle = build_normal_form(&params).unwrap();
        let cfg = ChainConfig { reproject_every: 0, ..quiet(1000, 1, seed) };
        let mut chain = AnyChain::new(&bundle, &cfg, 0).unwrap();
        chain.advance(1000, &mut |_| {}).unwrap();
        let res = chain.frame().unwrap().residual().unwrap();
        prop_assert!(res.max() < 1e-9, "{res:?}");
        let s = chain.summary();
        prop_assert!(s.gamma.iter().all(|g| g.is_finite()));
    }
}
