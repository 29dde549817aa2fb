use frames::{frame_of_uv, random_frame, IsotropicFrame, UVPair};
use models::ModelParams;
use perturbation::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symplectic_core::linalg::frobenius;
use symplectic_core::random::{random_hermitian, random_hs_algebra, random_hs_selfadjoint};
use symplectic_core::{cr, i_form, sample_haar_unitary, ComplexMatrix, RppError, SymmetryClass, C64};

const CLASSES: [SymmetryClass; 3] = SymmetryClass::ALL;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn zero_generator_has_zero_expansion() {
    let mut r = rng(1);
    for class in CLASSES {
        let phi = random_frame(class, 3, &mut r).unwrap();
        let n = 2 * class.ambient_size(3);
        let p = ComplexMatrix::zeros(n, n);
        for ch in 1..=3 {
            assert_eq!(cocycle_expansion(&p, &phi, ch, 0.3).unwrap(), 0.0);
        }
    }
}

#[test]
fn expansion_terms_are_self_adjoint() {
    let mut r = rng(2);
    for class in CLASSES {
        let phi = random_frame(class, 4, &mut r).unwrap();
        let p = random_hs_algebra(class.ambient_size(4), class, 1.0, &mut r).unwrap();
        assert!(ExpansionTerms::new(&p, &phi).unwrap().hermiticity_residual() < 1e-12);
    }
}

#[test]
fn expansion_error_is_third_order() {
    let mut r = rng(3);
    let lambdas: Vec<f64> = (0..9).map(|i| 10f64.powf(-1.0 - 0.25 * i as f64)).collect();
    for class in CLASSES {
        for trial in 0..6 {
            let phi = random_frame(class, 4, &mut r).unwrap();
            let p = random_hs_algebra(class.ambient_size(4), class, 1.0, &mut r).unwrap();
            let ch = 1 + trial % 4;
            let errs: Vec<f64> = lambdas
                .iter()
                .map(|&l| (exact_cocycle(&p, &phi, ch, l).unwrap() - cocycle_expansion(&p, &phi, ch, l).unwrap()).abs())
                .collect();
            let s = slope(&lambdas.iter().map(|l| l.ln()).collect::<Vec<_>>(), &errs.iter().map(|e| e.ln()).collect::<Vec<_>>());
            assert!((s - 3.0).abs() < 0.2, "class {class} channel {ch}: slope {s}, errors {errs:?}");
        }
    }
}

#[test]
fn first_order_is_the_odd_part() {
    let mut r = rng(4);
    for class in CLASSES {
        let phi = random_frame(class, 3, &mut r).unwrap();
        let p = random_hs_algebra(class.ambient_size(3), class, 1.0, &mut r).unwrap();
        for ch in 1..=3 {
            let (c1, _) = expansion_coefficients(&p, &phi, ch).unwrap();
            let errs: Vec<f64> = [1e-2, 1e-3]
                .iter()
                .map(|&l| {
                    let odd = 0.5 * (exact_cocycle(&p, &phi, ch, l).unwrap() - exact_cocycle(&p, &phi, ch, -l).unwrap());
                    (odd - l * c1).abs()
                })
                .collect();
            assert!(errs[1] < 1e-8 && errs[1] < errs[0] * 2e-3, "{class} {ch}: {errs:?}");
        }
    }
}

#[test]
fn expansion_rejects_bad_channel() {
    let mut r = rng(5);
    let phi = random_frame(SymmetryClass::Complex, 2, &mut r).unwrap();
    let p = random_hs_algebra(2, SymmetryClass::Complex, 1.0, &mut r).unwrap();
    assert!(cocycle_expansion(&p, &phi, 3, 0.1).is_err());
    assert!(cocycle_expansion(&p, &phi, 0, 0.1).is_err());
}

/// A frame distributed per the random phase property: identity on the
/// hyperbolic channels, Haar on the elliptic block.
fn rpp_frame(split: &ChannelSplit, r: &mut ChaCha8Rng) -> IsotropicFrame {
    let class = split.class;
    let b = class.block();
    let n = b * split.l();
    let h = b * split.l_h();
    let embed = |w: &ComplexMatrix| {
        let mut u = ComplexMatrix::identity(n, n);
        u.view_mut((h, h), (n - h, n - h)).copy_from(w);
        u
    };
    let u = embed(&sample_haar_unitary(n - h, r).unwrap());
    let v = match class {
        SymmetryClass::Complex => embed(&sample_haar_unitary(n - h, r).unwrap()),
        SymmetryClass::Real => u.conjugate(),
        SymmetryClass::Quaternion => {
            let i = i_form(n).unwrap();
            i.adjoint() * u.conjugate() * i
        }
    };
    frame_of_uv(&UVPair { u, v }, class).unwrap()
}

fn block(m: &ComplexMatrix, p: usize, q: usize, b: usize) -> ComplexMatrix {
    m.view((b * (p - 1), b * (q - 1)), (b, b)).into_owned()
}

struct Mc {
    sum: f64,
    sum2: f64,
    n: f64,
}

impl Mc {
    fn new() -> Self {
        Mc { sum: 0.0, sum2: 0.0, n: 0.0 }
    }
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum2 += x * x;
        self.n += 1.0;
    }
    fn mean(&self) -> f64 {
        self.sum / self.n
    }
    fn se(&self) -> f64 {
        ((self.sum2 / self.n - self.mean().powi(2)) / (self.n - 1.0)).sqrt()
    }
}

#[test]
fn moment_integrals_match_haar_frames() {
    let samples = 40_000;
    for (class, l_h, l_e, seed) in [
        (SymmetryClass::Complex, 0, 2, 10),
        (SymmetryClass::Real, 1, 3, 11),
        (SymmetryClass::Complex, 2, 3, 12),
        (SymmetryClass::Quaternion, 1, 2, 13),
    ] {
        let split = ChannelSplit::with_counts(class, l_h, l_e).unwrap();
        let mut r = rng(seed);
        let n = class.ambient_size(split.l());
        let b = random_hs_selfadjoint(n, class, &mut r).unwrap();
        let a = random_hermitian(2 * n, class, &mut r).unwrap();
        let w = class.block();
        let (p, q) = (l_h + 1, split.l());
        let (mut ip, mut ipp, mut ipq, mut hyp) = (Mc::new(), Mc::new(), Mc::new(), Mc::new());
        for _ in 0..samples {
            let phi = rpp_frame(&split, &mut r);
            let f = phi.phi();
            let fa = f.adjoint() * &a * f;
            let fb = f.adjoint() * &b * f;
            let tau = class.tau();
            ip.push(tau * block(&fa, p, p, w).trace().re);
            ipp.push(tau * (block(&fb, p, p, w) * block(&fb, p, p, w)).trace().re);
            ipq.push(tau * (block(&fb, p, q, w) * block(&fb, q, p, w)).trace().re);
            hyp.push((1..=l_h).map(|h| tau * (block(&fb, p, h, w) * block(&fb, h, p, w)).trace().re).sum());
        }
        let checks = [
            ("I_p", &ip, moment_integral_ip(&a, p, &split).unwrap()),
            ("I_pp", &ipp, moment_integral_ipq(&b, p, p, &split).unwrap()),
            ("I_pq", &ipq, moment_integral_ipq(&b, p, q, &split).unwrap()),
            ("hyperbolic", &hyp, hyperbolic_moment_sum(&b, p, &split).unwrap()),
        ];
        for (name, mc, exact) in checks {
            let tol = 3.0 * mc.se() + 1e-12;
            assert!((mc.mean() - exact).abs() < tol, "{class} L_h={l_h} {name}: MC {} ± {} vs {exact}", mc.mean(), mc.se());
        }
    }
}

#[test]
fn class_c_two_channel_example() {
    let split = ChannelSplit::with_counts(SymmetryClass::Complex, 0, 2).unwrap();
    let mut r = rng(20);
    let b = random_hs_selfadjoint(2, SymmetryClass::Complex, &mut r).unwrap();
    let pe = split.projection(true);
    let be = &pe * &b * &pe;
    let scale = (8.0 / (&be * &be).trace().re).sqrt();
    let b = b * cr(scale);
    assert!((moment_integral_ipq(&b, 1, 2, &split).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn moment_integrals_reject_hyperbolic_channels() {
    let split = ChannelSplit::with_counts(SymmetryClass::Real, 2, 2).unwrap();
    let b = ComplexMatrix::identity(8, 8);
    assert!(matches!(moment_integral_ipq(&b, 1, 3, &split), Err(RppError::InvalidArgument(_))));
    assert!(moment_integral_ip(&b, 2, &split).is_err());
    assert!(moment_integral_ip(&b, 3, &split).is_ok());
    assert!(ChannelSplit::new(SymmetryClass::Real, vec![true, false]).is_err());
}

#[test]
fn sum_rule_holds_in_all_classes() {
    for class in CLASSES {
        for l_e in 1..30 {
            if class == SymmetryClass::Real || l_e > 1 || class != SymmetryClass::Quaternion {
                let sum = (l_e as f64 - 1.0) * ipq_coefficient(class, l_e, false) + ipq_coefficient(class, l_e, true);
                assert!((sum - 1.0 / (4.0 * l_e as f64)).abs() < 1e-15, "{class} L_e={l_e}");
            }
        }
    }
}

#[test]
fn real_class_diagonal_doubles() {
    for l_e in 1..10 {
        let r = ipq_coefficient(SymmetryClass::Real, l_e, true) / ipq_coefficient(SymmetryClass::Real, l_e, false);
        assert_eq!(r, 2.0);
    }
}

#[test]
fn gamma_formula_delta_evaluation() {
    let inputs = GammaFormulaInputs::new(SymmetryClass::Complex, 1, 1, 1, 0.3).unwrap();
    assert!((theorem1_gamma(2.5, &inputs) - 0.09 / 4.0 * 0.5 * 2.5).abs() < 1e-15);
    assert!(GammaFormulaInputs::new(SymmetryClass::Real, 5, 3, 2, 0.1).is_err());
}

#[test]
fn term_assembly_reproduces_gamma_formula() {
    for class in CLASSES {
        for (l, l_e) in [(5, 5), (8, 3), (20, 12)] {
            for p in l - l_e + 1..=l {
                let inputs = GammaFormulaInputs::new(class, l, l_e, p, 0.17).unwrap();
                let (tb2, cross) = (3.7, 1.9);
                let assembled = term_assembly(&inputs, tb2 + cross, cross, tb2);
                let direct = theorem1_gamma(0.5 * tb2, &inputs);
                assert!((assembled - direct).abs() < 1e-14 * direct.abs().max(1e-3), "{class} L={l} p={p}: {assembled} vs {direct}");
            }
        }
    }
}

#[test]
fn spectrum_is_equidistant() {
    for class in CLASSES {
        let params = ModelParams::real(12, 0.7, 0.1);
        let spec = closed_form_spectrum(&params, class, ClosedFormKind::SmallParameter, DEFAULT_BAND_EDGE_TOL).unwrap();
        let first = closed_form_gamma(&params, 12, class, ClosedFormKind::SmallParameter, DEFAULT_BAND_EDGE_TOL).unwrap();
        let d = equidistant_spacing(first.trace, class, first.l_e, 0.1);
        for w in spec.windows(2) {
            assert!(((w[0].1 - w[1].1) - d).abs() < 1e-15, "{class} {w:?}");
        }
    }
}

#[test]
fn single_channel_closed_form() {
    let lambda = 0.1;
    let g = closed_form_gamma(&ModelParams::real(1, 1.0, lambda), 1, SymmetryClass::Real, ClosedFormKind::Exact, 1e-3).unwrap();
    let k = 0.5f64.acos();
    assert!((g.gamma - lambda * lambda / (8.0 * k.sin().powi(2))).abs() < 1e-15);
    assert_eq!(g.l_e, 1);
}

#[test]
fn small_flux_limit_of_exact_form() {
    for (l, e) in [(20, 1.0), (10, 0.3), (7, 1.31)] {
        let exact = ModelParams::magnetic(l, e, 0.2, 1e-10);
        for p in [l, l - 1] {
            let a = closed_form_gamma(&exact, p, SymmetryClass::Complex, ClosedFormKind::Exact, 1e-3).unwrap();
            let b = closed_form_gamma(&exact, p, SymmetryClass::Complex, ClosedFormKind::SmallParameter, 1e-3).unwrap();
            assert!((a.gamma - b.gamma).abs() < 1e-8 * b.gamma, "L={l} E={e}: {} vs {}", a.gamma, b.gamma);
        }
    }
}

#[test]
fn band_edge_is_refused() {
    let params = ModelParams::real(20, 2.0, 0.3204);
    let err = closed_form_gamma(&params, 20, SymmetryClass::Real, ClosedFormKind::Exact, DEFAULT_BAND_EDGE_TOL).unwrap_err();
    assert!(matches!(err, RppError::InternalBandEdge { .. }), "{err}");
    let err = closed_form_gamma(&ModelParams::real(4, 0.0, 0.1), 4, SymmetryClass::Real, ClosedFormKind::Exact, 1e-3);
    assert!(matches!(err, Err(RppError::InternalBandEdge { .. })));
}

#[test]
fn class_ratios_at_twenty_elliptic_channels() {
    let (rc, ch) = class_ratios(20).unwrap();
    assert!((rc - 40.0 / 21.0).abs() < 1e-15);
    assert!((rc - 2.0).abs() / 2.0 < 0.1);
    assert!((ch - 2.0 * 19.5 / 20.0).abs() < 1e-15);
    let (rc_big, ch_big) = class_ratios(100_000).unwrap();
    assert!((rc_big - 2.0).abs() < 1e-4 && (ch_big - 2.0).abs() < 1e-4);
}

#[test]
fn closed_form_ratio_matches_class_ratio() {
    let params = ModelParams::real(20, 1.0, 0.3204);
    let r = closed_form_gamma(&params, 20, SymmetryClass::Real, ClosedFormKind::SmallParameter, 1e-3).unwrap();
    let c = closed_form_gamma(&params, 20, SymmetryClass::Complex, ClosedFormKind::SmallParameter, 1e-3).unwrap();
    let le = r.l_e as f64;
    assert!((r.gamma / c.gamma - 2.0 * le / (le + 1.0)).abs() < 1e-13);
}

#[test]
fn energy_scan_curves_regression() {
    let lambda = 1.11 / 12f64.sqrt();
    let expected = [
        (0.5, [0.001930027375, 0.003860054749, 0.005790082124]),
        (1.0, [0.001641242864, 0.003282485728, 0.004923728593]),
        (1.31, [0.002678641538, 0.005357283075, 0.008035924613]),
    ];
    for (e, want) in expected {
        let params = ModelParams::real(20, e, lambda);
        for (i, p) in [20, 19, 18].into_iter().enumerate() {
            let g = closed_form_gamma(&params, p, SymmetryClass::Real, ClosedFormKind::SmallParameter, 1e-3).unwrap().gamma;
            assert!((g - want[i]).abs() < 1e-12, "E={e} p={p}: {g:.12}");
        }
    }
}

#[test]
fn spin_orbit_closed_form_uses_zero_coupling() {
    let ando = ModelParams::ando(8, 0.9, 0.2, 0.05);
    assert!(closed_form_gamma(&ando, 8, SymmetryClass::Quaternion, ClosedFormKind::Exact, 1e-3).is_err());
    let h = closed_form_gamma(&ando, 8, SymmetryClass::Quaternion, ClosedFormKind::SmallParameter, 1e-3).unwrap();
    let r = closed_form_gamma(&ModelParams::real(8, 0.9, 0.2), 8, SymmetryClass::Quaternion, ClosedFormKind::Exact, 1e-3).unwrap();
    assert_eq!(h.gamma, r.gamma);
}

#[test]
fn haar_fourth_moment_small_n() {
    let rep = haar_moment_check(4, 40_000, 7).unwrap();
    let m3 = rep.get("moment 3").unwrap();
    assert!((m3.expected.re + 1.0 / 60.0).abs() < 1e-15);
    for c in &rep.checks {
        assert!(c.sigmas() < 3.0, "{c:?}");
    }
}

#[test]
fn trace_identity_iii_projector_example() {
    let mut a = ComplexMatrix::zeros(4, 4);
    a[(0, 0)] = cr(1.0);
    a[(1, 1)] = cr(-1.0);
    let mut b = ComplexMatrix::zeros(4, 4);
    b[(0, 0)] = cr(1.0);
    let rep = trace_identity_check([a.clone(), b.clone(), a, b], 40_000, 8).unwrap();
    let c = rep.get("trace identity iii").unwrap();
    assert!((c.expected - C64::new(2.0 / 15.0 - 2.0 / 60.0, 0.0)).norm() < 1e-15, "{c:?}");
    assert!(rep.max_sigmas() < 3.0, "{rep:?}");
}

#[test]
fn identity_trace_consistency() {
    let id = ComplexMatrix::identity(5, 5);
    let rep = trace_identity_check([id.clone(), id.clone(), id.clone(), id], 100, 1).unwrap();
    let i = rep.get("trace identity i").unwrap();
    assert!((i.mean - C64::new(5.0, 0.0)).norm() < 1e-12 && (i.expected - C64::new(5.0, 0.0)).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expansion_is_real_linear_in_generator(seed in 0u64..10_000, scale in 0.1f64..3.0, class_ix in 0usize..3) {
        let class = CLASSES[class_ix];
        let mut r = rng(seed);
        let phi = random_frame(class, 3, &mut r).unwrap();
        let p = random_hs_algebra(class.ambient_size(3), class, 1.0, &mut r).unwrap();
        let sp = &p * cr(scale);
        for ch in 1..=3 {
            let (a1, a2) = expansion_coefficients(&p, &phi, ch).unwrap();
            let (b1, b2) = expansion_coefficients(&sp, &phi, ch).unwrap();
            prop_assert!((b1 - scale * a1).abs() < 1e-10 * (1.0 + a1.abs()));
            prop_assert!((b2 - scale * scale * a2).abs() < 1e-9 * (1.0 + a2.abs()));
        }
        prop_assert!(frobenius(&p) > 0.0);
    }

    #[test]
    fn closed_forms_are_positive_and_decreasing(l in 1usize..30, e in -3.9f64..3.9, class_ix in 0usize..3) {
        let class = CLASSES[class_ix];
        let params = ModelParams::real(l, e, 0.1);
        match closed_form_spectrum(&params, class, ClosedFormKind::SmallParameter, 1e-3) {
            Ok(spec) => {
                prop_assert!(spec.iter().all(|(_, g)| *g > 0.0));
                prop_assert!(spec.windows(2).all(|w| w[0].1 > w[1].1));
            }
            Err(RppError::InternalBandEdge { .. }) | Err(RppError::InvalidArgument(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
