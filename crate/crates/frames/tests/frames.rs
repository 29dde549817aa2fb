use frames::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symplectic_core::linalg::max_abs_diff;
use symplectic_core::random::random_hs_group;
use symplectic_core::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_op(class: SymmetryClass, l: usize, scale: f64, r: &mut ChaCha8Rng) -> ComplexMatrix {
    random_hs_group(class.ambient_size(l), class, scale, r).unwrap()
}

#[test]
fn identity_acts_trivially() {
    let mut r = rng(1);
    for class in SymmetryClass::ALL {
        let phi = random_frame(class, 3, &mut r).unwrap();
        let n = phi.ambient();
        let (out, s) = act(&ComplexMatrix::identity(2 * n, 2 * n), &phi).unwrap();
        assert!(max_abs_diff(out.phi(), phi.phi()) < 1e-14, "{class}");
        assert!(max_abs_diff(s.matrix(), &ComplexMatrix::identity(n, n)) < 1e-14);
        for g in s.all_additive().unwrap() {
            assert!(g.abs() < 1e-14);
        }
    }
}

#[test]
fn pure_expansion_on_axis_frame() {
    let mut t = ComplexMatrix::zeros(2, 2);
    t[(0, 0)] = cr(2.0);
    t[(1, 1)] = cr(0.5);
    let phi = IsotropicFrame::axis(SymmetryClass::Complex, 1).unwrap();
    let (out, s) = act(&t, &phi).unwrap();
    assert!((s.matrix()[(0, 0)] - cr(2.0)).norm() < 1e-15);
    assert!(max_abs_diff(out.phi(), phi.phi()) < 1e-15);
    assert!((s.additive(1).unwrap() - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn additive_cocycle_examples() {
    let s = TriangularCocycle::identity(SymmetryClass::Complex, 2);
    assert_eq!(s.all_additive().unwrap(), vec![0.0, 0.0]);
    let mut m = ComplexMatrix::identity(2, 2);
    m[(0, 0)] = cr(2.0);
    let s = TriangularCocycle::new(m, SymmetryClass::Complex).unwrap();
    assert!((additive_cocycle(&s, 1, SymmetryClass::Complex).unwrap() - 2f64.ln()).abs() < 1e-15);
    assert!(additive_cocycle(&s, 3, SymmetryClass::Complex).is_err());
    let m = ComplexMatrix::identity(2, 2) * cr(3.0);
    let s = TriangularCocycle::new(m, SymmetryClass::Quaternion).unwrap();
    assert!((s.additive(1).unwrap() - 3f64.ln()).abs() < 1e-15);

    let mut bad = ComplexMatrix::identity(2, 2);
    bad[(1, 1)] = cr(-1.0);
    assert!(TriangularCocycle::new(bad, SymmetryClass::Complex).is_err());
    let mut lower = ComplexMatrix::identity(2, 2);
    lower[(1, 0)] = cr(0.1);
    assert!(TriangularCocycle::new(lower, SymmetryClass::Complex).is_err());
}

#[test]
fn act_rejects_bad_input() {
    let phi = IsotropicFrame::axis(SymmetryClass::Complex, 2).unwrap();
    let err = act(&ComplexMatrix::identity(6, 6), &phi).unwrap_err();
    assert!(matches!(err, RppError::DimensionMismatch { .. }));
    let not_member = ComplexMatrix::identity(4, 4) * cr(2.0);
    assert!(matches!(act(&not_member, &phi), Err(RppError::InvariantViolation(_))));
    let mut r = rng(4);
    let t = random_op(SymmetryClass::Complex, 2, 0.5, &mut r);
    let phi_r = IsotropicFrame::axis(SymmetryClass::Real, 2).unwrap();
    assert!(act(&t, &phi_r).is_err(), "complex operator accepted for a real frame");
}

#[test]
fn rank_loss_is_reported_with_column() {
    let mut y = ComplexMatrix::zeros(4, 2);
    y[(0, 0)] = cr(1.0);
    y[(0, 1)] = cr(1.0);
    y[(1, 1)] = cr(1e-14);
    let err = orthonormalize(&mut y, 1, None).unwrap_err();
    assert_eq!(err, RppError::SingularAction { column: 2, step: None });
}

#[test]
fn frame_validation() {
    let mut phi = ComplexMatrix::zeros(4, 2);
    phi[(0, 0)] = cr(1.0);
    phi[(2, 1)] = cr(1.0);
    assert!(IsotropicFrame::new(phi, SymmetryClass::Complex).is_err(), "non-isotropic accepted");
    assert!(IsotropicFrame::new(ComplexMatrix::zeros(3, 2), SymmetryClass::Complex).is_err());
    assert!(IsotropicFrame::axis(SymmetryClass::Quaternion, 0).is_err());
    let ax = IsotropicFrame::axis(SymmetryClass::Quaternion, 2).unwrap();
    assert_eq!(ax.ambient(), 4);
    assert_eq!(ax.channels(), 2);
    assert!(ax.residual().unwrap().max() == 0.0);
}

#[test]
fn multiplicative_cocycle_identity() {
    let mut r = rng(20);
    for class in SymmetryClass::ALL {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let t = random_op(class, 3, 0.6, &mut r);
            let tp = random_op(class, 3, 0.6, &mut r);
            let phi = random_frame(class, 3, &mut r).unwrap();
            let (_, s_prod) = act(&(&t * &tp), &phi).unwrap();
            let (mid, s_tp) = act(&tp, &phi).unwrap();
            let (_, s_t) = act(&t, &mid).unwrap();
            let rhs = s_t.matrix() * s_tp.matrix();
            worst = worst.max(max_abs_diff(s_prod.matrix(), &rhs));
        }
        assert!(worst < 1e-9, "class {class}: {worst:e}");
    }
}

#[test]
fn action_reproduces_frame_from_cocycle() {
    let mut r = rng(21);
    for class in SymmetryClass::ALL {
        let t = random_op(class, 3, 0.8, &mut r);
        let phi = random_frame(class, 3, &mut r).unwrap();
        let (out, s) = act(&t, &phi).unwrap();
        let sinv = s.matrix().clone().try_inverse().unwrap();
        assert!(max_abs_diff(&(&t * phi.phi() * sinv), out.phi()) < 1e-10);
        assert!(out.residual().unwrap().max() < 1e-12, "{class}");
    }
}

#[test]
fn torus_covariance() {
    let mut r = rng(22);
    let t = random_op(SymmetryClass::Complex, 3, 0.7, &mut r);
    let phi = random_frame(SymmetryClass::Complex, 3, &mut r).unwrap();
    let id = ComplexMatrix::identity(3, 3);
    assert!(torus_covariance_check(&t, &phi, &id).unwrap() < 1e-15);
    let tor = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(0.3f64.cos(), 0.3f64.sin()),
        c(2.1f64.cos(), 2.1f64.sin()),
        c((-1.3f64).cos(), (-1.3f64).sin()),
    ]));
    assert!(torus_covariance_check(&t, &phi, &tor).unwrap() < 1e-9);

    let t = random_op(SymmetryClass::Real, 2, 0.7, &mut r);
    let phi = random_frame(SymmetryClass::Real, 2, &mut r).unwrap();
    let mut sign = ComplexMatrix::identity(2, 2);
    sign[(1, 1)] = cr(-1.0);
    assert!(torus_covariance_check(&t, &phi, &sign).unwrap() < 1e-9);
    assert!(torus_covariance_check(&t, &phi, &(ComplexMatrix::identity(2, 2) * I_UNIT)).is_err());

    let t = random_op(SymmetryClass::Quaternion, 2, 0.7, &mut r);
    let phi = random_frame(SymmetryClass::Quaternion, 2, &mut r).unwrap();
    let z = c(0.8f64.cos(), 0.8f64.sin());
    let w = c(2.5f64.cos(), 2.5f64.sin());
    let tq = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![z, z.conj(), w, w.conj()]));
    assert!(torus_covariance_check(&t, &phi, &tq).unwrap() < 1e-9);
    let tbad = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![z, z, w, w.conj()]));
    assert!(torus_covariance_check(&t, &phi, &tbad).is_err());
}

#[test]
fn partial_sums_equal_gram_determinants() {
    let mut r = rng(23);
    for class in SymmetryClass::ALL {
        for l in 1..=4 {
            let n = class.ambient_size(l);
            let phi0 = random_frame(class, l, &mut r).unwrap();
            let mut phi = phi0.clone();
            let mut prod = ComplexMatrix::identity(2 * n, 2 * n);
            let mut sums = vec![0.0; l];
            for _ in 0..50 {
                let t = random_op(class, l, 0.3, &mut r);
                let (next, s) = act(&t, &phi).unwrap();
                for (acc, g) in sums.iter_mut().zip(s.all_additive().unwrap()) {
                    *acc += g;
                }
                prod = &t * prod;
                phi = next;
            }
            let y = &prod * phi0.phi();
            let mut partial = 0.0;
            for p in 1..=l {
                partial += sums[p - 1];
                let k = p * class.block();
                let expect = class.tau() * half_log_gram_det(&y, k).unwrap();
                assert!((partial - expect).abs() < 1e-6, "class {class} l {l} p {p}: {partial} vs {expect}");
            }
        }
    }
}

#[test]
fn long_chain_keeps_invariants() {
    let mut r = rng(24);
    for class in SymmetryClass::ALL {
        let ops: Vec<ComplexMatrix> = (0..16).map(|_| random_op(class, 2, 0.4, &mut r)).collect();
        let mut phi = random_frame(class, 2, &mut r).unwrap();
        let mut worst: f64 = 0.0;
        for step in 1..=10_000 {
            let (next, _) = act_unchecked(&ops[step % ops.len()], &phi).unwrap();
            phi = next;
            if step % 100 == 0 {
                let before = phi.reproject().unwrap();
                worst = worst.max(before.max());
            }
        }
        assert!(worst < 1e-8, "class {class}: drift {worst:e}");
        assert!(phi.residual().unwrap().max() < 1e-12);
    }
}

#[test]
fn unitary_operators_have_trivial_cocycle() {
    let mut r = rng(25);
    for n in 1..=4 {
        let a = sample_haar_unitary(n, &mut r).unwrap();
        let b = sample_haar_unitary(n, &mut r).unwrap();
        let d = symplectic_core::linalg::block_diag(&[&a, &b]);
        let cy = cayley(n);
        let t = cy.adjoint() * d * &cy;
        assert!(is_hermitian_symplectic(&t, SymmetryClass::Complex, 1e-12).unwrap());
        let phi = random_frame(SymmetryClass::Complex, n, &mut r).unwrap();
        let (_, s) = act(&t, &phi).unwrap();
        assert!(max_abs_diff(s.matrix(), &ComplexMatrix::identity(n, n)) < 1e-12);
        for g in s.all_additive().unwrap() {
            assert!(g.abs() < 1e-12);
        }
    }
}

#[test]
fn uv_examples() {
    let id = ComplexMatrix::identity(3, 3);
    let phi = frame_of_uv(&UVPair::new(id.clone(), id.clone()).unwrap(), SymmetryClass::Complex).unwrap();
    assert!(max_abs_diff(phi.phi(), IsotropicFrame::axis(SymmetryClass::Complex, 3).unwrap().phi()) < 1e-15);

    let mut r = rng(26);
    let u = sample_haar_unitary(4, &mut r).unwrap();
    let v = sample_haar_unitary(4, &mut r).unwrap();
    let phi = frame_of_uv(&UVPair::new(u.clone(), v.clone()).unwrap(), SymmetryClass::Complex).unwrap();
    assert!(phi.residual().unwrap().isotropy < 1e-12);
    let back = uv_of_frame(&phi);
    assert!(max_abs_diff(&back.u, &u) < 1e-12 && max_abs_diff(&back.v, &v) < 1e-12);

    let o = sample_haar_orthogonal(4, &mut r).unwrap();
    let phi = frame_of_uv(&UVPair::new(o.clone(), o.clone()).unwrap(), SymmetryClass::Real).unwrap();
    assert!(reality_residual(phi.phi()) == 0.0);
    assert!(IsotropicFrame::new(phi.into_inner(), SymmetryClass::Real).is_ok());

    let nonunitary = ComplexMatrix::identity(2, 2) * cr(1.5);
    let err = frame_of_uv(&UVPair::new(nonunitary.clone(), nonunitary).unwrap(), SymmetryClass::Complex);
    assert!(matches!(err, Err(RppError::NonUnitary { .. })));
    assert!(frame_of_uv(&UVPair::new(u, v).unwrap(), SymmetryClass::Real).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_frames_are_valid_and_round_trip(seed in any::<u64>(), l in 1usize..5, ci in 0usize..3) {
        let class = SymmetryClass::ALL[ci];
        let mut r = rng(seed);
        let phi = random_frame(class, l, &mut r).unwrap();
        prop_assert!(phi.residual().unwrap().max() < 1e-10);
        let uv = uv_of_frame(&phi);
        prop_assert!(uv.unitarity_residual() < 1e-10);
        let back = frame_of_uv(&uv, class).unwrap();
        prop_assert!(max_abs_diff(back.phi(), phi.phi()) < 1e-12);
    }

    #[test]
    fn action_preserves_invariants_and_cocycle(seed in any::<u64>(), l in 1usize..4, ci in 0usize..3) {
        let class = SymmetryClass::ALL[ci];
        let mut r = rng(seed);
        let t = random_op(class, l, 0.7, &mut r);
        let tp = random_op(class, l, 0.7, &mut r);
        let phi = random_frame(class, l, &mut r).unwrap();
        let (mid, s1) = act(&tp, &phi).unwrap();
        prop_assert!(mid.residual().unwrap().max() < 1e-10);
        let (_, s2) = act(&t, &mid).unwrap();
        let (_, s12) = act(&(&t * &tp), &phi).unwrap();
        prop_assert!(max_abs_diff(s12.matrix(), &(s2.matrix() * s1.matrix())) < 1e-9);
        let g12: f64 = s12.all_additive().unwrap().iter().sum();
        let g: f64 = s1.all_additive().unwrap().iter().chain(s2.all_additive().unwrap().iter()).sum();
        prop_assert!((g12 - g).abs() < 1e-9);
    }
}
