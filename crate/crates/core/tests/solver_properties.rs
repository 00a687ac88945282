mod common;

use common::random_field;
use num_complex::Complex64;
use periodic_nls::closed_form::{approx_two_mode, plane_wave, NlsParams, Sign, TwoModeData};
use periodic_nls::solver::{evolve, residual, SolverConfig, SplitStepSolver};
use periodic_nls::spectral::{Dealias, SpectralField};
use periodic_nls::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn forward_then_backward_returns_the_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (p, omega) in [(3, Sign::Defocusing), (5, Sign::Focusing)] {
        let params = NlsParams::new(p, omega).unwrap();
        let mut solver = SplitStepSolver::new(params, 64, Dealias::TwoThirds).unwrap();
        let u0 = random_field(&mut rng, 3, 0.1);
        let mut state = solver.load(&u0).unwrap();
        assert!(solver.advance(&mut state, 5.0, 0.01).is_none());
        assert!(solver.advance(&mut state, -5.0, 0.01).is_none());
        let back = solver.field(&state);
        assert!(back.sub(&u0).l2_norm() < 1e-7, "p={p}: {}", back.sub(&u0).l2_norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn gauge_covariance(theta in 0.0f64..6.3, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = NlsParams::cubic(Sign::Focusing);
        let u0 = random_field(&mut rng, 3, 0.1);
        let g = Complex64::from_polar(1.0, theta);
        let cfg = SolverConfig::uniform(32, 0.02, 1.0, 1);
        let a = evolve(&u0, &params, &cfg).unwrap();
        let b = evolve(&u0.scaled(g), &params, &cfg).unwrap();
        let fa = &a.trajectory.last().unwrap().field;
        let fb = &b.trajectory.last().unwrap().field;
        prop_assert!(fa.scaled(g).sub(fb).l2_norm() < 1e-14);
    }
}

#[test]
fn strang_splitting_is_second_order() {
    let params = NlsParams::cubic(Sign::Focusing);
    let u0 = SpectralField::from_modes([(0, c(0.4, 0.1)), (1, c(0.3, -0.2)), (-2, c(0.2, 0.2))]);
    let end = |dt: f64| {
        evolve(&u0, &params, &SolverConfig::new(64, dt, vec![1.0]))
            .unwrap()
            .trajectory
            .last()
            .unwrap()
            .field
            .clone()
    };
    let (f8, f16) = (end(0.1 / 8.0), end(0.1 / 16.0));
    let reference = f16.scaled(Complex64::from(4.0 / 3.0)).sub(&f8.scaled(Complex64::from(1.0 / 3.0)));
    let e1 = end(0.1).sub(&reference).l2_norm();
    let e2 = end(0.05).sub(&reference).l2_norm();
    let order = (e1 / e2).log2();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn random_small_data_conserve_mass_and_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let t_final = 5.0;
    for run in 0..40 {
        let p = if run % 2 == 0 { 3 } else { 5 };
        let omega = if run % 4 < 2 { Sign::Defocusing } else { Sign::Focusing };
        let params = NlsParams::new(p, omega).unwrap();
        let amp = rng.gen_range(0.01..0.08);
        let u0 = random_field(&mut rng, 2, amp);
        let ev = evolve(&u0, &params, &SolverConfig::uniform(32, 0.02, t_final, 10)).unwrap();
        assert!(ev.mass_drift / t_final <= 1e-8, "run {run}: mass {}", ev.mass_drift);
        assert!(ev.hamiltonian_drift / t_final <= 1e-6, "run {run}: energy {}", ev.hamiltonian_drift);
    }
}

#[test]
fn fine_samples_give_a_small_reliable_residual() {
    let params = NlsParams::cubic(Sign::Defocusing);
    let alpha = c(0.1, 0.0);
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 1e-4).collect();
    let traj = evolve(&plane_wave(&params, alpha, 3, 0.0), &params, &SolverConfig::new(32, 1e-4, times))
        .unwrap()
        .trajectory;
    let r = residual(&traj, &params).unwrap();
    assert!(r.reliable);
    assert!(r.max < 1e-6, "{}", r.max);
}

#[test]
fn non_finite_data_report_blowup() {
    let params = NlsParams::cubic(Sign::Focusing);
    let u0 = SpectralField::from_modes([(0, c(f64::NAN, 0.0)), (1, c(0.1, 0.0))]);
    let err = evolve(&u0, &params, &SolverConfig::new(32, 0.01, vec![0.0, 1.0])).unwrap_err();
    assert!(matches!(err, Error::Blowup { t } if t > 0.0 && t <= 1.0), "{err}");
}

#[test]
fn mass_loss_beyond_tolerance_is_an_accuracy_failure() {
    let params = NlsParams::quintic(Sign::Defocusing);
    let u0 = SpectralField::from_modes([(0, c(1.0, 0.0)), (4, c(1.0, 0.0))]);
    let mut cfg = SolverConfig::new(32, 0.05, vec![1.0]);
    cfg.mass_tolerance = 1e-12;
    assert!(matches!(evolve(&u0, &params, &cfg), Err(Error::AccuracyFailure { .. })));
}

#[test]
fn negative_checkpoints_are_rejected() {
    let params = NlsParams::cubic(Sign::Focusing);
    let data = TwoModeData::tight(c(0.1, 0.0), c(0.1, 0.0)).unwrap();
    let cfg = SolverConfig::new(32, 0.01, vec![-1.0]);
    assert!(evolve(&approx_two_mode(&params, &data, 0.0), &params, &cfg).is_err());
}
