mod common;

use common::{eval_point, max_abs_diff, naive_power, random_field};
use num_complex::Complex64;
use periodic_nls::closed_form::{
    approx_two_mode, cubic_correction, evaluate_forcing, off_system_forcing,
    quintic_error_structure, two_mode_forcing, two_mode_rates, NlsParams, Sign, TwoModeData,
};
use periodic_nls::mode_ode::{fnls_rhs, ModeSystem, ModeWindow};
use periodic_nls::solver::SplitStepSolver;
use periodic_nls::spectral::{Dealias, SpectralField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_data(rng: &mut ChaCha8Rng, sigma: f64) -> TwoModeData {
    let mut pick = || Complex64::from_polar(rng.gen_range(0.2..1.0) * sigma, rng.gen_range(0.0..6.3));
    TwoModeData::new(pick(), pick(), sigma).unwrap()
}

/// `|u|^{2m} u` at a physical point from pointwise values.
fn pointwise_power(u: Complex64, m: u32) -> Complex64 {
    u * u.norm_sqr().powi(m as i32)
}

proptest! {
    #[test]
    fn approximation_preserves_mode_moduli(
        a in 0.0f64..0.2, b in 0.0f64..0.2, ph in 0.0f64..6.3, t in -50.0f64..50.0, m in 1u32..4
    ) {
        let params = NlsParams::new(2 * m + 1, Sign::Focusing).unwrap();
        let data = TwoModeData::new(Complex64::from_polar(a, ph), c(b, 0.0), 0.2).unwrap();
        let u = approx_two_mode(&params, &data, t);
        prop_assert!((u.get(0).norm() - a).abs() < 1e-15);
        prop_assert!((u.get(1).norm() - b).abs() < 1e-15);
    }
}

#[test]
fn cubic_residual_is_the_off_system_forcing() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for omega in [Sign::Defocusing, Sign::Focusing] {
        let params = NlsParams::cubic(omega);
        let w = omega.value();
        for _ in 0..50 {
            let data = random_data(&mut rng, 0.2);
            let (r0, r1) = two_mode_rates(&params, &data);
            let t: f64 = rng.gen_range(0.0..20.0);
            let x: f64 = rng.gen_range(0.0..6.3);
            let a0 = data.alpha() * Complex64::from_polar(1.0, r0 * t);
            let a1 = data.beta() * Complex64::from_polar(1.0, r1 * t + x);
            let u = a0 + a1;
            // -i u_t + u_xx for each rotating mode
            let lhs = r0 * a0 + r1 * a1 - a1;
            let residual = lhs - w * pointwise_power(u, 1);
            let off = off_system_forcing(&params, &data);
            let mut ks: Vec<i32> = off.iter().map(|t| t.k).collect();
            ks.sort();
            assert_eq!(ks, vec![-1, 2]);
            let expected = -w * evaluate_forcing(&off, omega, t, x);
            assert!((residual - expected).norm() < 1e-15, "{residual} vs {expected}");
        }
    }
}

#[test]
fn forcing_groups_reconstruct_the_nonlinearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in 1..=3u32 {
        for omega in [Sign::Defocusing, Sign::Focusing] {
            let params = NlsParams::new(2 * m + 1, omega).unwrap();
            for _ in 0..30 {
                let data = random_data(&mut rng, 0.25);
                let t: f64 = rng.gen_range(-30.0..30.0);
                let x: f64 = rng.gen_range(0.0..6.3);
                let u = eval_point(&approx_two_mode(&params, &data, t), x);
                let recon = evaluate_forcing(&two_mode_forcing(&params, &data), omega, t, x);
                assert!((recon - pointwise_power(u, m)).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn quintic_error_frequencies_are_nonresonant() {
    let data = TwoModeData::new(c(0.1, 0.02), c(-0.05, 0.08), 0.11).unwrap();
    let terms = quintic_error_structure(&data, Sign::Defocusing);
    let mut ks: Vec<i32> = terms.iter().map(|t| t.k).collect();
    ks.sort();
    assert_eq!(ks, vec![-2, -1, 2, 3]);
    assert!(ks.iter().all(|&k| k != k * k));
}

/// RK4 with fine steps on `v_k' = i k² v_k + iω E_k(t)` where `E_k` comes
/// from direct convolution of the ansatz.
fn quadrature_correction(params: &NlsParams, data: &TwoModeData, t_final: f64, steps: usize) -> SpectralField {
    let w = params.omega_value();
    let force = |t: f64| {
        let mut e = naive_power(&approx_two_mode(params, data, t), params.m());
        e.set(0, Complex64::default());
        e.set(1, Complex64::default());
        e
    };
    let rhs = |t: f64, v: &SpectralField| {
        let e = force(t);
        let n = e.nmax().max(v.nmax()) as i64;
        SpectralField::from_modes((-n..=n).map(|k| {
            (k, Complex64::new(0.0, (k * k) as f64) * v.get(k) + Complex64::new(0.0, w) * e.get(k))
        }))
    };
    let h = t_final / steps as f64;
    let mut v = SpectralField::zeros(3);
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, &v);
        let k2 = rhs(t + h / 2.0, &v.add(&k1.scaled(Complex64::from(h / 2.0))));
        let k3 = rhs(t + h / 2.0, &v.add(&k2.scaled(Complex64::from(h / 2.0))));
        let k4 = rhs(t + h, &v.add(&k3.scaled(Complex64::from(h))));
        let incr = k1.add(&k2.scaled(Complex64::from(2.0))).add(&k3.scaled(Complex64::from(2.0))).add(&k4);
        v = v.add(&incr.scaled(Complex64::from(h / 6.0)));
    }
    v
}

#[test]
fn cubic_correction_matches_quadrature() {
    for omega in [Sign::Defocusing, Sign::Focusing] {
        let params = NlsParams::cubic(omega);
        let data = TwoModeData::new(c(0.1, 0.05), c(0.2, -0.1), 0.25).unwrap();
        for t in [0.7, 3.0] {
            let oracle = quadrature_correction(&params, &data, t, 4000);
            let v = cubic_correction(&data, omega, t).unwrap();
            assert!(max_abs_diff(&v, &oracle) < 1e-8, "t={t}: {}", max_abs_diff(&v, &oracle));
        }
    }
}

#[test]
fn truncated_system_reproduces_closed_form() {
    for m in 1..=3u32 {
        for omega in [Sign::Defocusing, Sign::Focusing] {
            let params = NlsParams::new(2 * m + 1, omega).unwrap();
            let data = TwoModeData::new(c(0.2, 0.1), c(-0.15, 0.2), 0.25).unwrap();
            let sys = ModeSystem::truncated(params, &data);
            let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
            let traj = sys.integrate(10.0, 1e-3, &times).unwrap();
            for s in traj.snapshots() {
                let u = approx_two_mode(&params, &data, s.t);
                for k in [0, 1] {
                    assert!((s.field.get(k) - u.get(k)).norm() < 1e-8, "m={m} t={}", s.t);
                }
                assert!((s.field.get(0).norm() - data.alpha().norm()).abs() < 1e-9);
                assert!((s.field.get(1).norm() - data.beta().norm()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn truncated_low_modes_ignore_the_rest() {
    let params = NlsParams::quintic(Sign::Focusing);
    let data = TwoModeData::new(c(0.1, 0.0), c(0.0, 0.1), 0.1).unwrap();
    let sys = ModeSystem::truncated(params, &data);
    let mut other = sys.state().clone();
    for k in [-2, -1, 2, 3] {
        other.set(k, c(0.3, -0.2));
    }
    let a = sys.rhs(sys.state());
    let b = sys.rhs(&other);
    for k in [0, 1] {
        assert_eq!(a.get(k), b.get(k));
    }
}

#[test]
fn full_window_matches_solver_generator_and_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (p, radius) in [(3u32, 6i64), (5, 4)] {
        let params = NlsParams::new(p, Sign::Focusing).unwrap();
        let mut solver = SplitStepSolver::new(params, 128, Dealias::TwoThirds).unwrap();
        let window = solver.window_nmax();
        for _ in 0..20 {
            let u = random_field(&mut rng, radius, 0.1);
            let sys = ModeSystem::with_window(params, ModeWindow::Full { nmax: window }, u.clone()).unwrap();
            let fnls = fnls_rhs(&sys);
            let gen = solver.generator(&u).unwrap();
            let nl = naive_power(&u, params.m());
            let direct = SpectralField::from_modes((-(window as i64)..=window as i64).map(|k| {
                let lin = Complex64::new(0.0, (k * k) as f64) * u.get(k);
                (k, lin + Complex64::new(0.0, params.omega_value()) * nl.get(k))
            }));
            assert!(max_abs_diff(&fnls, &gen) < 1e-10);
            assert!(max_abs_diff(&fnls, &direct) < 1e-10);
        }
    }
}

#[test]
fn full_window_conserves_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let params = NlsParams::cubic(Sign::Defocusing);
    let u = random_field(&mut rng, 3, 0.1);
    let sys = ModeSystem::with_window(params, ModeWindow::Full { nmax: 12 }, u.clone()).unwrap();
    let traj = sys.integrate(2.0, 2e-3, &[0.0, 1.0, 2.0]).unwrap();
    let m0 = u.mass();
    for s in traj.snapshots() {
        assert!((s.field.mass() - m0).abs() < 1e-10 * m0);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let params = NlsParams::cubic(Sign::Focusing);
    let data = TwoModeData::with_cap(c(0.4, 0.1), c(0.3, -0.2), 0.5, 1.0).unwrap();
    let sys = ModeSystem::with_window(
        params,
        ModeWindow::Full { nmax: 4 },
        approx_two_mode(&params, &data, 0.0),
    )
    .unwrap();
    let end = |dt: f64| sys.integrate(2.0, dt, &[2.0]).unwrap().last().unwrap().field.clone();
    let reference = end(1.25e-3);
    let e1 = end(0.04).sub(&reference).l2_norm();
    let e2 = end(0.02).sub(&reference).l2_norm();
    let order = (e1 / e2).log2();
    assert!((3.7..4.3).contains(&order), "order {order}");
}
