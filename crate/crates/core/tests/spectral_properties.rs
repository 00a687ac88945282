mod common;

use common::{eval_point, naive_power, random_field};
use num_complex::Complex64;
use periodic_nls::closed_form::{NlsParams, Sign, TwoModeData};
use periodic_nls::solver::{evolve, residual, SolverConfig};
use periodic_nls::spectral::{
    from_physical, rescale_up, to_physical, Dealias, ProductPolicy, ScalingMap, SobolevIndex,
    SpectralField,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field_strategy(max_radius: i64) -> impl Strategy<Value = SpectralField> {
    (0..=max_radius).prop_flat_map(|r| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (2 * r + 1) as usize).prop_map(move |c| {
            SpectralField::from_modes(
                c.into_iter()
                    .enumerate()
                    .map(|(i, (re, im))| (i as i64 - r, Complex64::new(re, im))),
            )
        })
    })
}

proptest! {
    #[test]
    fn parseval(f in field_strategy(10)) {
        let g = 32;
        let samples = to_physical(&f, g).unwrap();
        let mean = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / g as f64;
        let l2 = f.sobolev_norm(SobolevIndex::L2);
        prop_assert!((l2 * l2 - mean).abs() <= 1e-10 * mean.max(1e-300));
    }

    #[test]
    fn physical_round_trip(f in field_strategy(12)) {
        let samples = to_physical(&f, 64).unwrap();
        let back = from_physical(&samples, f.nmax()).unwrap();
        prop_assert!(back.sub(&f).l2_norm() <= 1e-12 * (1.0 + f.l2_norm()));
    }

    #[test]
    fn synthesis_matches_pointwise_sum(f in field_strategy(6)) {
        let g = 16;
        let samples = to_physical(&f, g).unwrap();
        for (j, z) in samples.iter().enumerate() {
            let x = std::f64::consts::TAU * j as f64 / g as f64;
            prop_assert!((z - eval_point(&f, x)).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_is_monotone_in_s(f in field_strategy(8), s1 in -2.0f64..2.0, ds in 0.0f64..2.0) {
        let a = f.sobolev_norm(SobolevIndex::new(s1).unwrap());
        let b = f.sobolev_norm(SobolevIndex::new(s1 + ds).unwrap());
        prop_assert!(a <= b * (1.0 + 1e-14));
    }

    #[test]
    fn products_match_direct_summation(f in field_strategy(5)) {
        let exact = ProductPolicy { cap: usize::MAX, rule: Dealias::None };
        for m in 1..=2 {
            let fast = f.power_nonlinearity(m, &exact).unwrap();
            let slow = naive_power(&f, m);
            let scale = f.l2_norm().powi(2 * m as i32 + 1).max(1e-300);
            prop_assert!(fast.sub(&slow).l2_norm() <= 1e-12 * scale * 10.0);
        }
    }

    #[test]
    fn json_round_trip(f in field_strategy(6)) {
        let text = serde_json::to_string(&f).unwrap();
        let back: SpectralField = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.truncated(f.nmax()), f);
    }
}

#[test]
fn h1_algebra_ratio_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let exact = ProductPolicy { cap: usize::MAX, rule: Dealias::None };
    let h1 = SobolevIndex::H1;
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let rf = 1 + trial % 6;
        let rg = 1 + (trial / 6) % 6;
        let mut f = random_field(&mut rng, rf as i64, 1.0);
        let mut g = random_field(&mut rng, rg as i64, 1.0);
        let sf: f64 = rand::Rng::gen_range(&mut rng, 0.01..1.0);
        let sg: f64 = rand::Rng::gen_range(&mut rng, 0.01..1.0);
        f = f.scaled(Complex64::from(sf / f.sobolev_norm(h1)));
        g = g.scaled(Complex64::from(sg / g.sobolev_norm(h1)));
        let sum = f.add(&g);
        let num = sum
            .power_nonlinearity(1, &exact)
            .unwrap()
            .sub(&f.power_nonlinearity(1, &exact).unwrap())
            .sobolev_norm(h1);
        let (nf, ng) = (f.sobolev_norm(h1), g.sobolev_norm(h1));
        let ratio = num / (ng * (nf * nf + ng * ng));
        assert!(ratio.is_finite());
        worst = worst.max(ratio);
    }
    assert!(worst < 10.0, "worst ratio {worst}");
}

#[test]
fn lifted_solution_solves_the_equation() {
    let params = NlsParams::cubic(Sign::Focusing);
    let data = TwoModeData::tight(Complex64::new(0.08, 0.02), Complex64::new(0.1, 0.0)).unwrap();
    let init = periodic_nls::closed_form::approx_two_mode(&params, &data, 0.0);
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 1e-3).collect();
    let ev = evolve(&init, &params, &SolverConfig { dt: 1e-3, ..SolverConfig::new(32, 1e-3, times) }).unwrap();
    let unit_res = residual(&ev.trajectory, &params).unwrap();
    assert!(unit_res.max < 1e-5, "unit residual {}", unit_res.max);
    for n in [2u64, 3, 4] {
        let map = ScalingMap::new(n, 1).unwrap();
        let lifted = rescale_up(&ev.trajectory, &map);
        let res = residual(&lifted, &params).unwrap();
        let expected = unit_res.max * map.amplitude_factor() * map.time_factor();
        assert!(res.max <= expected * (1.0 + 1e-6) + 1e-15, "N={n}: {} vs {expected}", res.max);
    }
}
