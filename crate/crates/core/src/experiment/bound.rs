use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::SolverSettings;
use super::report::RunRecord;
use crate::closed_form::{approx_two_mode, NlsParams, TwoModeCorrection, TwoModeData};
use crate::error::{Error, Result};
use crate::solver::evolve;
use crate::spectral::SobolevIndex;

/// `c σ^{-2m} log(1/σ)`
pub fn bound_horizon(m: u32, sigma: f64, horizon_factor: f64) -> f64 {
    horizon_factor * sigma.powi(-2 * m as i32) * (1.0 / sigma).ln()
}

/// Power of σ the closeness bound is normalized by: `p`.
pub fn bound_exponent(params: &NlsParams) -> u32 {
    params.p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSample {
    pub t: f64,
    /// `‖U(t) - u(t)‖_{H¹} / σ^q`
    pub ratio: f64,
    /// Same ratio against the corrected approximation `u + v`.
    pub corrected_ratio: Option<f64>,
    pub mass: f64,
    pub hamiltonian: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundTrace {
    pub params: NlsParams,
    pub data: TwoModeData,
    pub exponent: u32,
    pub horizon: f64,
    pub samples: Vec<BoundSample>,
    pub max_ratio: f64,
    pub max_corrected_ratio: Option<f64>,
    pub mass_drift: f64,
    pub hamiltonian_drift: f64,
    pub run: RunRecord,
}

/// Evolves the two-mode data numerically over `[0, c σ^{-2m} log(1/σ)]` and
/// tracks its `H¹` distance to the closed-form ansatz in units of `σ^q`.
pub fn verify_approximation_bound(
    params: &NlsParams,
    data: &TwoModeData,
    horizon_factor: f64,
    settings: &SolverSettings,
    samples: usize,
) -> Result<BoundTrace> {
    let sigma = data.sigma();
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::invalid("sigma", format!("must lie in (0, 1), got {sigma}")));
    }
    if !(horizon_factor > 0.0 && horizon_factor.is_finite()) {
        return Err(Error::invalid("horizon_factor", "must be positive"));
    }
    let horizon = bound_horizon(params.m(), sigma, horizon_factor);
    let q = bound_exponent(params);
    let scale = sigma.powi(q as i32);
    let config = settings.config(uniform_times(horizon, samples));
    let ev = evolve(&approx_two_mode(params, data, 0.0), params, &config)?;
    let correction = TwoModeCorrection::new(*params, *data).ok();

    let samples: Vec<BoundSample> = ev
        .trajectory
        .snapshots()
        .iter()
        .zip(&ev.diagnostics)
        .map(|(snap, d)| {
            let ratio = snap
                .field
                .sub(&approx_two_mode(params, data, snap.t))
                .sobolev_norm(SobolevIndex::H1)
                / scale;
            let corrected_ratio = correction.as_ref().map(|c| {
                snap.field.sub(&c.corrected(snap.t)).sobolev_norm(SobolevIndex::H1) / scale
            });
            BoundSample {
                t: snap.t,
                ratio,
                corrected_ratio,
                mass: d.mass,
                hamiltonian: d.hamiltonian,
            }
        })
        .collect();
    let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let max_corrected_ratio = correction
        .as_ref()
        .map(|_| samples.iter().filter_map(|s| s.corrected_ratio).fold(0.0, f64::max));
    Ok(BoundTrace {
        params: *params,
        data: *data,
        exponent: q,
        horizon,
        samples,
        max_ratio,
        max_corrected_ratio,
        mass_drift: ev.mass_drift,
        hamiltonian_drift: ev.hamiltonian_drift,
        run: RunRecord::new(format!("bound sigma={sigma}"), settings),
    })
}

/// Two-mode data `α = ratio·σ`, `β = σ`.
pub fn shaped_data(sigma: f64, alpha_ratio: f64, sigma_cap: f64) -> Result<TwoModeData> {
    TwoModeData::with_cap(
        Complex64::from(alpha_ratio * sigma),
        Complex64::from(sigma),
        sigma,
        sigma_cap,
    )
}

/// Runs `verify_approximation_bound` for every σ in parallel.
pub fn sweep_bound(
    params: &NlsParams,
    sigmas: &[f64],
    alpha_ratio: f64,
    horizon_factor: f64,
    settings: &SolverSettings,
    samples: usize,
) -> Result<Vec<BoundTrace>> {
    if !(0.0..=1.0).contains(&alpha_ratio) {
        return Err(Error::invalid("alpha_ratio", "must lie in [0, 1]"));
    }
    sigmas
        .par_iter()
        .map(|&sigma| {
            let data = shaped_data(sigma, alpha_ratio, f64::INFINITY)?;
            verify_approximation_bound(params, &data, horizon_factor, settings, samples)
        })
        .collect()
}

/// Largest over smallest of the positive values.
pub fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub(crate) fn uniform_times(t_final: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(1);
    (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::Sign;

    #[test]
    fn horizon_formula() {
        let h = bound_horizon(1, 0.05, 0.1);
        assert!((h - 0.1 * 400.0 * 20f64.ln()).abs() < 1e-10);
        assert!((bound_horizon(2, 0.1, 0.1) - 1e3 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn ratio_vanishes_at_start_and_for_plane_waves() {
        let p = NlsParams::cubic(Sign::Defocusing);
        let s = SolverSettings::default();
        let tr = verify_approximation_bound(&p, &shaped_data(0.1, 0.5, 0.25).unwrap(), 0.01, &s, 20).unwrap();
        assert_eq!(tr.samples[0].ratio, 0.0);
        assert!(tr.max_ratio > 0.0 && tr.max_ratio.is_finite());

        let flat = TwoModeData::new(Complex64::new(0.1, 0.0), Complex64::default(), 0.1).unwrap();
        let tr = verify_approximation_bound(&p, &flat, 0.05, &s, 20).unwrap();
        assert!(tr.max_ratio < 1e-9, "{}", tr.max_ratio);
    }

    #[test]
    fn rejects_sigma_above_cap() {
        assert!(shaped_data(0.3, 0.5, 0.25).is_err());
    }

    #[test]
    fn spread_of_values() {
        assert_eq!(spread([1.0, 3.0, 2.0]), 3.0);
        assert_eq!(spread([0.0, 1.0]), f64::INFINITY);
    }
}
