use num_complex::Complex64;
use serde::Serialize;

use super::bound::uniform_times;
use super::config::SolverSettings;
use super::lift::{lifted_two_mode, phase_rate};
use super::report::RunRecord;
use super::thm2::predicted_pair_rate;
use crate::closed_form::{plane_wave, two_mode_phase, NlsParams, TwoModeData};
use crate::error::Result;

/// Measured against predicted phase rate from a PDE run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateProbe {
    pub n: u64,
    pub horizon: f64,
    pub predicted: f64,
    pub measured: f64,
    pub relative_error: f64,
    pub runs: Vec<RunRecord>,
}

fn unit_data(a: f64, b: f64) -> Result<TwoModeData> {
    TwoModeData::tight(Complex64::from(a), Complex64::from(b))
}

/// Rate of `arg(ũ(t)(0) conj(u(t)(0)))` for `ũ(0) = α + β e^{iNx}` (lifted
/// from unit scale) against the plane wave `u(0) = α`; predicted
/// `ω(Φ(α, β) - α^{2m}) N²`, which is `2ω|β|² N²` when cubic.
pub fn probe_gap_rate(
    nls: &NlsParams,
    alpha: f64,
    beta: f64,
    n: u64,
    horizon: f64,
    settings: &SolverSettings,
    samples: usize,
) -> Result<RateProbe> {
    let times = uniform_times(horizon, samples);
    let run = lifted_two_mode(nls, &unit_data(alpha, beta)?, n, &times, settings)?;
    let lift = (n as f64).powf(1.0 / nls.m() as f64);
    let a = Complex64::from(alpha * lift);
    let pair: Vec<Complex64> = times
        .iter()
        .zip(&run.zero_mode)
        .map(|(&t, z)| z * plane_wave(nls, a, 0, t).get(0).conj())
        .collect();
    let measured = phase_rate(&times, &pair);
    let n2 = (n as f64).powi(2);
    let predicted =
        nls.omega_value() * (two_mode_phase(nls, alpha, beta) - alpha.powi(2 * nls.m() as i32)) * n2;
    Ok(RateProbe {
        n,
        horizon,
        predicted,
        measured,
        relative_error: ((measured - predicted) / predicted).abs(),
        runs: run.runs,
    })
}

/// Rate of `arg(û₁(t)(0) conj(û₂(t)(0)))` for `u_j(0) = α_j + β e^{iNx}`.
pub fn probe_pair_rate(
    nls: &NlsParams,
    alpha1: f64,
    alpha2: f64,
    beta: f64,
    n: u64,
    horizon: f64,
    settings: &SolverSettings,
    samples: usize,
) -> Result<RateProbe> {
    let times = uniform_times(horizon, samples);
    let (r1, r2) = rayon::join(
        || lifted_two_mode(nls, &unit_data(alpha1, beta)?, n, &times, settings),
        || lifted_two_mode(nls, &unit_data(alpha2, beta)?, n, &times, settings),
    );
    let (r1, r2) = (r1?, r2?);
    let pair: Vec<Complex64> = r1.zero_mode.iter().zip(&r2.zero_mode).map(|(p, q)| p * q.conj()).collect();
    let measured = phase_rate(&times, &pair);
    let predicted = predicted_pair_rate(nls, alpha1, alpha2, beta) * (n as f64).powi(2);
    Ok(RateProbe {
        n,
        horizon,
        predicted,
        measured,
        relative_error: ((measured - predicted) / predicted).abs(),
        runs: r1.runs,
    })
}
