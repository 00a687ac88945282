use num_complex::Complex64;

use super::config::{Caps, SolverSettings};
use super::report::RunRecord;
use crate::closed_form::{approx_two_mode, NlsParams, TwoModeData};
use crate::error::{Error, Result};
use crate::solver::evolve;
use crate::spectral::{rescale_up, ScalingMap};

pub const RESCALING_TOLERANCE: f64 = 1e-6;

/// Zero-mode history of a frequency-`N` two-mode solution.
#[derive(Debug, Clone)]
pub struct LiftedRun {
    pub times: Vec<f64>,
    pub zero_mode: Vec<Complex64>,
    pub mass: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    /// Largest `L²` gap between direct and rescaled evolutions.
    pub rescaling_mismatch: f64,
    pub mass_drift: f64,
    pub hamiltonian_drift: f64,
    pub runs: Vec<RunRecord>,
}

/// Unit-scale steps needed to reach lifted time `t_final` at frequency `n`.
pub fn unit_steps(n: f64, t_final: f64, dt: f64) -> f64 {
    (n * n * t_final / dt).ceil()
}

/// Whether a direct frequency-`n` run to `t_final` fits the caps.
pub fn pde_affordable(n: u64, t_final: f64, settings: &SolverSettings, caps: &Caps) -> bool {
    n <= caps.n_max
        && unit_steps(n as f64, t_final, settings.dt) <= caps.step_budget as f64
        && (settings.gridsize as u128) * (n as u128) <= caps.gridsize_max as u128
}

/// Evolves `N^{1/m} U(N² t, N x)` for the unit-scale two-mode data both
/// directly on a grid of `gridsize·N` points and by lifting the unit-scale
/// evolution, and checks that the two agree.
pub fn lifted_two_mode(
    params: &NlsParams,
    unit: &TwoModeData,
    n: u64,
    times: &[f64],
    settings: &SolverSettings,
) -> Result<LiftedRun> {
    let map = ScalingMap::new(n, params.m())?;
    let t2 = map.time_factor();
    let unit_init = approx_two_mode(params, unit, 0.0);
    let unit_cfg = settings.config(times.iter().map(|t| t * t2).collect());
    let direct_settings = SolverSettings {
        gridsize: settings.gridsize * n as usize,
        dt: settings.dt / t2,
        dealias: settings.dealias,
    };
    let direct_cfg = direct_settings.config(times.to_vec());
    let (unit_ev, direct_ev) = if n == 1 {
        (evolve(&unit_init, params, &unit_cfg)?, None)
    } else {
        let lifted_init = map.lift_field(&unit_init);
        let (a, b) = rayon::join(
            || evolve(&unit_init, params, &unit_cfg),
            || evolve(&lifted_init, params, &direct_cfg),
        );
        (a?, Some(b?))
    };
    let rescaled = rescale_up(&unit_ev.trajectory, &map);
    let mut runs = vec![RunRecord::new(format!("unit scale, lifted by N={n}"), settings)];
    let mut mismatch: f64 = 0.0;
    if let Some(direct) = &direct_ev {
        runs.push(RunRecord::new(format!("direct at N={n}"), &direct_settings));
        for (a, b) in rescaled.snapshots().iter().zip(direct.trajectory.snapshots()) {
            mismatch = mismatch.max(a.field.sub(&b.field).l2_norm());
        }
        if mismatch > RESCALING_TOLERANCE {
            return Err(Error::RescalingMismatch {
                mismatch,
                tolerance: RESCALING_TOLERANCE,
            });
        }
    }
    let amp2 = map.amplitude_factor().powi(2);
    let h_scale = amp2 * t2;
    let zero_mode = match &direct_ev {
        Some(d) => d.trajectory.snapshots().iter().map(|s| s.field.get(0)).collect(),
        None => rescaled.snapshots().iter().map(|s| s.field.get(0)).collect(),
    };
    Ok(LiftedRun {
        times: times.to_vec(),
        zero_mode,
        mass: unit_ev.diagnostics.iter().map(|d| d.mass * amp2).collect(),
        hamiltonian: unit_ev.diagnostics.iter().map(|d| d.hamiltonian * h_scale).collect(),
        rescaling_mismatch: mismatch,
        mass_drift: unit_ev.mass_drift,
        hamiltonian_drift: unit_ev.hamiltonian_drift,
        runs,
    })
}

/// Unwrapped arguments of a sampled complex signal.
pub fn unwrapped_phase(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for w in z {
        let a = w.arg();
        if let Some(p) = prev {
            let jump = a - p;
            if jump > std::f64::consts::PI {
                offset -= std::f64::consts::TAU;
            } else if jump < -std::f64::consts::PI {
                offset += std::f64::consts::TAU;
            }
        }
        prev = Some(a);
        out.push(a + offset);
    }
    out
}

/// Least-squares slope of the unwrapped phase of `z` against `t`.
pub fn phase_rate(t: &[f64], z: &[Complex64]) -> f64 {
    let phi = unwrapped_phase(z);
    let n = t.len().min(phi.len()) as f64;
    let tm = t.iter().sum::<f64>() / n;
    let pm = phi.iter().sum::<f64>() / n;
    let (num, den) = t
        .iter()
        .zip(&phi)
        .fold((0.0, 0.0), |(num, den), (ti, pi)| {
            (num + (ti - tm) * (pi - pm), den + (ti - tm) * (ti - tm))
        });
    num / den
}
