//! Desk-scale versions of the closeness bounds and the two decoherence
//! experiments, with their parameter selection, configuration and reports.

mod bound;
mod config;
mod lift;
mod probe;
mod report;
mod thm1;
mod thm2;

pub use bound::{
    bound_exponent, bound_horizon, shaped_data, spread, sweep_bound, verify_approximation_bound,
    BoundSample, BoundTrace,
};
pub use config::{
    Caps, Config, ExperimentKind, ExperimentParams, ExperimentSection, SolverSettings,
};
pub use lift::{
    lifted_two_mode, pde_affordable, phase_rate, unit_steps, unwrapped_phase, LiftedRun,
    RESCALING_TOLERANCE,
};
pub use probe::{probe_gap_rate, probe_pair_rate, RateProbe};
pub use report::{ExperimentReport, Measurement, RunRecord, TraceRow, TraceSource, Verdict};
pub use thm1::{
    choose_parameters_thm1, minimal_n_thm1, params_thm1, run_thm1, thm1_conditions,
    thm1_negative_control, RunSetup, Thm1Conditions, CONTROL_THRESHOLD, GAP_THRESHOLD,
};
pub use thm2::{
    choose_parameters_thm2, default_large_m, minimal_n_thm2, params_thm2, predicted_pair_rate,
    run_thm2, thm2_conditions, Thm2Conditions, RATE_TOLERANCE,
};

use crate::spectral::SobolevIndex;

/// `H^s` norm of a field given by its nonzero `(frequency, |coefficient|)`
/// pairs; usable at frequencies far beyond any dense window.
pub fn sparse_sobolev_norm(modes: &[(i64, f64)], s: SobolevIndex) -> f64 {
    modes
        .iter()
        .map(|&(n, a)| s.weight(n) * a * a)
        .sum::<f64>()
        .sqrt()
}

impl RunSetup {
    pub fn from_config(config: &Config) -> Self {
        Self {
            nls: config.nls,
            horizon_factor: config.experiment.horizon_factor,
            rotation_margin: config.experiment.rotation_margin,
            caps: config.experiment.caps,
            solver: config.solver,
            samples: config.experiment.samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralField;
    use num_complex::Complex64;

    #[test]
    fn sparse_norm_matches_dense() {
        let s = SobolevIndex::new(-0.25).unwrap();
        let dense = SpectralField::from_modes([(0, Complex64::new(0.25, 0.0)), (40, Complex64::new(0.0, 0.3))]);
        let sparse = sparse_sobolev_norm(&[(0, 0.25), (40, 0.3)], s);
        assert!((dense.sobolev_norm(s) - sparse).abs() < 1e-15);
    }
}
