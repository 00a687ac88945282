//! Exact and approximate analytic solutions: plane waves, the two-mode
//! ansatz for any odd power, its explicit linear correction and the grouped
//! forcing terms of the nonlinearity.

mod forcing;
mod params;
mod two_mode;

pub use forcing::{
    cubic_correction, evaluate_forcing, forcing_field, off_system_forcing,
    quintic_error_structure, two_mode_forcing, CorrectionMode, Exponents, ForcingExpansion,
    ForcingTerm, Monomial, TwoModeCorrection,
};
pub use params::{NlsParams, Sign, TwoModeData, DEFAULT_SIGMA_CAP};
pub use two_mode::{
    approx_two_mode, phase_coefficients, plane_wave, two_mode_phase, two_mode_rates,
};
#[allow(unused_imports)]
pub(crate) use two_mode::phase_polynomial;
