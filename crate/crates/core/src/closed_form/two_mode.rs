use num_complex::Complex64;

use super::params::{NlsParams, TwoModeData};
use crate::spectral::SpectralField;

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Exact single-mode solution `{N -> α e^{i(N^2 + ω|α|^{p-1}) t}}`.
pub fn plane_wave(params: &NlsParams, alpha: Complex64, n: i64, t: f64) -> SpectralField {
    let rate = (n * n) as f64 + params.omega_value() * alpha.norm().powi(params.p() as i32 - 1);
    SpectralField::from_modes([(n, alpha * Complex64::from_polar(1.0, rate * t))])
}

/// `Φ(a, b) = Σ_{j=0..m} C(m+1, j) C(m, j) a^{2m-2j} b^{2j}`.
///
/// The zero mode of the two-mode ansatz rotates at `ωΦ(|α|, |β|)`, the unit
/// mode at `ωΦ(|β|, |α|)` on top of its linear rate.
pub fn two_mode_phase(params: &NlsParams, a: f64, b: f64) -> f64 {
    phase_polynomial(params.m(), a, b)
}

pub(crate) fn phase_polynomial(m: u32, a: f64, b: f64) -> f64 {
    let m64 = m as u64;
    (0..=m)
        .map(|j| {
            let c = (binomial(m64 + 1, j as u64) * binomial(m64, j as u64)) as f64;
            c * a.powi(2 * (m - j) as i32) * b.powi(2 * j as i32)
        })
        .sum()
}

/// Integer coefficients `C(m+1, j) C(m, j)` for `j = 0..=m`.
pub fn phase_coefficients(m: u32) -> Vec<u64> {
    (0..=m as u64)
        .map(|j| binomial(m as u64 + 1, j) * binomial(m as u64, j))
        .collect()
}

/// Rotation rates `(zero mode, unit mode)` of the two-mode ansatz; the unit
/// mode rate includes the linear `+1`.
pub fn two_mode_rates(params: &NlsParams, data: &TwoModeData) -> (f64, f64) {
    let (a, b) = (data.alpha().norm(), data.beta().norm());
    let w = params.omega_value();
    (w * two_mode_phase(params, a, b), 1.0 + w * two_mode_phase(params, b, a))
}

/// `{0 -> α e^{iωtΦ(|α|,|β|)}, 1 -> β e^{iωtΦ(|β|,|α|)} e^{it}}`.
pub fn approx_two_mode(params: &NlsParams, data: &TwoModeData, t: f64) -> SpectralField {
    let (r0, r1) = two_mode_rates(params, data);
    SpectralField::from_modes([
        (0, data.alpha() * Complex64::from_polar(1.0, r0 * t)),
        (1, data.beta() * Complex64::from_polar(1.0, r1 * t)),
    ])
}
