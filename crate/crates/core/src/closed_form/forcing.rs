//! Symbolic expansion of `|u|^{2m} u` for the two-mode ansatz.
//!
//! Writing `u = A + B z` with `z = e^{i(x+t)}`, `A = α e^{iωΦ₀t}` and
//! `B = β e^{iωΦ₁t}`, the nonlinearity is `(A + Bz)^{m+1} (Ā + B̄z̄)^m`.
//! Monomials are grouped by their power `k` of `z`; every monomial in a group
//! rotates at the same rate `λ_k = (1-k)Φ₀ + kΦ₁`. The groups `k = 0, 1`
//! reproduce the ansatz itself; the rest is the forcing error `E`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::params::{NlsParams, Sign, TwoModeData};
use super::two_mode::{approx_two_mode, phase_polynomial};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Exponents of `α`, `ᾱ`, `β`, `β̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Exponents {
    pub alpha: u32,
    pub alpha_conj: u32,
    pub beta: u32,
    pub beta_conj: u32,
}

impl Exponents {
    pub fn frequency(&self) -> i32 {
        self.beta as i32 - self.beta_conj as i32
    }

    fn eval(&self, alpha: Complex64, beta: Complex64) -> Complex64 {
        alpha.powu(self.alpha)
            * alpha.conj().powu(self.alpha_conj)
            * beta.powu(self.beta)
            * beta.conj().powu(self.beta_conj)
    }

    /// Rotation rate of the monomial in units of `ω`, excluding the `z` carrier.
    fn rate(&self, phi0: f64, phi1: f64) -> f64 {
        (self.alpha as f64 - self.alpha_conj as f64) * phi0
            + (self.beta as f64 - self.beta_conj as f64) * phi1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub coeff: u64,
    pub exponents: Exponents,
}

/// Integer-coefficient expansion of `(A + Bz)^{m+1} (Ā + B̄z̄)^m`.
#[derive(Debug, Clone)]
pub struct ForcingExpansion {
    m: u32,
    groups: BTreeMap<i32, Vec<Monomial>>,
}

impl ForcingExpansion {
    pub fn new(m: u32) -> Self {
        let mut poly: BTreeMap<Exponents, u64> = BTreeMap::from([(Exponents::default(), 1)]);
        let times = |poly: &BTreeMap<Exponents, u64>, conj: bool| {
            let mut out = BTreeMap::new();
            for (e, &c) in poly {
                let (mut left, mut right) = (*e, *e);
                if conj {
                    left.alpha_conj += 1;
                    right.beta_conj += 1;
                } else {
                    left.alpha += 1;
                    right.beta += 1;
                }
                *out.entry(left).or_insert(0) += c;
                *out.entry(right).or_insert(0) += c;
            }
            out
        };
        for _ in 0..=m {
            poly = times(&poly, false);
        }
        for _ in 0..m {
            poly = times(&poly, true);
        }
        let mut groups: BTreeMap<i32, Vec<Monomial>> = BTreeMap::new();
        for (exponents, coeff) in poly {
            groups
                .entry(exponents.frequency())
                .or_default()
                .push(Monomial { coeff, exponents });
        }
        Self { m, groups }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i32> + '_ {
        self.groups.keys().copied()
    }

    pub fn monomials(&self, k: i32) -> &[Monomial] {
        self.groups.get(&k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn coefficient(&self, k: i32, alpha: Complex64, beta: Complex64) -> Complex64 {
        self.monomials(k)
            .iter()
            .map(|mono| mono.coeff as f64 * mono.exponents.eval(alpha, beta))
            .sum()
    }

    /// Evaluated terms for every frequency, using the actual data.
    pub fn terms(&self, data: &TwoModeData) -> Vec<ForcingTerm> {
        let (a, b) = (data.alpha().norm(), data.beta().norm());
        let phi0 = phase_polynomial(self.m, a, b);
        let phi1 = phase_polynomial(self.m, b, a);
        self.groups
            .iter()
            .map(|(&k, monos)| ForcingTerm {
                k,
                coeff: self.coefficient(k, data.alpha(), data.beta()),
                rate: monos[0].exponents.rate(phi0, phi1),
            })
            .collect()
    }
}

/// One group `c_k e^{iωλ_k t} e^{ik(x+t)}` of `|u|^{2m} u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForcingTerm {
    pub k: i32,
    pub coeff: Complex64,
    /// `λ_k`
    pub rate: f64,
}

impl ForcingTerm {
    /// Fourier coefficient at frequency `k` and time `t`.
    pub fn value(&self, omega: Sign, t: f64) -> Complex64 {
        self.coeff * Complex64::from_polar(1.0, (omega.value() * self.rate + self.k as f64) * t)
    }
}

/// All groups `k ∈ {-m, …, m+1}` of `|u_{α,β}|^{2m} u_{α,β}`.
pub fn two_mode_forcing(params: &NlsParams, data: &TwoModeData) -> Vec<ForcingTerm> {
    ForcingExpansion::new(params.m()).terms(data)
}

/// Groups outside the two-mode system (`k ∉ {0, 1}`).
pub fn off_system_forcing(params: &NlsParams, data: &TwoModeData) -> Vec<ForcingTerm> {
    two_mode_forcing(params, data)
        .into_iter()
        .filter(|t| t.k != 0 && t.k != 1)
        .collect()
}

/// The four quintic forcing groups `k ∈ {-2, -1, 2, 3}`.
pub fn quintic_error_structure(data: &TwoModeData, omega: Sign) -> Vec<ForcingTerm> {
    off_system_forcing(&NlsParams::quintic(omega), data)
}

/// `Σ_k c_k e^{iωλ_k t} e^{ik(x+t)}` at a physical point.
pub fn evaluate_forcing(terms: &[ForcingTerm], omega: Sign, t: f64, x: f64) -> Complex64 {
    terms
        .iter()
        .map(|term| term.value(omega, t) * Complex64::from_polar(1.0, term.k as f64 * x))
        .sum()
}

/// Forcing groups as a field at time `t`.
pub fn forcing_field(terms: &[ForcingTerm], omega: Sign, t: f64) -> SpectralField {
    SpectralField::from_modes(terms.iter().map(|term| (term.k as i64, term.value(omega, t))))
}

const RESONANCE_FLOOR: f64 = 1e-6;

/// `v_k(t) = amplitude (e^{iμt} - 1) e^{ik^2 t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionMode {
    pub k: i32,
    pub amplitude: Complex64,
    /// `μ = ωλ_k + k - k^2`
    pub detuning: f64,
}

impl CorrectionMode {
    pub fn value(&self, t: f64) -> Complex64 {
        let k2 = (self.k * self.k) as f64;
        self.amplitude
            * (Complex64::from_polar(1.0, self.detuning * t) - 1.0)
            * Complex64::from_polar(1.0, k2 * t)
    }
}

/// Solution `v` of `(-i∂_t + ∂_xx) v = ωE`, `v(0) = 0`, where `E` is the
/// off-system forcing of the two-mode ansatz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoModeCorrection {
    params: NlsParams,
    data: TwoModeData,
    modes: Vec<CorrectionMode>,
}

impl TwoModeCorrection {
    pub fn new(params: NlsParams, data: TwoModeData) -> Result<Self> {
        let w = params.omega_value();
        let modes = off_system_forcing(&params, &data)
            .into_iter()
            .map(|term| {
                let k = term.k as f64;
                let detuning = w * term.rate + k - k * k;
                if detuning.abs() < RESONANCE_FLOOR {
                    return Err(Error::NearResonance {
                        denominator: detuning,
                    });
                }
                Ok(CorrectionMode {
                    k: term.k,
                    amplitude: w * term.coeff / detuning,
                    detuning,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            data,
            modes,
        })
    }

    pub fn modes(&self) -> &[CorrectionMode] {
        &self.modes
    }

    pub fn at(&self, t: f64) -> SpectralField {
        SpectralField::from_modes(self.modes.iter().map(|m| (m.k as i64, m.value(t))))
    }

    /// `u' = u_{α,β} + v`, the solution of the linearly forced problem.
    pub fn corrected(&self, t: f64) -> SpectralField {
        approx_two_mode(&self.params, &self.data, t).add(&self.at(t))
    }
}

/// Cubic correction `v(t)`, supported on frequencies `-1` and `2`.
pub fn cubic_correction(data: &TwoModeData, omega: Sign, t: f64) -> Result<SpectralField> {
    Ok(TwoModeCorrection::new(NlsParams::cubic(omega), *data)?.at(t))
}
