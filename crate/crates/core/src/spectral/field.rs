use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sum::compensated_sum;
use super::transform::{next_pow2_above, FftGrid};
use crate::error::{Error, Result};

/// Regularity exponent of `H^s(T)`; negative values are allowed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0.0);
    pub const H1: SobolevIndex = SobolevIndex(1.0);

    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() {
            Ok(Self(s))
        } else {
            Err(Error::invalid("s", format!("must be finite, got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Weight `(1 + |n|)^{2s}` attached to frequency `n`.
    pub fn weight(self, n: i64) -> f64 {
        (1.0 + n.unsigned_abs() as f64).powf(2.0 * self.0)
    }
}

impl TryFrom<f64> for SobolevIndex {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<SobolevIndex> for f64 {
    fn from(s: SobolevIndex) -> f64 {
        s.0
    }
}

/// How pointwise products handle window growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Overflowing the cap is an error.
    None,
    /// Keep `|n| <= cap`, computed on a grid with at least `3·cap` points.
    #[default]
    TwoThirds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductPolicy {
    pub cap: usize,
    pub rule: Dealias,
}

impl Default for ProductPolicy {
    fn default() -> Self {
        Self {
            cap: 1 << 17,
            rule: Dealias::TwoThirds,
        }
    }
}

impl ProductPolicy {
    /// Grid size and output window for a product whose exact window is `required`.
    fn plan(&self, required: usize, input_nmax: usize) -> Result<(usize, usize)> {
        if required <= self.cap {
            return Ok((next_pow2_above(2 * required), required));
        }
        match self.rule {
            Dealias::None => Err(Error::WindowOverflow {
                required,
                cap: self.cap,
            }),
            Dealias::TwoThirds => {
                let grid = (3 * self.cap)
                    .next_power_of_two()
                    .max(next_pow2_above(2 * input_nmax));
                Ok((grid, self.cap))
            }
        }
    }
}

/// Periodic complex field stored as Fourier coefficients on `[-nmax, nmax]`.
///
/// Frequencies outside the window are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct SpectralField {
    nmax: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(nmax: usize) -> Self {
        Self {
            nmax,
            coeffs: vec![Complex64::default(); 2 * nmax + 1],
        }
    }

    /// Builds a field whose window is the smallest one holding every mode.
    pub fn from_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let modes: Vec<_> = modes.into_iter().collect();
        let nmax = modes
            .iter()
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut field = Self::zeros(nmax);
        for (n, a) in modes {
            field.coeffs[(n + nmax as i64) as usize] += a;
        }
        field
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.nmax {
            Complex64::default()
        } else {
            self.coeffs[(n + self.nmax as i64) as usize]
        }
    }

    /// Sets frequency `n`, growing the window if needed.
    pub fn set(&mut self, n: i64, value: Complex64) {
        let needed = n.unsigned_abs() as usize;
        if needed > self.nmax {
            *self = self.with_window(needed);
        }
        let idx = (n + self.nmax as i64) as usize;
        self.coeffs[idx] = value;
    }

    /// `(n, a_n)` for every frequency in the window, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let offset = self.nmax as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &a)| (i as i64 - offset, a))
    }

    /// Copy on a larger window; never drops coefficients.
    pub fn with_window(&self, nmax: usize) -> Self {
        let nmax = nmax.max(self.nmax);
        let mut out = Self::zeros(nmax);
        let shift = nmax - self.nmax;
        out.coeffs[shift..shift + self.coeffs.len()].copy_from_slice(&self.coeffs);
        out
    }

    /// Explicit projection onto `|n| <= nmax`.
    pub fn truncated(&self, nmax: usize) -> Self {
        if nmax >= self.nmax {
            return self.with_window(nmax);
        }
        let shift = self.nmax - nmax;
        Self {
            nmax,
            coeffs: self.coeffs[shift..shift + 2 * nmax + 1].to_vec(),
        }
    }

    /// Largest `|n|` with a coefficient above `tol` in modulus.
    pub fn support_radius(&self, tol: f64) -> usize {
        self.iter()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            nmax: self.nmax,
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let nmax = self.nmax.max(other.nmax);
        let n = nmax as i64;
        let mut out = Self::zeros(nmax);
        for (i, k) in (-n..=n).enumerate() {
            out.coeffs[i] = op(self.get(k), other.get(k));
        }
        out
    }

    /// Complex conjugate in physical space: `a_n -> conj(a_{-n})`.
    pub fn conj(&self) -> Self {
        Self {
            nmax: self.nmax,
            coeffs: self.coeffs.iter().rev().map(|a| a.conj()).collect(),
        }
    }

    /// `Σ |a_n|^2`, the normalized mass `(1/2π)∫|u|^2`.
    pub fn mass(&self) -> f64 {
        compensated_sum(self.coeffs.iter().map(|a| a.norm_sqr()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn sobolev_norm(&self, s: SobolevIndex) -> f64 {
        sobolev_norm(self, s)
    }

    /// Pointwise physical-space product.
    pub fn mul(&self, other: &Self, policy: &ProductPolicy) -> Result<Self> {
        pointwise(
            &[self, other],
            self.nmax + other.nmax,
            policy,
            |z| z[0] * z[1],
        )
    }

    /// `|u|^{2m} u`, the gauge-invariant power nonlinearity of degree `2m+1`.
    pub fn power_nonlinearity(&self, m: u32, policy: &ProductPolicy) -> Result<Self> {
        pointwise(&[self], (2 * m as usize + 1) * self.nmax, policy, |z| {
            z[0] * z[0].norm_sqr().powi(m as i32)
        })
    }
}

/// `(Σ_n (1+|n|)^{2s} |a_n|^2)^{1/2}`.
pub fn sobolev_norm(field: &SpectralField, s: SobolevIndex) -> f64 {
    compensated_sum(field.iter().map(|(n, a)| s.weight(n) * a.norm_sqr())).sqrt()
}

fn pointwise(
    inputs: &[&SpectralField],
    required: usize,
    policy: &ProductPolicy,
    op: impl Fn(&[Complex64]) -> Complex64,
) -> Result<SpectralField> {
    let input_nmax = inputs.iter().map(|f| f.nmax()).max().unwrap_or(0);
    let (size, out_nmax) = policy.plan(required, input_nmax)?;
    let mut grid = FftGrid::new(size);
    let mut samples = Vec::with_capacity(inputs.len());
    for f in inputs {
        let mut buf = vec![Complex64::default(); size];
        grid.load(f, &mut buf)?;
        grid.synthesize(&mut buf);
        samples.push(buf);
    }
    let mut args = vec![Complex64::default(); inputs.len()];
    let mut out: Vec<Complex64> = (0..size)
        .map(|j| {
            for (arg, s) in args.iter_mut().zip(&samples) {
                *arg = s[j];
            }
            op(&args)
        })
        .collect();
    grid.analyze(&mut out);
    grid.extract(&out, out_nmax)
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    nmax: usize,
    coeffs: Vec<(i64, f64, f64)>,
}

impl From<SpectralField> for FieldRepr {
    fn from(f: SpectralField) -> Self {
        let coeffs = f
            .iter()
            .filter(|(_, a)| *a != Complex64::default())
            .map(|(n, a)| (n, a.re, a.im))
            .collect();
        FieldRepr {
            nmax: f.nmax,
            coeffs,
        }
    }
}

impl TryFrom<FieldRepr> for SpectralField {
    type Error = Error;

    fn try_from(repr: FieldRepr) -> Result<Self> {
        let mut field = SpectralField::zeros(repr.nmax);
        let mut last = None;
        for (n, re, im) in repr.coeffs {
            if n.unsigned_abs() as usize > repr.nmax {
                return Err(Error::OutsideWindow { n, nmax: repr.nmax });
            }
            if last.is_some_and(|prev| prev >= n) {
                return Err(Error::invalid(
                    "coeffs",
                    "frequencies must be strictly increasing",
                ));
            }
            last = Some(n);
            field.set(n, Complex64::new(re, im));
        }
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sobolev_norm_of_constant_ignores_s() {
        let f = SpectralField::from_modes([(0, c(1.0, 0.0))]);
        assert_eq!(f.sobolev_norm(SobolevIndex::new(-3.0).unwrap()), 1.0);
    }

    #[test]
    fn sobolev_norm_unit_mode_h1() {
        let f = SpectralField::from_modes([(1, c(1.0, 0.0))]);
        assert!((f.sobolev_norm(SobolevIndex::H1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_field_has_zero_norm() {
        let f = SpectralField::zeros(0);
        assert_eq!(f.sobolev_norm(SobolevIndex::H1), 0.0);
        let g = SpectralField::from_modes(std::iter::empty());
        assert_eq!(g.l2_norm(), 0.0);
    }

    #[test]
    fn uses_one_plus_abs_n_weight_not_bracket() {
        let f = SpectralField::from_modes([(3, c(1.0, 0.0))]);
        let s = SobolevIndex::new(1.0).unwrap();
        assert!((f.sobolev_norm(s) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn nearby_data_distance() {
        // {N -> δN^{-s}/4, 0 -> ρ/4}
        let (rho, delta, s, n) = (1.0_f64, 0.1_f64, -0.25_f64, 4096_i64);
        let high = delta * (n as f64).powf(-s) / 4.0;
        let f = SpectralField::from_modes([(0, c(rho / 4.0, 0.0)), (n, c(high, 0.0))]);
        let got = f.sobolev_norm(SobolevIndex::new(s).unwrap());
        let expected = (rho * rho / 16.0
            + (delta / 4.0).powi(2) * (1.0 + n as f64).powf(2.0 * s) * (n as f64).powf(-2.0 * s))
        .sqrt();
        assert!((got - expected).abs() < 1e-15);
        assert!(got < rho);
        assert!((got - rho / 4.0).abs() < delta);
    }

    #[test]
    fn window_growth_keeps_coefficients() {
        let mut f = SpectralField::from_modes([(1, c(1.0, 2.0))]);
        f.set(-5, c(0.5, 0.0));
        assert_eq!(f.nmax(), 5);
        assert_eq!(f.get(1), c(1.0, 2.0));
        assert_eq!(f.get(-5), c(0.5, 0.0));
        assert_eq!(f.get(9), c(0.0, 0.0));
        assert_eq!(f.truncated(1).get(1), c(1.0, 2.0));
    }

    #[test]
    fn conj_maps_frequency_n_to_minus_n() {
        let f = SpectralField::from_modes([(2, c(1.0, 1.0)), (-1, c(0.0, 3.0))]);
        let g = f.conj();
        assert_eq!(g.get(-2), c(1.0, -1.0));
        assert_eq!(g.get(1), c(0.0, -3.0));
    }

    #[test]
    fn product_extends_window() {
        let f = SpectralField::from_modes([(2, c(1.0, 0.0)), (0, c(1.0, 0.0))]);
        let g = SpectralField::from_modes([(3, c(2.0, 0.0))]);
        let h = f.mul(&g, &ProductPolicy::default()).unwrap();
        assert_eq!(h.nmax(), 5);
        assert!((h.get(5) - c(2.0, 0.0)).norm() < 1e-14);
        assert!((h.get(3) - c(2.0, 0.0)).norm() < 1e-14);
        assert!((h.l2_norm() - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn product_overflow_without_rule_is_error() {
        let f = SpectralField::from_modes([(4, c(1.0, 0.0))]);
        let policy = ProductPolicy {
            cap: 6,
            rule: Dealias::None,
        };
        assert!(matches!(
            f.mul(&f, &policy),
            Err(Error::WindowOverflow { required: 8, cap: 6 })
        ));
        let truncating = ProductPolicy {
            cap: 6,
            rule: Dealias::TwoThirds,
        };
        let h = f.mul(&f, &truncating).unwrap();
        assert_eq!(h.nmax(), 6);
        assert!(h.l2_norm() < 1e-14);
    }

    #[test]
    fn power_nonlinearity_of_plane_wave() {
        let a = c(0.3, 0.4);
        let f = SpectralField::from_modes([(2, a)]);
        let g = f.power_nonlinearity(2, &ProductPolicy::default()).unwrap();
        assert_eq!(g.nmax(), 10);
        assert!((g.get(2) - a * a.norm_sqr().powi(2)).norm() < 1e-15);
        assert!((g.l2_norm() - g.get(2).norm()).abs() < 1e-15);
    }

    #[test]
    fn json_layout() {
        let f = SpectralField::from_modes([(1, c(0.5, -0.25)), (-2, c(1.0, 0.0))]);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"nmax":2,"coeffs":[[-2,1.0,0.0],[1,0.5,-0.25]]}"#);
        let back: SpectralField = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn json_rejects_out_of_window_and_unsorted() {
        let bad = r#"{"nmax":1,"coeffs":[[2,1.0,0.0]]}"#;
        assert!(serde_json::from_str::<SpectralField>(bad).is_err());
        let unsorted = r#"{"nmax":2,"coeffs":[[1,1.0,0.0],[0,1.0,0.0]]}"#;
        assert!(serde_json::from_str::<SpectralField>(unsorted).is_err());
    }
}
