#![allow(dead_code)]

use num_complex::Complex64;
use periodic_nls::spectral::SpectralField;
use rand::Rng;

/// Direct-summation convolution `Σ_{j + l = k} a_j b_l`.
pub fn convolve(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let na = a.nmax() as i64;
    let nb = b.nmax() as i64;
    let mut out = SpectralField::zeros((na + nb) as usize);
    for j in -na..=na {
        let x = a.get(j);
        if x == Complex64::default() {
            continue;
        }
        for l in -nb..=nb {
            let k = j + l;
            out.set(k, out.get(k) + x * b.get(l));
        }
    }
    out
}

/// Coefficients of `conj(u)`: `k -> conj(a_{-k})`.
pub fn conj_field(u: &SpectralField) -> SpectralField {
    let n = u.nmax() as i64;
    SpectralField::from_modes((-n..=n).map(|k| (k, u.get(-k).conj())))
}

/// `|u|^{2m} u` by repeated direct-summation convolution.
pub fn naive_power(u: &SpectralField, m: u32) -> SpectralField {
    let ubar = conj_field(u);
    let mut w = u.clone();
    for _ in 0..m {
        w = convolve(&convolve(&w, &ubar), u);
    }
    w
}

/// `Σ a_k e^{ikx}`
pub fn eval_point(u: &SpectralField, x: f64) -> Complex64 {
    u.iter()
        .map(|(k, a)| a * Complex64::from_polar(1.0, k as f64 * x))
        .sum()
}

pub fn random_field<R: Rng>(rng: &mut R, radius: i64, amplitude: f64) -> SpectralField {
    SpectralField::from_modes((-radius..=radius).map(|k| {
        (
            k,
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amplitude,
        )
    }))
}

pub fn max_abs_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).iter().map(|(_, z)| z.norm()).fold(0.0, f64::max)
}
