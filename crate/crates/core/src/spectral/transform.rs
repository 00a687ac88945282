//! Discrete synthesis and analysis on the uniform grid `x_j = 2πj/G`.
//!
//! Spectral buffers use FFT ordering: the coefficient of frequency `n` sits at
//! index `n mod G`. Coefficients are normalized so that
//! `u(x_j) = Σ_n a_n e^{i n x_j}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::SpectralField;
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct FftGrid {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for FftGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftGrid").field("size", &self.size).finish()
    }
}

impl FftGrid {
    pub fn new(size: usize) -> Self {
        assert!(size > 0, "grid size must be positive");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            size,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Buffer index holding frequency `n`.
    pub fn index(&self, n: i64) -> usize {
        n.rem_euclid(self.size as i64) as usize
    }

    /// Signed frequency stored at buffer index `idx` (Nyquist maps to `+G/2`).
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx <= self.size / 2 {
            idx as i64
        } else {
            idx as i64 - self.size as i64
        }
    }

    /// Spectral buffer to physical samples, in place.
    pub fn synthesize(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.size);
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }

    /// Physical samples to normalized spectral buffer, in place.
    pub fn analyze(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.size);
        self.forward.process_with_scratch(buf, &mut self.scratch);
        let scale = 1.0 / self.size as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    /// Writes `field` into a zeroed spectral buffer.
    pub fn load(&self, field: &SpectralField, buf: &mut [Complex64]) -> Result<()> {
        if self.size <= 2 * field.nmax() {
            return Err(Error::Aliasing {
                gridsize: self.size,
                nmax: field.nmax(),
            });
        }
        buf.fill(Complex64::default());
        for (n, a) in field.iter() {
            buf[self.index(n)] = a;
        }
        Ok(())
    }

    /// Reads frequencies `|n| <= nmax` out of a spectral buffer.
    pub fn extract(&self, buf: &[Complex64], nmax: usize) -> Result<SpectralField> {
        if self.size <= 2 * nmax {
            return Err(Error::Aliasing {
                gridsize: self.size,
                nmax,
            });
        }
        let mut out = SpectralField::zeros(nmax);
        let n = nmax as i64;
        for k in -n..=n {
            out.set(k, buf[self.index(k)]);
        }
        Ok(out)
    }
}

/// Samples `field` at `x_j = 2πj/gridsize`.
pub fn to_physical(field: &SpectralField, gridsize: usize) -> Result<Vec<Complex64>> {
    if gridsize == 0 {
        return Err(Error::invalid("gridsize", "must be positive"));
    }
    let mut grid = FftGrid::new(gridsize);
    let mut buf = vec![Complex64::default(); gridsize];
    grid.load(field, &mut buf)?;
    grid.synthesize(&mut buf);
    Ok(buf)
}

/// Recovers coefficients `|n| <= nmax` from uniform samples.
pub fn from_physical(samples: &[Complex64], nmax: usize) -> Result<SpectralField> {
    if samples.len() <= 2 * nmax {
        return Err(Error::Aliasing {
            gridsize: samples.len(),
            nmax,
        });
    }
    let mut grid = FftGrid::new(samples.len());
    let mut buf = samples.to_vec();
    grid.analyze(&mut buf);
    grid.extract(&buf, nmax)
}

pub(crate) fn next_pow2_above(n: usize) -> usize {
    (n + 1).next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_field_is_constant_array() {
        let f = SpectralField::from_modes([(0, c(0.3, -0.7))]);
        let u = to_physical(&f, 8).unwrap();
        for z in u {
            assert!((z - c(0.3, -0.7)).norm() < 1e-15);
        }
    }

    #[test]
    fn unit_mode_at_quarter_points() {
        let f = SpectralField::from_modes([(1, c(1.0, 0.0))]);
        let u = to_physical(&f, 4).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (z, e) in u.iter().zip(expected) {
            assert!((z - e).norm() < 1e-15, "{z} vs {e}");
        }
    }

    #[test]
    fn undersized_grid_is_an_aliasing_error() {
        let f = SpectralField::from_modes([(3, c(1.0, 0.0))]);
        assert!(matches!(
            to_physical(&f, 6),
            Err(Error::Aliasing { gridsize: 6, nmax: 3 })
        ));
        assert!(to_physical(&f, 7).is_ok());
        assert!(from_physical(&[c(0.0, 0.0); 4], 2).is_err());
    }

    #[test]
    fn wavenumbers_are_signed() {
        let g = FftGrid::new(8);
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.index(-1), 7);
    }
}
