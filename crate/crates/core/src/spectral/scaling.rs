use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use crate::error::{Error, Result};

/// Lift `U(t, x) -> N^{1/m} U(N^2 t, N x)` between unit-frequency and
/// frequency-`N` solutions of the degree `2m+1` equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingMap {
    n: u64,
    m: u32,
}

impl ScalingMap {
    pub fn new(n: u64, m: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N", "frequency dilation must be >= 1"));
        }
        if m == 0 {
            return Err(Error::invalid("m", "must be >= 1"));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn amplitude_factor(&self) -> f64 {
        (self.n as f64).powf(1.0 / self.m as f64)
    }

    pub fn time_factor(&self) -> f64 {
        (self.n as f64).powi(2)
    }

    /// Spatial part of the lift: `a_k -> N^{1/m} a_k` placed at frequency `N k`.
    pub fn lift_field(&self, field: &SpectralField) -> SpectralField {
        let n = self.n as i64;
        let amp = Complex64::from(self.amplitude_factor());
        let mut out = SpectralField::zeros(field.nmax() * self.n as usize);
        for (k, a) in field.iter() {
            if a != Complex64::default() {
                out.set(k * n, a * amp);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
}

/// `(time, field)` samples with nondecreasing times. No interpolation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trajectory {
    snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, field: SpectralField) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if t < last.t {
                return Err(Error::invalid(
                    "t",
                    format!("sample time {t} precedes {}", last.t),
                ));
            }
        }
        self.snapshots.push(Snapshot { t, field });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.t)
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// Field stored at `t` (matched to 1e-12 relative).
    pub fn at(&self, t: f64) -> Result<&SpectralField> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= tol)
            .map(|s| &s.field)
            .ok_or(Error::MissingSample { t })
    }
}

impl FromIterator<Snapshot> for Trajectory {
    fn from_iter<I: IntoIterator<Item = Snapshot>>(iter: I) -> Self {
        let mut snapshots: Vec<Snapshot> = iter.into_iter().collect();
        snapshots.sort_by(|a, b| a.t.total_cmp(&b.t));
        Self { snapshots }
    }
}

/// Output at time `t`, frequency `N k` equals `N^{1/m}` times the input at
/// time `N^2 t`, frequency `k`.
pub fn rescale_up(unit: &Trajectory, map: &ScalingMap) -> Trajectory {
    let tf = map.time_factor();
    unit.snapshots
        .iter()
        .map(|s| Snapshot {
            t: s.t / tf,
            field: map.lift_field(&s.field),
        })
        .collect()
}
