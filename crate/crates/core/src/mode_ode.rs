//! Fourier-side dynamics
//!
//! ```text
//! ∂_t a_k = i k² a_k + iω Σ_{k₁ - k₂ + … + k_{2m+1} = k} a_{k₁} conj(a_{k₂}) … a_{k_{2m+1}}
//! ```
//!
//! either on a full symmetric window or truncated to summation indices in
//! `{0, 1}`, where the unknowns are `a_{-m}, …, a_{m+1}`. In the truncated
//! system the equations for `a₀, a₁` close on themselves; the other modes are
//! driven by `G_k(a₀, a₁)`.
//!
//! Note: the truncated system is sometimes written with a linear term `i a_k`
//! for every `k`; this module uses `i k² a_k` throughout, consistent with the
//! untruncated equation (the two agree for `k ∈ {0, 1}`).

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::{NlsParams, TwoModeData};
use crate::error::{Error, Result};
use crate::io::{csv_bytes, fmt_f64};
use crate::spectral::{Dealias, ProductPolicy, SpectralField, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModeWindow {
    /// Indices restricted to `{0, 1}`; unknowns `k ∈ {-m, …, m+1}`.
    Truncated,
    /// Galerkin truncation to `|k| <= nmax`.
    Full { nmax: usize },
}

#[derive(Debug, Clone)]
pub struct ModeSystem {
    params: NlsParams,
    window: ModeWindow,
    state: SpectralField,
}

impl ModeSystem {
    /// Truncated system started from `a₀ = α`, `a₁ = β`.
    pub fn truncated(params: NlsParams, data: &TwoModeData) -> Self {
        let m = params.m() as usize;
        let mut state = SpectralField::zeros(m + 1);
        state.set(0, data.alpha());
        state.set(1, data.beta());
        Self {
            params,
            window: ModeWindow::Truncated,
            state,
        }
    }

    pub fn with_window(params: NlsParams, window: ModeWindow, state: SpectralField) -> Result<Self> {
        let nmax = match window {
            ModeWindow::Truncated => {
                let m = params.m() as i64;
                if state.get(-(m + 1)) != Complex64::default() {
                    return Err(Error::OutsideWindow { n: -(m + 1), nmax: m as usize });
                }
                m as usize + 1
            }
            ModeWindow::Full { nmax } => nmax,
        };
        let radius = state.support_radius(0.0);
        if radius > nmax {
            return Err(Error::OutsideWindow {
                n: radius as i64,
                nmax,
            });
        }
        let state = state.truncated(nmax);
        Ok(Self {
            params,
            window,
            state,
        })
    }

    pub fn params(&self) -> &NlsParams {
        &self.params
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    pub fn state(&self) -> &SpectralField {
        &self.state
    }

    fn nmax(&self) -> usize {
        self.state.nmax()
    }

    /// Frequencies carried by the system.
    pub fn frequencies(&self) -> Vec<i64> {
        match self.window {
            ModeWindow::Truncated => {
                let m = self.params.m() as i64;
                (-m..=m + 1).collect()
            }
            ModeWindow::Full { nmax } => (-(nmax as i64)..=nmax as i64).collect(),
        }
    }

    /// Time derivative of `state` (same window as the system).
    pub fn rhs(&self, state: &SpectralField) -> SpectralField {
        let nmax = self.nmax();
        let mut out = SpectralField::zeros(nmax);
        let coeffs: Vec<Complex64> = state.truncated(nmax).iter().map(|(_, a)| a).collect();
        let mut buf = vec![Complex64::default(); coeffs.len()];
        self.rhs_into(&coeffs, &mut buf);
        for (i, z) in buf.into_iter().enumerate() {
            out.set(i as i64 - nmax as i64, z);
        }
        out
    }

    // `state` and `out` are dense arrays indexed by `k + nmax`.
    fn rhs_into(&self, state: &[Complex64], out: &mut [Complex64]) {
        let nmax = self.nmax() as i64;
        let iw = Complex64::new(0.0, self.params.omega_value());
        match self.window {
            ModeWindow::Truncated => {
                out.fill(Complex64::default());
                let a = [state[nmax as usize], state[nmax as usize + 1]];
                let slots = 2 * self.params.m() + 1;
                for bits in 0u32..(1 << slots) {
                    let mut prod = Complex64::new(1.0, 0.0);
                    let mut k = 0i64;
                    for pos in 0..slots {
                        let bit = ((bits >> pos) & 1) as usize;
                        if pos % 2 == 1 {
                            prod *= a[bit].conj();
                            k -= bit as i64;
                        } else {
                            prod *= a[bit];
                            k += bit as i64;
                        }
                    }
                    out[(k + nmax) as usize] += prod;
                }
                for z in out.iter_mut() {
                    *z *= iw;
                }
            }
            ModeWindow::Full { nmax: w } => {
                let field = SpectralField::from_modes(
                    state.iter().enumerate().map(|(i, &a)| (i as i64 - nmax, a)),
                );
                let policy = ProductPolicy {
                    cap: usize::MAX,
                    rule: Dealias::None,
                };
                let nl = field
                    .power_nonlinearity(self.params.m(), &policy)
                    .expect("uncapped product cannot overflow");
                for (i, z) in out.iter_mut().enumerate() {
                    *z = iw * nl.get(i as i64 - w as i64);
                }
            }
        }
        for (i, z) in out.iter_mut().enumerate() {
            let k = i as i64 - nmax;
            *z += Complex64::new(0.0, (k * k) as f64) * state[i];
        }
    }

    /// Classical fixed-step RK4. Steps are shortened uniformly so that every
    /// requested sample time is hit exactly; an empty request stores `0` and
    /// `t_final`.
    pub fn integrate(&self, t_final: f64, dt: f64, sample_times: &[f64]) -> Result<Trajectory> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::invalid("t_final", format!("must be >= 0, got {t_final}")));
        }
        let mut samples: Vec<f64> = if sample_times.is_empty() {
            vec![0.0, t_final]
        } else {
            sample_times.to_vec()
        };
        if samples.iter().any(|&t| !(0.0..=t_final).contains(&t)) {
            return Err(Error::invalid("sample_times", "must lie in [0, t_final]"));
        }
        samples.sort_by(f64::total_cmp);

        let nmax = self.nmax() as i64;
        let len = self.state.nmax() * 2 + 1;
        let mut y: Vec<Complex64> = self.state.iter().map(|(_, a)| a).collect();
        let mut k1 = vec![Complex64::default(); len];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();

        let to_field = |y: &[Complex64]| {
            let mut f = SpectralField::zeros(nmax as usize);
            for (i, &a) in y.iter().enumerate() {
                f.set(i as i64 - nmax, a);
            }
            f
        };

        let mut traj = Trajectory::new();
        let mut t = 0.0;
        for &target in &samples {
            let span = target - t;
            if span > 0.0 {
                let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for step in 0..steps {
                    self.rhs_into(&y, &mut k1);
                    axpy(&y, &k1, 0.5 * h, &mut tmp);
                    self.rhs_into(&tmp, &mut k2);
                    axpy(&y, &k2, 0.5 * h, &mut tmp);
                    self.rhs_into(&tmp, &mut k3);
                    axpy(&y, &k3, h, &mut tmp);
                    self.rhs_into(&tmp, &mut k4);
                    for i in 0..len {
                        y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
                    }
                    if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                        return Err(Error::Divergence {
                            t: t + (step + 1) as f64 * h,
                        });
                    }
                }
                t = target;
            }
            traj.push(target, to_field(&y))?;
        }
        Ok(traj)
    }
}

fn axpy(y: &[Complex64], k: &[Complex64], h: f64, out: &mut [Complex64]) {
    for ((o, &a), &b) in out.iter_mut().zip(y).zip(k) {
        *o = a + b * h;
    }
}

/// `da_k/dt` at the system's current state.
pub fn fnls_rhs(system: &ModeSystem) -> SpectralField {
    system.rhs(system.state())
}

/// CSV with columns `t`, then `re_k`, `im_k` for each tracked mode.
pub fn write_modes_csv<W: Write>(traj: &Trajectory, modes: &[i64], mut out: W) -> Result<()> {
    let mut header = vec!["t".to_string()];
    for k in modes {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = traj.snapshots().iter().map(|s| {
        let mut row = vec![fmt_f64(s.t)];
        for &k in modes {
            let a = s.field.get(k);
            row.push(fmt_f64(a.re));
            row.push(fmt_f64(a.im));
        }
        row
    });
    let bytes = csv_bytes(&header_refs, rows)?;
    out.write_all(&bytes).map_err(|e| Error::io("<csv output>", e))
}
