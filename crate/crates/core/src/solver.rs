//! Strang split-step Fourier solver for `-i u_t + u_xx = ω|u|^{p-1} u` on the
//! torus.
//!
//! Both substeps are exact: the linear flow multiplies `a_k` by `e^{i k² h}`
//! and the nonlinear flow is `u -> u e^{iω|u|^{p-1} h}` pointwise. With these
//! signs the plane wave `α e^{i(N² + ω|α|^{p-1})t + iNx}` is reproduced to
//! rounding, which `evolve` checks before every run.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::{plane_wave, NlsParams, Sign};
use crate::error::{Error, Result};
use crate::spectral::{
    compensated_sum, next_pow2_above, Dealias, FftGrid, ProductPolicy, SobolevIndex,
    SpectralField, Trajectory,
};

pub const MAX_GRIDSIZE: usize = 1 << 19;
pub const DEFAULT_MASS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// Second-order symmetric splitting.
    #[default]
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gridsize: usize,
    pub dt: f64,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub splitting: Splitting,
    /// Relative mass drift that aborts the run.
    #[serde(default = "default_mass_tolerance")]
    pub mass_tolerance: f64,
}

fn default_mass_tolerance() -> f64 {
    DEFAULT_MASS_TOLERANCE
}

impl SolverConfig {
    pub fn new(gridsize: usize, dt: f64, checkpoints: Vec<f64>) -> Self {
        Self {
            gridsize,
            dt,
            dealias: Dealias::TwoThirds,
            checkpoints,
            splitting: Splitting::Strang,
            mass_tolerance: DEFAULT_MASS_TOLERANCE,
        }
    }

    /// `count + 1` equally spaced checkpoints on `[0, t_final]`.
    pub fn uniform(gridsize: usize, dt: f64, t_final: f64, count: usize) -> Self {
        let count = count.max(1);
        let checkpoints = (0..=count)
            .map(|i| t_final * i as f64 / count as f64)
            .collect();
        Self::new(gridsize, dt, checkpoints)
    }

    pub fn validate(&self, initial: &SpectralField) -> Result<()> {
        if !self.gridsize.is_power_of_two() || self.gridsize < 8 {
            return Err(Error::invalid(
                "gridsize",
                format!("must be a power of two >= 8, got {}", self.gridsize),
            ));
        }
        if self.gridsize > MAX_GRIDSIZE {
            return Err(Error::invalid(
                "gridsize",
                format!("{} exceeds the cap {MAX_GRIDSIZE}", self.gridsize),
            ));
        }
        let radius = initial.support_radius(0.0);
        if self.gridsize < 8 * radius {
            return Err(Error::invalid(
                "gridsize",
                format!("{} < 8 x initial band limit {radius}", self.gridsize),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.checkpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("checkpoints", "must be finite and >= 0"));
        }
        if self.checkpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("checkpoints", "must be nondecreasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedDiagnostics {
    /// `Σ |a_k|^2 = (1/2π) ∫ |u|^2`
    pub mass: f64,
    /// `(1/2π) ∫ ½|u_x|^2 + ω/(p+1) |u|^{p+1}`
    pub hamiltonian: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub mass: f64,
    pub hamiltonian: f64,
    pub h1norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evolution {
    pub trajectory: Trajectory,
    pub diagnostics: Vec<DiagnosticsSample>,
    /// Largest `|M(t) - M(0)| / M(0)` over checkpoints.
    pub mass_drift: f64,
    /// Largest `|H(t) - H(0)| / |H(0)|` over checkpoints.
    pub hamiltonian_drift: f64,
    pub config: SolverConfig,
}

impl Evolution {
    pub fn duration(&self) -> f64 {
        self.trajectory.last().map_or(0.0, |s| s.t)
    }
}

pub struct SplitStepSolver {
    params: NlsParams,
    grid: FftGrid,
    keep: Vec<bool>,
    wavenumber_sq: Vec<f64>,
    window: usize,
    buf: Vec<Complex64>,
    half_phase: (f64, Vec<Complex64>),
    potential_grid: Option<FftGrid>,
}

impl SplitStepSolver {
    pub fn new(params: NlsParams, gridsize: usize, dealias: Dealias) -> Result<Self> {
        if !gridsize.is_power_of_two() || gridsize < 8 || gridsize > MAX_GRIDSIZE {
            return Err(Error::invalid(
                "gridsize",
                format!("must be a power of two in [8, {MAX_GRIDSIZE}], got {gridsize}"),
            ));
        }
        let grid = FftGrid::new(gridsize);
        let window = match dealias {
            Dealias::TwoThirds => gridsize / 3,
            Dealias::None => gridsize / 2 - 1,
        };
        let keep = (0..gridsize)
            .map(|i| grid.wavenumber(i).unsigned_abs() as usize <= window)
            .collect();
        let wavenumber_sq = (0..gridsize)
            .map(|i| (grid.wavenumber(i) as f64).powi(2))
            .collect();
        Ok(Self {
            params,
            grid,
            keep,
            wavenumber_sq,
            window,
            buf: vec![Complex64::default(); gridsize],
            half_phase: (f64::NAN, Vec::new()),
            potential_grid: None,
        })
    }

    pub fn params(&self) -> &NlsParams {
        &self.params
    }

    pub fn gridsize(&self) -> usize {
        self.grid.size()
    }

    /// Largest retained `|k|`.
    pub fn window_nmax(&self) -> usize {
        self.window
    }

    /// Spectral state (FFT order) holding `field`.
    pub fn load(&self, field: &SpectralField) -> Result<Vec<Complex64>> {
        let radius = field.support_radius(0.0);
        if radius > self.window {
            return Err(Error::OutsideWindow {
                n: radius as i64,
                nmax: self.window,
            });
        }
        let mut state = vec![Complex64::default(); self.gridsize()];
        self.grid.load(&field.truncated(radius), &mut state)?;
        Ok(state)
    }

    pub fn field(&self, state: &[Complex64]) -> SpectralField {
        self.grid
            .extract(state, self.window)
            .expect("window is below the Nyquist frequency")
    }

    fn refresh_phase(&mut self, h: f64) {
        if self.half_phase.0 != h {
            let phases = self
                .wavenumber_sq
                .iter()
                .map(|&k2| Complex64::from_polar(1.0, 0.5 * k2 * h))
                .collect();
            self.half_phase = (h, phases);
        }
    }

    /// One Strang step of signed size `h`.
    pub fn step(&mut self, state: &mut [Complex64], h: f64) {
        self.refresh_phase(h);
        let phases = &self.half_phase.1;
        for (z, ph) in state.iter_mut().zip(phases) {
            *z *= ph;
        }
        self.buf.copy_from_slice(state);
        self.grid.synthesize(&mut self.buf);
        let wh = self.params.omega_value() * h;
        let m = self.params.m() as i32;
        for u in self.buf.iter_mut() {
            let theta = wh * u.norm_sqr().powi(m);
            *u *= Complex64::from_polar(1.0, theta);
        }
        self.grid.analyze(&mut self.buf);
        for ((z, &b), (&keep, ph)) in state
            .iter_mut()
            .zip(&self.buf)
            .zip(self.keep.iter().zip(phases))
        {
            *z = if keep { b * ph } else { Complex64::default() };
        }
    }

    /// Advances by signed `duration` in `ceil(|duration| / dt)` equal steps.
    /// Returns the time offset of the first non-finite state, if any.
    pub fn advance(&mut self, state: &mut [Complex64], duration: f64, dt: f64) -> Option<f64> {
        if duration == 0.0 {
            return None;
        }
        let steps = (duration.abs() / dt - 1e-9).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        for i in 0..steps {
            self.step(state, h);
            if (i % 64 == 63 || i + 1 == steps)
                && state.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()))
            {
                return Some((i + 1) as f64 * h);
            }
        }
        None
    }

    /// `i k² a_k + P[iω |u|^{p-1} u]_k` with the grid's pointwise product
    /// and dealiasing projection `P`: the vector field the splitting
    /// discretizes.
    pub fn generator(&mut self, field: &SpectralField) -> Result<SpectralField> {
        let state = self.load(field)?;
        self.buf.copy_from_slice(&state);
        self.grid.synthesize(&mut self.buf);
        let iw = Complex64::new(0.0, self.params.omega_value());
        let m = self.params.m() as i32;
        for u in self.buf.iter_mut() {
            *u = iw * *u * u.norm_sqr().powi(m);
        }
        self.grid.analyze(&mut self.buf);
        let mut out = vec![Complex64::default(); self.gridsize()];
        for i in 0..self.gridsize() {
            if self.keep[i] {
                out[i] = self.buf[i] + Complex64::new(0.0, self.wavenumber_sq[i]) * state[i];
            }
        }
        Ok(self.field(&out))
    }

    pub fn diagnostics(&mut self, state: &[Complex64]) -> ConservedDiagnostics {
        let mass = compensated_sum(state.iter().map(|z| z.norm_sqr()));
        let kinetic = 0.5
            * compensated_sum(
                state
                    .iter()
                    .zip(&self.wavenumber_sq)
                    .map(|(z, k2)| k2 * z.norm_sqr()),
            );
        // mean of |u|^{p+1} is exact on a grid finer than (p+1) times the band
        let p = self.params.p() as usize;
        let size = next_pow2_above((p + 1) * self.window).max(self.gridsize());
        let pgrid = match &mut self.potential_grid {
            Some(g) if g.size() == size => g,
            slot => slot.insert(FftGrid::new(size)),
        };
        let field = self
            .grid
            .extract(state, self.window)
            .expect("window is below the Nyquist frequency");
        let mut samples = vec![Complex64::default(); size];
        pgrid
            .load(&field, &mut samples)
            .expect("potential grid exceeds twice the window");
        pgrid.synthesize(&mut samples);
        let potential = compensated_sum(samples.iter().map(|u| u.norm().powi(p as i32 + 1)))
            / size as f64;
        ConservedDiagnostics {
            mass,
            hamiltonian: kinetic + self.params.omega_value() / (p as f64 + 1.0) * potential,
        }
    }

    /// Runs one step on a plane wave and compares against the exact solution.
    pub fn check_convention(&mut self, dt: f64) -> Result<()> {
        let alpha = Complex64::new(0.1, 0.05);
        let n = 1;
        let start = plane_wave(&self.params, alpha, n, 0.0);
        let mut state = self.load(&start)?;
        self.step(&mut state, dt);
        let mismatch = self
            .field(&state)
            .sub(&plane_wave(&self.params, alpha, n, dt))
            .l2_norm();
        if mismatch > 1e-12 {
            return Err(Error::Convention { mismatch });
        }
        Ok(())
    }
}

/// Evolves `initial` through every checkpoint of `config`.
pub fn evolve(initial: &SpectralField, params: &NlsParams, config: &SolverConfig) -> Result<Evolution> {
    config.validate(initial)?;
    let mut solver = SplitStepSolver::new(*params, config.gridsize, config.dealias)?;
    solver.check_convention(config.dt)?;
    let mut state = solver.load(initial)?;

    let d0 = solver.diagnostics(&state);
    let mut trajectory = Trajectory::new();
    let mut diagnostics = Vec::with_capacity(config.checkpoints.len());
    let mut mass_drift: f64 = 0.0;
    let mut hamiltonian_drift: f64 = 0.0;
    let sign_watch = params.omega() == Sign::Focusing && params.p() >= 5;

    let mut t = 0.0;
    for &target in &config.checkpoints {
        if let Some(offset) = solver.advance(&mut state, target - t, config.dt) {
            return Err(Error::Blowup { t: t + offset });
        }
        t = target;
        let d = solver.diagnostics(&state);
        let field = solver.field(&state);
        if d0.mass > 0.0 {
            let drift = (d.mass - d0.mass).abs() / d0.mass;
            if drift > config.mass_tolerance {
                return Err(Error::AccuracyFailure {
                    t,
                    drift,
                    limit: config.mass_tolerance,
                });
            }
            mass_drift = mass_drift.max(drift);
        }
        if d0.hamiltonian != 0.0 {
            hamiltonian_drift =
                hamiltonian_drift.max((d.hamiltonian - d0.hamiltonian).abs() / d0.hamiltonian.abs());
            if sign_watch && d.hamiltonian * d0.hamiltonian < 0.0 {
                return Err(Error::HamiltonianAnomaly {
                    t,
                    initial: d0.hamiltonian,
                    current: d.hamiltonian,
                });
            }
        }
        diagnostics.push(DiagnosticsSample {
            t,
            mass: d.mass,
            hamiltonian: d.hamiltonian,
            h1norm: field.sobolev_norm(SobolevIndex::H1),
        });
        trajectory.push(t, field)?;
    }

    Ok(Evolution {
        trajectory,
        diagnostics,
        mass_drift,
        hamiltonian_drift,
        config: config.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualEstimate {
    /// Largest `‖-i u_t + u_xx - ω|u|^{p-1}u‖_{L²}` over interior samples.
    pub max: f64,
    /// Whether the sample spacing resolves the fastest rotation.
    pub reliable: bool,
    pub max_spacing: f64,
    /// Spacing that would be considered reliable.
    pub suggested_dt: f64,
}

/// Substitutes a sampled trajectory into the equation, using a three-point
/// difference for `u_t`.
pub fn residual(traj: &Trajectory, params: &NlsParams) -> Result<ResidualEstimate> {
    let snaps = traj.snapshots();
    if snaps.len() < 3 {
        return Err(Error::invalid("trajectory", "need at least three samples"));
    }
    let policy = ProductPolicy {
        cap: usize::MAX,
        rule: Dealias::None,
    };
    let w = params.omega_value();
    let i = Complex64::i();
    let mut max: f64 = 0.0;
    let mut max_spacing: f64 = 0.0;
    let mut fastest: f64 = 0.0;
    for win in snaps.windows(3) {
        let (prev, cur, next) = (&win[0], &win[1], &win[2]);
        let (hm, hp) = (cur.t - prev.t, next.t - cur.t);
        if hm <= 0.0 || hp <= 0.0 {
            return Err(Error::invalid("trajectory", "sample times must be strictly increasing"));
        }
        max_spacing = max_spacing.max(hm).max(hp);
        let radius = cur.field.support_radius(0.0);
        let u = cur.field.truncated(radius);
        let sup_bound: f64 = u.iter().map(|(_, a)| a.norm()).sum();
        fastest = fastest.max((radius * radius) as f64 + sup_bound.powi(params.p() as i32 - 1));

        let denom = hm * hp * (hm + hp);
        let u_t = next
            .field
            .scaled(Complex64::from(hm * hm / denom))
            .sub(&prev.field.scaled(Complex64::from(hp * hp / denom)))
            .add(&cur.field.scaled(Complex64::from((hp * hp - hm * hm) / denom)));
        let nl = u.power_nonlinearity(params.m(), &policy)?;
        let nmax = u_t.nmax().max(nl.nmax());
        let r = SpectralField::from_modes((-(nmax as i64)..=nmax as i64).map(|k| {
            let val = -i * u_t.get(k) - (k * k) as f64 * cur.field.get(k) - w * nl.get(k);
            (k, val)
        }));
        max = max.max(r.l2_norm());
    }
    let suggested_dt = if fastest > 0.0 { 0.1 / fastest } else { f64::INFINITY };
    Ok(ResidualEstimate {
        max,
        reliable: max_spacing <= suggested_dt,
        max_spacing,
        suggested_dt,
    })
}
