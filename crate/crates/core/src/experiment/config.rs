use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_form::{NlsParams, Sign, DEFAULT_SIGMA_CAP};
use crate::error::{Error, Result};
use crate::solver::{SolverConfig, MAX_GRIDSIZE};
use crate::spectral::{Dealias, SobolevIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub gridsize: usize,
    pub dt: f64,
    pub dealias: Dealias,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gridsize: 32,
            dt: 0.02,
            dealias: Dealias::TwoThirds,
        }
    }
}

impl SolverSettings {
    pub fn config(&self, checkpoints: Vec<f64>) -> SolverConfig {
        SolverConfig {
            dealias: self.dealias,
            ..SolverConfig::new(self.gridsize, self.dt, checkpoints)
        }
    }

    /// Doubled grid and halved step.
    pub fn refined(&self) -> Self {
        Self {
            gridsize: 2 * self.gridsize,
            dt: 0.5 * self.dt,
            dealias: self.dealias,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub n_max: u64,
    pub gridsize_max: usize,
    /// Largest number of solver steps a single PDE run may take.
    pub step_budget: u64,
    pub sigma_max: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            n_max: 1 << 16,
            gridsize_max: MAX_GRIDSIZE,
            step_budget: 4_000_000,
            sigma_max: DEFAULT_SIGMA_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Approx,
    Ode,
    VerifyBound,
    Thm1,
    Thm2,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Approx => "approx",
            Self::Ode => "ode",
            Self::VerifyBound => "verify-bound",
            Self::Thm1 => "thm1",
            Self::Thm2 => "thm2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub rho: f64,
    pub delta: f64,
    pub s: SobolevIndex,
    #[serde(rename = "M")]
    pub large_m: Option<f64>,
    /// Amplitudes swept by `verify-bound`.
    pub sigma: Vec<f64>,
    /// Ratio `|α| / σ` of the two-mode data; `|β| = σ`.
    pub alpha_ratio: f64,
    pub horizon_factor: f64,
    pub rotation_margin: f64,
    pub samples: usize,
    pub negative_control_n: u64,
    pub caps: Caps,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::VerifyBound,
            rho: 1.0,
            delta: 0.1,
            s: SobolevIndex::new(-0.25).expect("finite"),
            large_m: None,
            sigma: vec![0.05],
            alpha_ratio: 0.5,
            horizon_factor: 0.1,
            rotation_margin: TAU,
            samples: 500,
            negative_control_n: 64,
            caps: Caps::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_nls")]
    pub nls: NlsParams,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

fn default_nls() -> NlsParams {
    NlsParams::cubic(Sign::Defocusing)
}

impl Default for Config {
    fn default() -> Self {
        Self {
            nls: default_nls(),
            solver: SolverSettings::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Parameters shared by both instability experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub rho: f64,
    pub delta: f64,
    pub s: SobolevIndex,
    #[serde(rename = "M")]
    pub large_m: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub nls: NlsParams,
    pub horizon_factor: f64,
    pub rotation_margin: f64,
}

impl ExperimentParams {
    /// `ρ' = ρ/4`
    pub fn rho_prime(&self) -> f64 {
        0.25 * self.rho
    }

    pub(crate) fn check_budgets(rho: f64, delta: f64) -> Result<()> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
        }
        if !(delta > 0.0 && delta <= rho / 10.0) {
            return Err(Error::invalid(
                "delta",
                format!("need 0 < delta <= rho/10, got delta = {delta}, rho = {rho}"),
            ));
        }
        Ok(())
    }
}
