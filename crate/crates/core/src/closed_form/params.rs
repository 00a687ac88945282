use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign `ω` of the nonlinearity in `-i u_t + u_xx = ω |u|^{p-1} u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    /// `ω = +1`
    Defocusing,
    /// `ω = -1`
    Focusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Sign::Defocusing),
            -1 => Ok(Sign::Focusing),
            _ => Err(Error::invalid("omega", format!("must be +1 or -1, got {v}"))),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Defocusing => 1,
            Sign::Focusing => -1,
        }
    }
}

/// Odd power `p = 2m + 1 >= 3` and sign `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct NlsParams {
    p: u32,
    omega: Sign,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: u32,
    omega: Sign,
}

impl TryFrom<RawParams> for NlsParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        NlsParams::new(r.p, r.omega)
    }
}

impl From<NlsParams> for RawParams {
    fn from(p: NlsParams) -> Self {
        RawParams {
            p: p.p,
            omega: p.omega,
        }
    }
}

impl NlsParams {
    pub fn new(p: u32, omega: Sign) -> Result<Self> {
        if p < 3 || p % 2 == 0 {
            return Err(Error::invalid("p", format!("must be an odd integer >= 3, got {p}")));
        }
        Ok(Self { p, omega })
    }

    pub fn cubic(omega: Sign) -> Self {
        Self { p: 3, omega }
    }

    pub fn quintic(omega: Sign) -> Self {
        Self { p: 5, omega }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        (self.p - 1) / 2
    }

    pub fn omega(&self) -> Sign {
        self.omega
    }

    pub fn omega_value(&self) -> f64 {
        self.omega.value()
    }
}

pub const DEFAULT_SIGMA_CAP: f64 = 0.25;

/// Two-mode datum `α + β e^{ix}` with `|α|, |β| <= σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeData {
    alpha: Complex64,
    beta: Complex64,
    sigma: f64,
}

impl TwoModeData {
    pub fn new(alpha: Complex64, beta: Complex64, sigma: f64) -> Result<Self> {
        Self::with_cap(alpha, beta, sigma, DEFAULT_SIGMA_CAP)
    }

    pub fn with_cap(alpha: Complex64, beta: Complex64, sigma: f64, cap: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        if sigma > cap {
            return Err(Error::invalid("sigma", format!("{sigma} exceeds the cap {cap}")));
        }
        // a few ulps of slack so that σ = max(|α|, |β|) is accepted
        let slack = sigma * (1.0 + 4.0 * f64::EPSILON);
        if alpha.norm() > slack || beta.norm() > slack {
            return Err(Error::invalid(
                "alpha/beta",
                format!("|alpha| = {}, |beta| = {} exceed sigma = {sigma}", alpha.norm(), beta.norm()),
            ));
        }
        Ok(Self { alpha, beta, sigma })
    }

    /// Uses `σ = max(|α|, |β|)`.
    pub fn tight(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::new(alpha, beta, alpha.norm().max(beta.norm()))
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}
