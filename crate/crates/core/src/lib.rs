//! Spectral simulation of the periodic power-type NLS
//! `-i u_t + u_xx = ω|u|^{p-1} u` on `T = R/2πZ`, the two-mode
//! approximate solutions, and the instability experiments built on them.

pub mod cli;
pub mod closed_form;
pub mod experiment;
pub mod io;
pub mod mode_ode;
pub mod solver;
pub mod spectral;

mod error;

pub use error::{Error, Result};
