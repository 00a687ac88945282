//! Fourier-coefficient fields on the torus `R / 2πZ`, their Sobolev norms,
//! grid transforms and the frequency/amplitude lift.

mod field;
mod scaling;
mod sum;
mod transform;

pub use field::{sobolev_norm, Dealias, ProductPolicy, SobolevIndex, SpectralField};
pub use scaling::{rescale_up, ScalingMap, Snapshot, Trajectory};
pub use sum::{compensated_sum, CompensatedSum};
pub use transform::{from_physical, to_physical, FftGrid};
pub(crate) use transform::next_pow2_above;
