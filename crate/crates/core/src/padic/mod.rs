//! Exact arithmetic in `Q_p` with tracked precision, norms, and balls.

mod geometry;
mod norm;
mod number;
mod prime;

pub use geometry::{ball_contains, distance, sphere_contains, Ball, Region, Sphere};
pub use norm::NormValue;
pub use number::{PAdicNumber, DEFAULT_PRECISION};
pub use prime::Prime;

pub(crate) use number::p_pow;
