pub mod basin;
pub mod claims;
pub mod dynamics;
pub mod error;
pub mod padic;
pub mod roots;

pub use error::{Error, Result};
pub use padic::{Ball, NormValue, PAdicNumber, Prime, Region, Sphere, DEFAULT_PRECISION};
