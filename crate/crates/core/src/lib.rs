pub mod asymptotics;
pub mod coefficients;
pub mod error;
pub mod examples;
pub mod model_space;
pub mod phase;
pub mod product;
pub mod quad;
pub mod surd;
pub use error::{Error, ErrorKind, Result};
pub use product::{Angle, BlaschkeProduct};
