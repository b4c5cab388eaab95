pub mod asymptotics;
pub mod endpoint;
pub mod error;
pub mod gfunction;
pub mod model;
pub mod percolation;
pub mod quad;
pub mod quaddiff;
pub mod toeplitz;

pub use error::{Error, Result};
pub use model::{ModelParams, ScalingConstants};
