use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("resource guard exceeded: {0}")]
    Guard(String),

    #[error("recursion breakdown at step {step}: {detail}")]
    Breakdown { step: usize, detail: String },

    #[error("determinant is not positive (sign {sign}) at order {order}")]
    NonPositiveDeterminant { order: usize, sign: i8 },

    #[error("no root in bracket ({lo}, {hi})")]
    NoRoot { lo: f64, hi: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("contour construction failed: {0}")]
    Contour(String),

    #[error("point {0} is too close to a singularity")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
