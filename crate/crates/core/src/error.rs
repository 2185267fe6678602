use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown base station index {0}")]
    UnknownBs(usize),

    #[error("index {index} is not a base station of tier {tier}")]
    NotInTier { index: usize, tier: usize },

    #[error("quadrature did not converge (estimated error {estimated_error:.3e}, requested {tolerance:.3e})")]
    Quadrature {
        estimated_error: f64,
        tolerance: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::InvalidConfig(_)
                | Error::UnknownBs(_)
                | Error::NotInTier { .. }
        )
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
