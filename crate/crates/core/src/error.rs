use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("computed variance {0:e} is negative beyond rounding")]
    NegativeVariance(f64),

    #[error("no sign change bracketing the root was found: {0}")]
    NoBracket(String),

    #[error("quadrature did not reach tolerance: estimated error {error:e} on value {value:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("time step {step} exceeds the stability bound {bound}")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("amplitude modulus {modulus} at t = {time} exceeds the contractive bound")]
    Instability { time: f64, modulus: f64 },

    #[error("closed form produced a non-real expectation (imaginary part {imag:e})")]
    TranscriptionFault { imag: f64 },

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Whether the failure stems from user input rather than a numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::UnknownParameter(_) | Error::Config(_) | Error::StepTooLarge { .. }
        )
    }
}
