use thiserror::Error;

/// Every fallible operation in the crate returns this error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "inadmissible parameters (omega={omega}, c={c}, gamma={gamma}): {region}"
    )]
    Inadmissible {
        omega: f64,
        c: f64,
        gamma: f64,
        region: String,
    },

    #[error("edge-decay guard violated: edge/peak ratio {ratio:.3e} exceeds {threshold:.1e}")]
    GuardViolation { ratio: f64, threshold: f64 },

    #[error("grid too short: {0}")]
    GridTooShort(String),

    #[error("Nehari projection undefined: {0}")]
    NotProjectable(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("blow-up detected at t={t}")]
    BlowUp { t: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Inadmissible { .. } | Error::Config(_) => 2,
            Error::GuardViolation { .. }
            | Error::GridTooShort(_)
            | Error::NotProjectable(_)
            | Error::NonConvergence { .. }
            | Error::BlowUp { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
