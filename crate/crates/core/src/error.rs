use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array spec: {0}")]
    InvalidSpec(String),

    #[error("step index {step} outside 1..={n}")]
    StepOutOfRange { step: usize, n: usize },

    #[error("{name} = {value} is outside {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("{operation} does not support bound kind {kind}")]
    UnsupportedTarget {
        operation: &'static str,
        kind: &'static str,
    },

    #[error("enumeration horizon {horizon} exceeds the oracle limit of {max}")]
    OracleTooLarge { horizon: usize, max: usize },

    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in CLI error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::StepOutOfRange { .. } => "step_out_of_range",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::UnsupportedTarget { .. } => "unsupported_target",
            Error::OracleTooLarge { .. } => "oracle_too_large",
            Error::TooFewSamples(_) => "too_few_samples",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
