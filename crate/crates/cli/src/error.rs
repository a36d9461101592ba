use dkp_aim::{AimError, ClosedFormError, ModelError, OracleError, PerturbationError, SeriesError};
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NUMERIC: i32 = 2;
    pub const GOLDEN_MISMATCH: i32 = 3;
    pub const SUPERCRITICAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Supercritical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => exit::USAGE,
            CliError::Numeric(_) => exit::NUMERIC,
            CliError::Supercritical(_) => exit::SUPERCRITICAL,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Supercritical { .. } => CliError::Supercritical(e.to_string()),
            ModelError::InvalidParams(_) | ModelError::Unsupported(_) => CliError::Usage(e.to_string()),
            ModelError::ClosedForm(ClosedFormError::InvalidParams(_)) => CliError::Usage(e.to_string()),
            ModelError::Aim(AimError::InvalidProblem(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ClosedFormError> for CliError {
    fn from(e: ClosedFormError) -> Self {
        match e {
            ClosedFormError::InvalidParams(_) | ClosedFormError::Domain(_) => CliError::Usage(e.to_string()),
            ClosedFormError::PochhammerPole { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AimError> for CliError {
    fn from(e: AimError) -> Self {
        match e {
            AimError::InvalidProblem(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PerturbationError> for CliError {
    fn from(e: PerturbationError) -> Self {
        match e {
            PerturbationError::Model(m) => m.into(),
            PerturbationError::Aim(a) => a.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::GridTooSmall(_) | OracleError::InvalidDomain(..) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
