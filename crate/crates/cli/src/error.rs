use std::path::PathBuf;

use kgb_core::ErrorKind;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] kgb_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    /// A check ran but did not meet its budget.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Self::Core(e) => e.kind(),
            Self::CheckFailed(_) => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            ErrorKind::Validation => 2,
            ErrorKind::Numerical => 3,
        }
    }

    pub fn report(&self) -> serde_json::Value {
        let kind = match self.kind() {
            ErrorKind::Validation => "validation",
            ErrorKind::Numerical => "numerical",
        };
        let module = match self {
            Self::Core(e) => e.code(),
            Self::Io { .. } => "io",
            Self::Invalid(_) => "cli",
            Self::CheckFailed(_) => "check-invariants",
        };
        json!({
            "error": {
                "kind": kind,
                "module": module,
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}

macro_rules! core_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Core(e.into())
            }
        })*
    };
}

core_from!(
    kgb_core::SpectralError,
    kgb_core::ModelError,
    kgb_core::RegimeError,
    kgb_core::ClosedFormError,
    kgb_core::WaveError,
    kgb_core::EvolutionError,
    kgb_core::KdvError,
    kgb_core::ConfigError,
    kgb_core::CsvError
);

pub type CliResult<T> = Result<T, CliError>;
