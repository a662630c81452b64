//! Numerical workbench for the coupled improved-Boussinesq / Klein-Gordon
//! (KGB) system
//!
//! ```text
//! u_tt = alpha^2 u_xx + u_ttxx + (f1(u, v))_xx
//! v_tt = v_xx - v + f2(u, v)
//! ```
//!
//! with quadratic `f1`, `f2`, on a periodic grid.

// Range checks are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod config;
pub mod evolution;
pub mod io;
pub mod kdv;
pub mod model;
pub mod regimes;
pub mod spectral;
pub mod wave_solver;

pub use closed_form::ClosedFormError;
pub use config::ConfigError;
pub use evolution::EvolutionError;
pub use io::CsvError;
pub use kdv::KdvError;
pub use model::{ModelCoefficients, ModelError};
pub use regimes::RegimeError;
pub use spectral::{PeriodicGrid, RealField, Spectral, SpectralError};
pub use wave_solver::WaveError;

/// Whether a failure comes from bad input or from the numerics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Regime(#[from] RegimeError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Kdv(#[from] KdvError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Csv(#[from] CsvError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use ErrorKind::*;
        match self {
            Error::Wave(
                WaveError::Diverged { .. }
                | WaveError::SingularSymbol { .. }
                | WaveError::DegenerateStabilizer(_)
                | WaveError::RankDeficient,
            ) => Numerical,
            Error::Evolution(EvolutionError::NonFinite(_)) => Numerical,
            Error::Kdv(KdvError::Evolution(EvolutionError::NonFinite(_))) => Numerical,
            Error::Spectral(SpectralError::NonRealOutput(_)) => Numerical,
            _ => Validation,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::Spectral(_) => "spectral",
            Error::Model(_) => "model",
            Error::Regime(_) => "regimes",
            Error::ClosedForm(_) => "closed_form",
            Error::Wave(_) => "wave_solver",
            Error::Evolution(_) => "evolution",
            Error::Kdv(_) => "kdv",
            Error::Config(_) => "config",
            Error::Csv(_) => "csv",
        }
    }
}
