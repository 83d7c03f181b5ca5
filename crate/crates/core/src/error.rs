use std::fmt;

use thiserror::Error;

/// Pipeline stage an error originated from, used by [`crate::oracle::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Mapping,
    Potential,
    Spectrum,
    Wavefunction,
    Oracle,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Mapping => "mapping",
            Stage::Potential => "potential",
            Stage::Spectrum => "spectrum",
            Stage::Wavefunction => "wavefunction",
            Stage::Oracle => "oracle",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular point at u = {u}: {reason}")]
    Singular { u: f64, reason: String },
    #[error("grid too small: need at least {needed} points, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grids of the two operands differ")]
    GridMismatch,
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("divergent norm: {0}")]
    DivergentNorm(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Stage tag of a propagated pipeline error, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
