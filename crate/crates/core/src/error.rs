use thiserror::Error;

use crate::tomography::{InputState, ProjectorLabel};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} exceeds the three-qubit limit")]
    DimensionOverflow(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("invalid trace {0}")]
    BadTrace(f64),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("invalid projector: {0}")]
    NotProjector(String),
    #[error("invalid program angles theta={theta}, phi={phi}")]
    ProgramAngles { theta: f64, phi: f64 },
    #[error("unknown program label {0:?}")]
    UnknownProgram(String),
    #[error("missing record for input {0} / projector {1}")]
    MissingRecord(InputState, ProjectorLabel),
    #[error("duplicate record for input {0} / projector {1}")]
    DuplicateRecord(InputState, ProjectorLabel),
    #[error("record {index}: {message}")]
    InvalidRecord { index: usize, message: String },
    #[error("dataset has zero total counts")]
    EmptyDataset,
    #[error("list length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input list")]
    EmptyInput,
    #[error("zero trace")]
    ZeroTrace,
    #[error(
        "maximum-likelihood iteration did not converge after {iterations} iterations \
         (last change {last_change:.3e}): {reason}"
    )]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        reason: &'static str,
    },
    #[error("{0}")]
    Format(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

impl Error {
    /// Whether the error stems from malformed or inconsistent input data.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NonConvergence { .. })
    }
}
