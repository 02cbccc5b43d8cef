//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the numerical and geometric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("map is not in the supported component: {0}")]
    NotInComponent(String),
    #[error("point {0} is a branch value")]
    AtBranchPoint(f64),
    #[error("gauge map does not preserve [-1, 1]: {0}")]
    InvalidGauge(String),
    #[error("reconstruction failed: {0}")]
    ReconstructionFailed(String),
    #[error("kernel evaluation failed: {0}")]
    KernelError(String),
    #[error("eigen solver failed: {0}")]
    SolverError(String),
    #[error("excluded spectral parameter lambda = {0}")]
    ExcludedParameter(f64),
    #[error("vector lies on the singular locus of the stereographic chart")]
    OnSingularLocus,
    #[error("coinciding stereographic coordinates")]
    DegeneratePair,
    #[error("input does not satisfy the functional equation: {0}")]
    NotAnEigenpair(String),
    #[error("ambiguous component assignment: {0}")]
    AssignmentError(String),
    #[error("cone case, symmetry cannot be classified")]
    Unclassified,
    #[error("winding computation failed: {0}")]
    WindingError(String),
    #[error("structure degenerates at probe point: {0}")]
    StructureDegenerate(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid pants: {0}")]
    InvalidPants(String),
    #[error("counting identity violated: {0}")]
    CountingViolation(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}
