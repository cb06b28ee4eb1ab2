use thiserror::Error;

use crate::geam::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dimension {found} is too small (need at least {min})")]
    InvalidDimension { found: usize, min: usize },

    #[error("Hermitian eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("SVD did not converge within {iterations} iterations")]
    SvdNoConvergence { iterations: usize },

    #[error("invalid operator basis: {0}")]
    InvalidBasis(String),

    #[error("partition sizes sum to {found} basis elements, expected d^2 - 1 = {expected}")]
    PartitionSize { expected: usize, found: usize },

    #[error("frame {frame} has size {size}; every frame needs at least 2 elements")]
    FrameTooSmall { frame: usize, size: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("design constant S = {s} outside (0, cap]; per-frame caps {caps:?}")]
    DesignConstantOutOfRange { s: f64, caps: Vec<f64> },

    #[error("operator P[{frame}][{element}] is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive {
        frame: usize,
        element: usize,
        min_eigenvalue: f64,
    },

    #[error("GEAM validation failed with {} violation(s): {}", .0.len(), summarize(.0))]
    Violations(Vec<Violation>),

    #[error("no feasible design constant: {0}")]
    Infeasible(String),

    #[error("GEAM is not a conical 2-design; {0} requires it")]
    NotConical(&'static str),

    #[error("invalid density matrix: min eigenvalue {min_eigenvalue:e}, trace {trace}")]
    InvalidDensity { min_eigenvalue: f64, trace: f64 },

    #[error("{what} = {value} out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("invalid rotation: {0}")]
    InvalidRotation(String),

    #[error("operator is not a rank-1 projector (deviation {deviation:e})")]
    NotRankOneProjector { deviation: f64 },

    #[error("degenerate denominator: Tr(Phi[P]) = {value:e}")]
    DegenerateDenominator { value: f64 },

    #[error("correlation matrix is not square: frame sizes A {a:?} vs B {b:?}")]
    LayoutMismatch { a: Vec<usize>, b: Vec<usize> },

    #[error("negative radicand {value:e} in the enhanced bound")]
    NegativeRadicand { value: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("malformed document: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
