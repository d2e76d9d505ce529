//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by geometry evaluation, solvers and file parsing.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A query point lies outside the domain on which the initial data
    /// set can be evaluated (inside the excised inner region, or outside
    /// the interpolation box of a gridded data set).
    #[error("point ({x}, {y}, {z}) is outside the provider domain: {message}")]
    DomainError {
        x: f64,
        y: f64,
        z: f64,
        message: String,
    },

    /// Malformed binary or text input. `offset` is the byte offset at
    /// which parsing failed.
    #[error("parse error at byte {offset}: {message}")]
    ParseError { offset: usize, message: String },

    /// A surface degenerated during evaluation (non-positive induced
    /// metric determinant, vanishing radius, ...). Carries the flat node
    /// index at which the defect was detected.
    #[error("degenerate surface geometry at node {node}: {message}")]
    DegenerateSurface { node: usize, message: String },

    /// The linearized expansion operator could not be inverted.
    #[error("jacobian numerically singular (pivot/eigenvalue magnitude {0:.3e})")]
    SingularJacobian(f64),

    /// Newton iteration failed to reach the residual tolerance.
    #[error("newton iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NewtonDivergence { residual: f64, iterations: usize },

    /// The homotopy in the expansion weight could not make progress.
    #[error("continuation stalled at weight b = {b:.6}: step size underflow below {min_step:.1e}")]
    ContinuationStall { b: f64, min_step: f64 },

    /// An initial guess violated an admissibility precondition.
    #[error("inadmissible initial guess: {0}")]
    InadmissibleGuess(String),

    /// Incompatible discretizations (different grids, band limits, ...).
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An iterative eigenvalue computation failed to converge.
    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    /// Input arguments violate a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Underlying I/O failure while reading or writing artifact files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
