//! Error type shared across the crate.

use thiserror::Error;

/// Convenience alias used by every fallible routine.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by grid construction, operators and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The lattice spacing leaves no cell inside the domain.
    #[error("empty grid: spacing {h} is too large for the domain")]
    EmptyGrid { h: f64 },
    /// An operation needs boundary samples that the domain does not carry.
    #[error("domain has no boundary samples")]
    MissingBoundary,
    /// The requested derivative order cannot be resolved on the grid.
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    /// A deformation fails the discrete separation test.
    #[error("separation check failed between {z1} and {z2}: ratio {ratio} < 1/{c}")]
    Separation { z1: String, z2: String, ratio: f64, c: f64 },
    /// A fixed-point or Neumann iteration stopped contracting.
    #[error("iteration diverged after {terms} terms; last ratios {ratios:?}")]
    Divergence { terms: usize, ratios: Vec<f64> },
    /// A Hölder norm exceeds the contraction threshold.
    #[error("Hölder norm {norm} exceeds threshold {threshold}")]
    NormTooLarge { norm: f64, threshold: f64 },
    /// The dilation loop could not push the coefficient under the threshold.
    #[error("dilation failed: norm {norm} after {halvings} halvings")]
    DilationFailed { norm: f64, halvings: usize },
    /// A discrete map has nonpositive Jacobian somewhere.
    #[error("not a diffeomorphism: Jacobian {jacobian} at node {node}")]
    NotDiffeomorphism { node: usize, jacobian: f64 },
    /// A map leaves the set where its coefficients are defined.
    #[error("map leaves the coefficient domain at node {node}")]
    DomainExit { node: usize },
    /// A linear system is singular or too badly conditioned.
    #[error("singular system: {0}")]
    Singular(String),
    /// A stage of an experiment failed.
    #[error("{stage}: {source}")]
    Stage { stage: String, source: Box<Error> },
    /// Reading or writing a file failed.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    /// JSON encoding or decoding failed.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// CSV encoding or decoding failed.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
