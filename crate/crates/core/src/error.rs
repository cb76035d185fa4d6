use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the approximation library.
#[derive(Debug, Error)]
pub enum WqisaError {
    #[error("invalid knot vector: {0}")]
    InvalidKnotVector(String),

    #[error("basis index {index} out of range for {count} basis functions")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("point ({x}, {y}) lies outside the surface domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("knot {knot} is not strictly inside the domain [{a}, {b}]")]
    KnotOutsideDomain { knot: f64, a: f64, b: f64 },

    #[error("inserting knot {knot} would exceed multiplicity {max}")]
    MultiplicityOverflow { knot: f64, max: usize },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("neighbourhood size {k} is invalid for a cloud of {n} points")]
    InvalidNeighbourCount { k: usize, n: usize },

    #[error("invalid weight specification: {0}")]
    InvalidWeight(String),

    #[error("total weight is zero at ({u}, {v}); widen the window")]
    ZeroWeight { u: f64, v: f64 },

    #[error("total weight is zero for coefficient ({i}, {j}) at ({u}, {v}); widen the window")]
    ZeroWeightCoefficient { i: usize, j: usize, u: f64, v: f64 },

    #[error("cloud of {size} points is too small for {scheme}")]
    CloudTooSmall { size: usize, scheme: String },

    #[error("parameter search grid is empty")]
    EmptyGrid,

    #[error("every parameter in the search grid failed; last error: {0}")]
    AllParametersFailed(Box<WqisaError>),

    #[error("grid shapes differ: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("point set is empty")]
    EmptySet,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<WqisaError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = WqisaError> = std::result::Result<T, E>;
