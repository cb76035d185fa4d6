//! Weighted quasi-interpolant spline approximation (wQISA) of noisy 2.5D
//! point clouds.
//!
//! A surface is a tensor-product B-spline whose coefficients are weighted
//! means of the cloud heights around the knot averages. No linear system is
//! solved, so every coefficient is local and bounded by the data it averages.
//!
//! The [`pipeline`] module wraps this in a data-driven loop that tunes the
//! weight on a validation set and refines the mesh where the local error is
//! large. [`mba`] provides the multilevel B-spline baseline and [`metrics`]
//! the error measures used to compare them.
//!
//! ```
//! use wqisa::{fit, FitConfig, synthetic};
//!
//! let cloud = synthetic::hemisphere_cloud(2_000, 7);
//! let outcome = fit(&cloud, &FitConfig::default()).unwrap();
//! assert!(outcome.report.iterations.len() <= 15);
//! let z = outcome.surface.evaluate(0.5, 0.5).unwrap();
//! assert!((z - 8.0 / 8.5).abs() < 0.05);
//! ```

pub mod cloud;
pub mod config;
pub mod error;
pub mod io;
pub mod mba;
pub mod metrics;
pub mod pipeline;
pub mod spatial;
pub mod spline;
pub mod synthetic;
pub mod weights;

#[cfg(feature = "cli")]
pub mod cli;

pub use cloud::{Point, PointCloud, Rect};
pub use error::{Result, WqisaError};
pub use mba::{fit_mba, MbaSurface};
pub use metrics::{hausdorff, punctual_errors, ErrorStats};
pub use pipeline::{cross_validate, fit, split, FitConfig, FitReport, SplitScheme};
pub use spatial::PlanarIndex;
pub use spline::{KnotVector, TensorSplineSpace, WqisaSurface};
pub use weights::{estimate_control_point, WeightKind, WeightSpec};
