//! Data-driven fitting: split the cloud, estimate coefficients on the
//! training set, tune the weight on the validation set, refine the mesh where
//! the local validation error is large, and stop at the last iteration before
//! the validation error rises. The test set measures generalisation.

use std::collections::BTreeSet;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{PointCloud, Rect};
use crate::error::{Result, WqisaError};
use crate::metrics::{self, ErrorStats};
use crate::spline::{TensorSplineSpace, WqisaSurface};
use crate::weights::{ControlPointEstimator, WeightSpec};

pub const DEFAULT_MAX_ITERATIONS: usize = 15;

/// Relative factor of the default refinement threshold: `epsilon` defaults to
/// this times the variance of the training heights.
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-2;

/// Minimum GMSE decrease for the loop to keep refining.
pub const STAGNATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SplitScheme {
    /// Disjoint random subsets with the given fractions of the cloud.
    Random {
        training: f64,
        validation: f64,
        test: f64,
    },
    /// `folds` rotating holdouts; each holdout is both validation and test set.
    KFold {
        folds: usize,
    },
    LeaveOneOut,
}

impl Default for SplitScheme {
    fn default() -> Self {
        SplitScheme::Random {
            training: 0.5,
            validation: 0.25,
            test: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub training: PointCloud,
    pub validation: PointCloud,
    pub test: PointCloud,
    pub seed: u64,
    pub scheme: SplitScheme,
    /// Fold number for cross-validation schemes.
    pub fold: Option<usize>,
}

/// Splits `cloud` according to `scheme`. Random splits yield one
/// [`DataSplit`]; fold schemes yield one per fold. Subsets keep input order.
pub fn split(cloud: &PointCloud, scheme: SplitScheme, seed: u64) -> Result<Vec<DataSplit>> {
    let n = cloud.len();
    let too_small = |what: String| WqisaError::CloudTooSmall { size: n, scheme: what };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scheme {
        SplitScheme::Random {
            training,
            validation,
            test,
        } => {
            let fractions = [training, validation, test];
            if fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) || training + validation + test > 1.0 + 1e-9 {
                return Err(WqisaError::Config(format!(
                    "split fractions {training}/{validation}/{test} must be positive and sum to at most 1"
                )));
            }
            if n < 4 {
                return Err(too_small("a random three-way split".into()));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let n_train = ((training * n as f64).round() as usize).clamp(1, n - 2);
            let rest = n - n_train;
            let n_val = ((validation * n as f64).round() as usize).clamp(1, rest - 1);
            let n_test = if (training + validation + test - 1.0).abs() < 1e-9 {
                rest - n_val
            } else {
                ((test * n as f64).round() as usize).clamp(1, rest - n_val)
            };
            let pick = |range: std::ops::Range<usize>| {
                let mut idx = order[range].to_vec();
                idx.sort_unstable();
                cloud.select(&idx)
            };
            Ok(vec![DataSplit {
                training: pick(0..n_train),
                validation: pick(n_train..n_train + n_val),
                test: pick(n_train + n_val..n_train + n_val + n_test),
                seed,
                scheme,
                fold: None,
            }])
        }
        SplitScheme::KFold { .. } | SplitScheme::LeaveOneOut => {
            let mut order: Vec<usize> = (0..n).collect();
            let k = match scheme {
                SplitScheme::KFold { folds } => {
                    order.shuffle(&mut rng);
                    folds
                }
                _ => n,
            };
            if k < 2 || n < k {
                return Err(too_small(format!("{k}-fold cross-validation")));
            }
            Ok((0..k)
                .map(|f| {
                    let (lo, hi) = (f * n / k, (f + 1) * n / k);
                    let mut holdout = order[lo..hi].to_vec();
                    let mut train: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
                    holdout.sort_unstable();
                    train.sort_unstable();
                    let holdout = cloud.select(&holdout);
                    DataSplit {
                        training: cloud.select(&train),
                        validation: holdout.clone(),
                        test: holdout,
                        seed,
                        scheme,
                        fold: Some(f),
                    }
                })
                .collect())
        }
    }
}

/// Parameters of one fitting run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub degree: (usize, usize),
    /// Candidate weights; the tuner picks the one with the lowest GMSE.
    pub weight_grid: Vec<WeightSpec>,
    /// LMSE threshold above which an element is split. `None` selects the
    /// scale-aware default.
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
    pub scheme: SplitScheme,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            degree: (2, 2),
            weight_grid: (1..=10).map(WeightSpec::knn).collect(),
            epsilon: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            scheme: SplitScheme::default(),
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(WqisaError::Config("max_iterations must be at least 1".into()));
        }
        if self.weight_grid.is_empty() {
            return Err(WqisaError::EmptyGrid);
        }
        if let Some(eps) = self.epsilon {
            if eps.is_nan() || eps < 0.0 {
                return Err(WqisaError::Config("epsilon must be nonnegative".into()));
            }
        }
        for spec in &self.weight_grid {
            spec.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GmseIncreased,
    MaxIterations,
    /// No element exceeded the refinement threshold.
    ThresholdMet,
    Stagnated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Nonempty elements along x and y.
    pub elements: (usize, usize),
    pub coefficients: (usize, usize),
    pub weight: WeightSpec,
    pub gmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: Vec<IterationRecord>,
    /// 1-based iteration whose surface is returned.
    pub best_iteration: usize,
    pub stop_reason: StopReason,
    pub epsilon: f64,
    pub training_size: usize,
    pub validation_size: usize,
    pub test_size: usize,
    pub test_mse: f64,
    pub test_stats: ErrorStats,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl FitReport {
    pub fn best(&self) -> &IterationRecord {
        &self.iterations[self.best_iteration - 1]
    }
}

#[derive(Debug, Clone)]
pub struct TunedSurface {
    pub weight: WeightSpec,
    pub surface: WqisaSurface,
    pub gmse: f64,
    /// Position of `weight` in the grid.
    pub grid_index: usize,
}

/// Fits one surface per grid entry on `training` and keeps the one with the
/// lowest validation GMSE; ties keep the earlier entry. Entries that fail to
/// estimate (e.g. empty windows) are skipped.
pub fn tune_parameters(
    training: &PointCloud,
    validation: &PointCloud,
    space: &TensorSplineSpace,
    grid: &[WeightSpec],
) -> Result<TunedSurface> {
    tune_with(&ControlPointEstimator::new(training)?, validation, space, grid)
}

fn tune_with(
    estimator: &ControlPointEstimator<'_>,
    validation: &PointCloud,
    space: &TensorSplineSpace,
    grid: &[WeightSpec],
) -> Result<TunedSurface> {
    if grid.is_empty() {
        return Err(WqisaError::EmptyGrid);
    }
    let mut best: Option<TunedSurface> = None;
    let mut last_err = None;
    for (grid_index, spec) in grid.iter().enumerate() {
        let attempt = estimator
            .fit(space, spec)
            .and_then(|surface| metrics::mse(&surface, validation).map(|g| (surface, g)));
        match attempt {
            Ok((surface, gmse)) if gmse.is_finite() => {
                if best.as_ref().is_none_or(|b| gmse < b.gmse) {
                    best = Some(TunedSurface {
                        weight: *spec,
                        surface,
                        gmse,
                        grid_index,
                    });
                }
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| WqisaError::AllParametersFailed(Box::new(last_err.unwrap_or(WqisaError::EmptyGrid))))
}

/// Splits every element whose LMSE exceeds `epsilon` by inserting the
/// midpoints of its x and y spans. Shared spans are split once.
pub fn refine_mesh(space: &TensorSplineSpace, errors: &metrics::ElementErrorMap, epsilon: f64) -> TensorSplineSpace {
    let (ex_count, ey_count) = space.element_counts();
    debug_assert_eq!(errors.shape, (ex_count, ey_count));
    let mut flagged_x = BTreeSet::new();
    let mut flagged_y = BTreeSet::new();
    for ex in 0..ex_count {
        for ey in 0..ey_count {
            if errors.get(ex, ey) > epsilon {
                flagged_x.insert(ex);
                flagged_y.insert(ey);
            }
        }
    }
    TensorSplineSpace::new(
        split_spans(&space.knots_x, &flagged_x),
        split_spans(&space.knots_y, &flagged_y),
    )
}

fn split_spans(kv: &crate::spline::KnotVector, flagged: &BTreeSet<usize>) -> crate::spline::KnotVector {
    let elements = kv.elements();
    let mut out = kv.clone();
    for &e in flagged {
        let (_, lo, hi) = elements[e];
        let mid = 0.5 * (lo + hi);
        if lo < mid && mid < hi {
            out = out.insert_knot(mid).expect("midpoint of a nonempty span is insertable");
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub surface: WqisaSurface,
    pub report: FitReport,
}

/// Runs the full loop on `cloud`. Fold schemes use their first fold; see
/// [`cross_validate`] for all folds.
pub fn fit(cloud: &PointCloud, config: &FitConfig) -> Result<FitOutcome> {
    config.validate()?;
    let domain = cloud.bounding_box()?.non_degenerate();
    let splits = split(cloud, config.scheme, config.seed)?;
    fit_split(&splits[0], domain, config)
}

/// Runs the refinement loop on a prepared split over `domain`.
pub fn fit_split(split: &DataSplit, domain: Rect, config: &FitConfig) -> Result<FitOutcome> {
    config.validate()?;
    #[cfg(not(target_arch = "wasm32"))]
    let started = std::time::Instant::now();
    let training = &split.training;
    let validation = &split.validation;
    let epsilon = config.epsilon.unwrap_or(DEFAULT_EPSILON_FACTOR * training.z_variance());
    let estimator = ControlPointEstimator::new(training)?;
    let at = |iteration: usize| {
        move |e: WqisaError| WqisaError::Iteration {
            iteration,
            source: Box::new(e),
        }
    };

    let mut space = TensorSplineSpace::single_element(config.degree, domain)?;
    let tuned = tune_with(&estimator, validation, &space, &config.weight_grid).map_err(at(1))?;
    let record = |iteration: usize, space: &TensorSplineSpace, t: &TunedSurface| IterationRecord {
        iteration,
        elements: space.element_counts(),
        coefficients: space.shape(),
        weight: t.weight,
        gmse: t.gmse,
    };
    let mut iterations = vec![record(1, &space, &tuned)];
    let mut best = tuned;
    let mut best_iteration = 1;

    let stop_reason = loop {
        if iterations.len() >= config.max_iterations {
            break StopReason::MaxIterations;
        }
        let iteration = iterations.len() + 1;
        let map = metrics::lmse(&best.surface, validation, &space).map_err(at(iteration))?;
        let refined = refine_mesh(&space, &map, epsilon);
        if refined == space {
            break StopReason::ThresholdMet;
        }
        space = refined;
        let tuned = tune_with(&estimator, validation, &space, &config.weight_grid).map_err(at(iteration))?;
        iterations.push(record(iteration, &space, &tuned));
        if tuned.gmse > best.gmse {
            break StopReason::GmseIncreased;
        }
        let improvement = best.gmse - tuned.gmse;
        best = tuned;
        best_iteration = iteration;
        if improvement < STAGNATION_TOLERANCE {
            break StopReason::Stagnated;
        }
    };

    let test_stats = metrics::punctual_errors(&best.surface, &split.test)?;
    let report = FitReport {
        iterations,
        best_iteration,
        stop_reason,
        epsilon,
        training_size: training.len(),
        validation_size: validation.len(),
        test_size: split.test.len(),
        test_mse: test_stats.mse,
        test_stats,
        #[cfg(not(target_arch = "wasm32"))]
        wall_time: started.elapsed(),
        #[cfg(target_arch = "wasm32")]
        wall_time: Duration::ZERO,
    };
    Ok(FitOutcome {
        surface: best.surface,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// Statistics over the holdout residuals of every fold, pooled.
    pub pooled: ErrorStats,
    pub folds: Vec<FitReport>,
    /// Holdout residuals in fold order.
    pub residuals: Vec<f64>,
}

/// K-fold cross-validation (leave-one-out when `folds` equals the cloud size).
pub fn cross_validate(cloud: &PointCloud, config: &FitConfig, folds: usize) -> Result<CrossValidation> {
    config.validate()?;
    let scheme = if folds == cloud.len() {
        SplitScheme::LeaveOneOut
    } else {
        SplitScheme::KFold { folds }
    };
    let domain = cloud.bounding_box()?.non_degenerate();
    let splits = split(cloud, scheme, config.seed)?;
    let run = |s: &DataSplit| -> Result<(FitReport, Vec<f64>)> {
        let outcome = fit_split(s, domain, config)?;
        let r = metrics::residuals(&outcome.surface, &s.test)?;
        Ok((outcome.report, r))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(FitReport, Vec<f64>)>> = {
        use rayon::prelude::*;
        splits.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(FitReport, Vec<f64>)>> = splits.iter().map(run).collect();

    let mut reports = Vec::with_capacity(results.len());
    let mut residuals = Vec::new();
    for r in results {
        let (report, res) = r?;
        reports.push(report);
        residuals.extend(res);
    }
    Ok(CrossValidation {
        pooled: ErrorStats::from_residuals(&residuals)?,
        folds: reports,
        residuals,
    })
}
