//! Weight functions and the weighted control point estimator.
//!
//! The estimator at a parametric location `(u, v)` is the weighted mean
//! `sum z w(x, y, u, v) / sum w(x, y, u, v)` over the cloud. Every sum runs in
//! ascending point order so results do not depend on how neighbours were found.

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};
use crate::spatial::{squared_distance, PlanarIndex};
use crate::spline::{TensorSplineSpace, WqisaSurface};

/// Default Tukey fence multiplier for the quartile outlier filter.
pub const DEFAULT_FENCE: f64 = 1.5;

/// Relative coincidence tolerance for IDW weights, scaled by the cloud's
/// bounding-box diagonal.
pub const DEFAULT_RELATIVE_COINCIDENCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// Unit weight inside a disc of the given radius.
    Indicator { radius: f64 },
    /// `exp(-d / (2 sigma^2))`, or `exp(-d^2 / (2 sigma^2))` with `squared_norm`.
    Gaussian { sigma: f64, squared_norm: bool },
    /// Weight `1/k` on the `k` nearest points.
    Knn { k: usize },
    /// Reciprocal distance over the whole cloud.
    Idw,
    /// Reciprocal distance restricted to the `k` nearest points.
    TruncatedIdw { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    /// Distance below which a point counts as coincident with the query
    /// (IDW kinds only). `None` uses the scaled default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coincidence_tolerance: Option<f64>,
    /// Tukey fence multiplier; `None` disables outlier filtering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlier_fence: Option<f64>,
}

impl WeightSpec {
    pub fn new(kind: WeightKind) -> Self {
        Self {
            kind,
            coincidence_tolerance: None,
            outlier_fence: None,
        }
    }

    pub fn indicator(radius: f64) -> Self {
        Self::new(WeightKind::Indicator { radius })
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self::new(WeightKind::Gaussian {
            sigma,
            squared_norm: false,
        })
    }

    pub fn knn(k: usize) -> Self {
        Self::new(WeightKind::Knn { k })
    }

    pub fn idw() -> Self {
        Self::new(WeightKind::Idw)
    }

    pub fn truncated_idw(k: usize) -> Self {
        Self::new(WeightKind::TruncatedIdw { k })
    }

    pub fn with_outlier_filter(mut self, fence: f64) -> Self {
        self.outlier_fence = Some(fence);
        self
    }

    pub fn with_coincidence_tolerance(mut self, delta: f64) -> Self {
        self.coincidence_tolerance = Some(delta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(WqisaError::InvalidWeight(m.to_string()));
        match self.kind {
            WeightKind::Indicator { radius } if !(radius > 0.0 && radius.is_finite()) => {
                return bad("indicator radius must be positive")
            }
            WeightKind::Gaussian { sigma, .. } if !(sigma > 0.0 && sigma.is_finite()) => {
                return bad("gaussian sigma must be positive")
            }
            WeightKind::Knn { k } | WeightKind::TruncatedIdw { k } if k == 0 => {
                return bad("neighbour count must be at least 1")
            }
            _ => {}
        }
        if let Some(delta) = self.coincidence_tolerance {
            if !(delta >= 0.0 && delta.is_finite()) {
                return bad("coincidence tolerance must be nonnegative");
            }
        }
        if let Some(f) = self.outlier_fence {
            if !(f >= 0.0 && f.is_finite()) {
                return bad("fence multiplier must be nonnegative");
            }
        }
        Ok(())
    }

    /// The tunable parameter of this kind, if any.
    pub fn parameter(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Indicator { radius } => Some(radius),
            WeightKind::Gaussian { sigma, .. } => Some(sigma),
            WeightKind::Knn { k } | WeightKind::TruncatedIdw { k } => Some(k as f64),
            WeightKind::Idw => None,
        }
    }

    /// Copy with the tunable parameter replaced. Counts are rounded.
    pub fn with_parameter(mut self, value: f64) -> Self {
        self.kind = match self.kind {
            WeightKind::Indicator { .. } => WeightKind::Indicator { radius: value },
            WeightKind::Gaussian { squared_norm, .. } => WeightKind::Gaussian {
                sigma: value,
                squared_norm,
            },
            WeightKind::Knn { .. } => WeightKind::Knn {
                k: value.round().max(0.0) as usize,
            },
            WeightKind::TruncatedIdw { .. } => WeightKind::TruncatedIdw {
                k: value.round().max(0.0) as usize,
            },
            WeightKind::Idw => WeightKind::Idw,
        };
        self
    }
}

/// Indicator weight: 1 when `(x, y)` is within `r` of `(u, v)`.
pub fn weight_indicator(x: f64, y: f64, u: f64, v: f64, r: f64) -> f64 {
    if squared_distance(x, y, u, v).sqrt() <= r {
        1.0
    } else {
        0.0
    }
}

/// Gaussian weight with the unsquared norm in the exponent.
pub fn weight_gaussian(x: f64, y: f64, u: f64, v: f64, sigma: f64) -> f64 {
    gaussian(squared_distance(x, y, u, v), sigma, false)
}

/// Gaussian weight with the conventional squared norm in the exponent.
pub fn weight_gaussian_squared(x: f64, y: f64, u: f64, v: f64, sigma: f64) -> f64 {
    gaussian(squared_distance(x, y, u, v), sigma, true)
}

fn gaussian(d2: f64, sigma: f64, squared_norm: bool) -> f64 {
    let d = if squared_norm { d2 } else { d2.sqrt() };
    (-d / (2.0 * sigma * sigma)).exp()
}

/// Per-point `k`-NN weights for the query `(u, v)`.
pub fn weight_knn(u: f64, v: f64, cloud: &PointCloud, k: usize) -> Result<Vec<f64>> {
    if cloud.is_empty() {
        return Err(WqisaError::EmptyCloud);
    }
    let index = PlanarIndex::build_with_ids(cloud.iter().enumerate().map(|(i, p)| (p.x, p.y, i)))?;
    let mut weights = vec![0.0; cloud.len()];
    for n in index.knn(u, v, k)? {
        weights[n.id] = 1.0 / k as f64;
    }
    Ok(weights)
}

/// IDW weight of the sample at `(x, y)` for the query `(u, v)`, given the
/// cloud it belongs to and the coincidence tolerance `delta`.
pub fn weight_idw(x: f64, y: f64, u: f64, v: f64, cloud: &PointCloud, delta: f64) -> f64 {
    let coincident = cloud
        .iter()
        .filter(|p| squared_distance(p.x, p.y, u, v).sqrt() <= delta)
        .count();
    let d = squared_distance(x, y, u, v).sqrt();
    if coincident == 0 {
        1.0 / d
    } else if d <= delta {
        1.0 / coincident as f64
    } else {
        0.0
    }
}

/// Outcome of one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Points with positive weight that entered the quotient.
    pub contributors: usize,
    /// The outlier filter removed every point and the unfiltered quotient
    /// was used instead.
    pub filter_fallback: bool,
}

/// Control point estimator over a fixed cloud, backed by a k-d tree.
#[derive(Debug, Clone)]
pub struct ControlPointEstimator<'a> {
    cloud: &'a PointCloud,
    index: PlanarIndex,
    default_tolerance: f64,
}

impl<'a> ControlPointEstimator<'a> {
    pub fn new(cloud: &'a PointCloud) -> Result<Self> {
        let bbox = cloud.bounding_box()?;
        let index = PlanarIndex::build_with_ids(cloud.iter().enumerate().map(|(i, p)| (p.x, p.y, i)))?;
        Ok(Self {
            cloud,
            index,
            default_tolerance: DEFAULT_RELATIVE_COINCIDENCE * bbox.diagonal(),
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    pub fn coincidence_tolerance(&self, spec: &WeightSpec) -> f64 {
        spec.coincidence_tolerance.unwrap_or(self.default_tolerance)
    }

    /// `(point id, weight)` for every point the weight function touches,
    /// by ascending id. Weights may be zero (e.g. Gaussian underflow).
    pub fn weights(&self, u: f64, v: f64, spec: &WeightSpec) -> Result<Vec<(usize, f64)>> {
        spec.validate()?;
        let pts = self.cloud.points();
        let mut out: Vec<(usize, f64)> = match spec.kind {
            WeightKind::Indicator { radius } => self
                .index
                .within_radius(u, v, radius)
                .into_iter()
                .map(|n| (n.id, 1.0))
                .collect(),
            WeightKind::Gaussian { sigma, squared_norm } => pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i, gaussian(squared_distance(p.x, p.y, u, v), sigma, squared_norm)))
                .collect(),
            WeightKind::Knn { k } => {
                let w = 1.0 / k as f64;
                self.index.knn(u, v, k)?.into_iter().map(|n| (n.id, w)).collect()
            }
            WeightKind::Idw => {
                let delta = self.coincidence_tolerance(spec);
                let coincident = self.index.within_radius(u, v, delta);
                if coincident.is_empty() {
                    pts.iter()
                        .enumerate()
                        .map(|(i, p)| (i, 1.0 / squared_distance(p.x, p.y, u, v).sqrt()))
                        .collect()
                } else {
                    let w = 1.0 / coincident.len() as f64;
                    coincident.into_iter().map(|n| (n.id, w)).collect()
                }
            }
            WeightKind::TruncatedIdw { k } => {
                let delta = self.coincidence_tolerance(spec);
                let nearest = self.index.knn(u, v, k.min(pts.len()))?;
                let coincident: Vec<usize> = nearest.iter().filter(|n| n.distance <= delta).map(|n| n.id).collect();
                if coincident.is_empty() {
                    nearest.into_iter().map(|n| (n.id, 1.0 / n.distance)).collect()
                } else {
                    let w = 1.0 / coincident.len() as f64;
                    coincident.into_iter().map(|id| (id, w)).collect()
                }
            }
        };
        out.sort_unstable_by_key(|&(id, _)| id);
        Ok(out)
    }

    pub fn estimate(&self, u: f64, v: f64, spec: &WeightSpec) -> Result<Estimate> {
        let weights = self.weights(u, v, spec)?;
        let positive: Vec<(usize, f64)> = weights.into_iter().filter(|&(_, w)| w > 0.0).collect();
        let pts = self.cloud.points();
        if positive.is_empty() {
            return Err(WqisaError::ZeroWeight { u, v });
        }
        if let Some(fence) = spec.outlier_fence {
            let mut z: Vec<f64> = positive.iter().map(|&(i, _)| pts[i].z).collect();
            z.sort_by(f64::total_cmp);
            let q1 = quantile_sorted(&z, 0.25);
            let q3 = quantile_sorted(&z, 0.75);
            let iqr = q3 - q1;
            let (lo, hi) = (q1 - fence * iqr, q3 + fence * iqr);
            let kept: Vec<(usize, f64)> = positive
                .iter()
                .copied()
                .filter(|&(i, _)| pts[i].z >= lo && pts[i].z <= hi)
                .collect();
            if let Some(value) = weighted_mean(self.cloud, &kept) {
                return Ok(Estimate {
                    value,
                    contributors: kept.len(),
                    filter_fallback: false,
                });
            }
            let value = weighted_mean(self.cloud, &positive).ok_or(WqisaError::ZeroWeight { u, v })?;
            return Ok(Estimate {
                value,
                contributors: positive.len(),
                filter_fallback: true,
            });
        }
        let value = weighted_mean(self.cloud, &positive).ok_or(WqisaError::ZeroWeight { u, v })?;
        Ok(Estimate {
            value,
            contributors: positive.len(),
            filter_fallback: false,
        })
    }

    /// Estimates every coefficient of `space` at the knot averages.
    pub fn coefficients(&self, space: &TensorSplineSpace, spec: &WeightSpec) -> Result<Vec<f64>> {
        let xs = space.knots_x.knot_averages();
        let ys = space.knots_y.knot_averages();
        let ny = ys.len();
        let entry = |flat: usize| {
            let (i, j) = (flat / ny, flat % ny);
            self.estimate(xs[i], ys[j], spec)
                .map(|e| e.value)
                .map_err(|err| match err {
                    WqisaError::ZeroWeight { u, v } => WqisaError::ZeroWeightCoefficient { i, j, u, v },
                    other => other,
                })
        };
        #[cfg(feature = "parallel")]
        let results: Vec<Result<f64>> = {
            use rayon::prelude::*;
            (0..xs.len() * ny).into_par_iter().map(entry).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Result<f64>> = (0..xs.len() * ny).map(entry).collect();
        results.into_iter().collect()
    }

    pub fn fit(&self, space: &TensorSplineSpace, spec: &WeightSpec) -> Result<WqisaSurface> {
        WqisaSurface::new(space.clone(), self.coefficients(space, spec)?)
    }
}

/// `sum z w / sum w`, kept inside the z range of the contributing points.
fn weighted_mean(cloud: &PointCloud, weights: &[(usize, f64)]) -> Option<f64> {
    let pts = cloud.points();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(i, w) in weights {
        let z = pts[i].z;
        num += z * w;
        den += w;
        if w > 0.0 {
            lo = lo.min(z);
            hi = hi.max(z);
        }
    }
    (den > 0.0).then(|| (num / den).clamp(lo, hi))
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Estimator value at `(u, v)`.
pub fn estimate_control_point(cloud: &PointCloud, u: f64, v: f64, spec: &WeightSpec) -> Result<f64> {
    ControlPointEstimator::new(cloud)?.estimate(u, v, spec).map(|e| e.value)
}

/// Coefficient grid (row-major, `n_x` by `n_y`) of the approximation of
/// `cloud` in `space`.
pub fn estimate_all_coefficients(cloud: &PointCloud, space: &TensorSplineSpace, spec: &WeightSpec) -> Result<Vec<f64>> {
    ControlPointEstimator::new(cloud)?.coefficients(space, spec)
}

/// Approximation of `cloud` in `space` with weight `spec`.
pub fn fit_surface(cloud: &PointCloud, space: &TensorSplineSpace, spec: &WeightSpec) -> Result<WqisaSurface> {
    ControlPointEstimator::new(cloud)?.fit(space, spec)
}
