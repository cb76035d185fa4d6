//! Multilevel B-spline approximation baseline.
//!
//! Level `l` lives on a uniform mesh of `2^l x 2^l` bi-quadratic elements over
//! a common domain and approximates the residuals left by levels `0..l`.

use crate::cloud::{PointCloud, Rect};
use crate::error::{Result, WqisaError};
use crate::metrics::{self, Surface};
use crate::spline::{TensorSplineSpace, WqisaSurface};

pub const MBA_DEGREE: (usize, usize) = (2, 2);

/// Explicit per-basis coefficients of one level.
///
/// Each point contributes `phi = B_k z / sum_l B_l^2` to every basis function
/// `B_k` active at it, and `c_k` is the `B_k^2`-weighted mean of those
/// contributions. Basis functions whose support holds no point get zero.
pub fn mba_level_coefficients(cloud: &PointCloud, space: &TensorSplineSpace) -> Result<Vec<f64>> {
    let (nx, ny) = space.shape();
    let (px, py) = space.degree();
    let mut num = vec![0.0; nx * ny];
    let mut den = vec![0.0; nx * ny];
    for p in cloud {
        let (mu, nu) = space.element_of(p.x, p.y)?;
        let bx = space.knots_x.active_basis(mu, p.x);
        let by = space.knots_y.active_basis(nu, p.y);
        let norm: f64 = bx.iter().flat_map(|a| by.iter().map(move |b| (a * b) * (a * b))).sum();
        if norm == 0.0 {
            continue;
        }
        for (a, wx) in bx.iter().enumerate() {
            for (b, wy) in by.iter().enumerate() {
                let w = wx * wy;
                let phi = w * p.z / norm;
                let k = (mu - px + a) * ny + (nu - py + b);
                num[k] += w * w * phi;
                den[k] += w * w;
            }
        }
    }
    Ok(num
        .into_iter()
        .zip(den)
        .map(|(n, d)| if d > 0.0 { n / d } else { 0.0 })
        .collect())
}

/// Sum of per-level surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct MbaSurface {
    levels: Vec<WqisaSurface>,
}

impl MbaSurface {
    pub fn new(levels: Vec<WqisaSurface>) -> Result<Self> {
        if levels.is_empty() {
            return Err(WqisaError::Config("an MBA surface needs at least one level".into()));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[WqisaSurface] {
        &self.levels
    }

    pub fn domain(&self) -> Rect {
        self.levels[0].domain()
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        self.levels.iter().map(|s| s.evaluate(x, y)).sum()
    }

    /// The finest level's mesh.
    pub fn finest_space(&self) -> &TensorSplineSpace {
        self.levels[self.levels.len() - 1].space()
    }
}

impl Surface for MbaSurface {
    fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        MbaSurface::evaluate(self, x, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbaFit {
    pub surface: MbaSurface,
    /// Validation GMSE after each computed level (empty without validation).
    pub gmse: Vec<f64>,
    /// Root-mean-square training residual after each computed level.
    pub residual_rms: Vec<f64>,
    pub best_level: usize,
}

/// Fits levels until `max_levels` or until the validation GMSE increases;
/// the returned surface stops at the level with the lowest GMSE so far.
pub fn fit_mba(cloud: &PointCloud, max_levels: usize, validation: &PointCloud) -> Result<MbaFit> {
    if cloud.is_empty() {
        return Err(WqisaError::EmptyCloud);
    }
    let mut rect = cloud.bounding_box()?;
    if !validation.is_empty() {
        let v = validation.bounding_box()?;
        rect = Rect {
            x_min: rect.x_min.min(v.x_min),
            x_max: rect.x_max.max(v.x_max),
            y_min: rect.y_min.min(v.y_min),
            y_max: rect.y_max.max(v.y_max),
        };
    }
    fit_mba_on(cloud, max_levels, validation, rect.non_degenerate())
}

/// As [`fit_mba`] over an explicit domain.
pub fn fit_mba_on(cloud: &PointCloud, max_levels: usize, validation: &PointCloud, domain: Rect) -> Result<MbaFit> {
    if cloud.is_empty() {
        return Err(WqisaError::EmptyCloud);
    }
    if max_levels == 0 {
        return Err(WqisaError::Config("max_levels must be at least 1".into()));
    }
    let mut residual: Vec<crate::cloud::Point> = cloud.points().to_vec();
    let mut levels: Vec<WqisaSurface> = Vec::new();
    let mut gmse = Vec::new();
    let mut residual_rms = Vec::new();
    let mut best_level = 0;
    for level in 0..max_levels {
        let elements = 1usize << level.min(20);
        let space = TensorSplineSpace::uniform(MBA_DEGREE, domain, (elements, elements))?;
        let residual_cloud = PointCloud::new(residual.clone());
        let coefficients = mba_level_coefficients(&residual_cloud, &space)?;
        let surface = WqisaSurface::new(space, coefficients)?;
        for p in residual.iter_mut() {
            p.z -= surface.evaluate(p.x, p.y)?;
        }
        levels.push(surface);
        residual_rms.push((residual.iter().map(|p| p.z * p.z).sum::<f64>() / residual.len() as f64).sqrt());
        if validation.is_empty() {
            best_level = level;
            continue;
        }
        let current = MbaSurface { levels: levels.clone() };
        let e = metrics::mse(&current, validation)?;
        let increased = gmse.last().is_some_and(|&prev| e > prev);
        gmse.push(e);
        if increased {
            break;
        }
        best_level = level;
    }
    levels.truncate(best_level + 1);
    Ok(MbaFit {
        surface: MbaSurface { levels },
        gmse,
        residual_rms,
        best_level,
    })
}
