//! Error measures: punctual error statistics, global and local mean squared
//! errors, Hausdorff distance and the L-infinity norm on grids.

use serde::{Deserialize, Serialize};

use crate::cloud::{PointCloud, Rect};
use crate::error::{Result, WqisaError};
use crate::spline::{TensorSplineSpace, WqisaSurface};

/// Statistics of the absolute residuals `|z - f(x, y)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    /// Population standard deviation of the absolute residuals.
    pub std: f64,
    pub mse: f64,
    pub max_abs: f64,
    pub count: usize,
}

impl ErrorStats {
    /// Statistics of signed residuals `z - f`.
    pub fn from_residuals(residuals: &[f64]) -> Result<Self> {
        if residuals.is_empty() {
            return Err(WqisaError::EmptySet);
        }
        let n = residuals.len() as f64;
        let mean = residuals.iter().map(|r| r.abs()).sum::<f64>() / n;
        let var = residuals.iter().map(|r| (r.abs() - mean).powi(2)).sum::<f64>() / n;
        let mse = residuals.iter().map(|r| r * r).sum::<f64>() / n;
        let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        Ok(Self {
            mean,
            std: var.sqrt(),
            mse,
            max_abs,
            count: residuals.len(),
        })
    }
}

/// Anything that can be evaluated over the plane.
pub trait Surface {
    fn evaluate(&self, x: f64, y: f64) -> Result<f64>;
}

impl Surface for WqisaSurface {
    fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        WqisaSurface::evaluate(self, x, y)
    }
}

/// Signed residuals `z - f(x, y)` in cloud order.
pub fn residuals<S: Surface + ?Sized>(surface: &S, cloud: &PointCloud) -> Result<Vec<f64>> {
    cloud
        .iter()
        .map(|p| surface.evaluate(p.x, p.y).map(|f| p.z - f))
        .collect()
}

pub fn punctual_errors<S: Surface + ?Sized>(surface: &S, cloud: &PointCloud) -> Result<ErrorStats> {
    ErrorStats::from_residuals(&residuals(surface, cloud)?)
}

/// Mean squared error of `surface` over `cloud` (the GMSE for a validation set).
pub fn mse<S: Surface + ?Sized>(surface: &S, cloud: &PointCloud) -> Result<f64> {
    punctual_errors(surface, cloud).map(|s| s.mse)
}

/// Per-element local mean squared error over the nonempty spans of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementErrorMap {
    /// Elements along x and y.
    pub shape: (usize, usize),
    /// Row-major over `(ex, ey)`.
    pub lmse: Vec<f64>,
    pub counts: Vec<usize>,
}

impl ElementErrorMap {
    pub fn get(&self, ex: usize, ey: usize) -> f64 {
        self.lmse[ex * self.shape.1 + ey]
    }

    pub fn count(&self, ex: usize, ey: usize) -> usize {
        self.counts[ex * self.shape.1 + ey]
    }

    /// Count-weighted mean of the element errors; equals the GMSE when every
    /// validation point falls in the mesh.
    pub fn pooled(&self) -> f64 {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let sum: f64 = self.lmse.iter().zip(&self.counts).map(|(e, &c)| e * c as f64).sum();
        sum / total as f64
    }
}

/// LMSE of `surface` on the elements of `space`; elements without validation
/// points carry zero. Points outside the mesh are ignored.
pub fn lmse<S: Surface + ?Sized>(
    surface: &S,
    validation: &PointCloud,
    space: &TensorSplineSpace,
) -> Result<ElementErrorMap> {
    let shape = space.element_counts();
    let mut sums = vec![0.0; shape.0 * shape.1];
    let mut counts = vec![0usize; shape.0 * shape.1];
    for p in validation {
        let Ok((ex, ey)) = space.element_ordinal(p.x, p.y) else {
            continue;
        };
        let r = p.z - surface.evaluate(p.x, p.y)?;
        sums[ex * shape.1 + ey] += r * r;
        counts[ex * shape.1 + ey] += 1;
    }
    let lmse = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    Ok(ElementErrorMap { shape, lmse, counts })
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// `max_a min_b |a - b|` with early termination: the inner scan stops once
/// a distance below the running maximum is found.
pub fn directed_hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(WqisaError::EmptySet);
    }
    let mut cmax = 0.0f64;
    for p in a {
        let mut cmin = f64::INFINITY;
        for q in b {
            let d = dist3(p, q);
            if d < cmin {
                cmin = d;
                if cmin < cmax {
                    break;
                }
            }
        }
        if cmin > cmax {
            cmax = cmin;
        }
    }
    Ok(cmax)
}

/// Two-sided Hausdorff distance between finite point sets.
pub fn hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Samples `surface` on a uniform `nx` by `ny` grid over its domain.
pub fn sample_surface(surface: &WqisaSurface, nx: usize, ny: usize) -> Result<Vec<[f64; 3]>> {
    sample_on(surface, surface.domain(), nx, ny)
}

/// Samples any surface on a uniform grid over `rect`, x outermost.
pub fn sample_on<S: Surface + ?Sized>(surface: &S, rect: Rect, nx: usize, ny: usize) -> Result<Vec<[f64; 3]>> {
    let nx = nx.max(2);
    let ny = ny.max(2);
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = lerp(rect.x_min, rect.x_max, i, nx);
        for j in 0..ny {
            let y = lerp(rect.y_min, rect.y_max, j, ny);
            out.push([x, y, surface.evaluate(x, y)?]);
        }
    }
    Ok(out)
}

/// `lo + (hi - lo) * i / (n - 1)`, hitting `hi` exactly at the last index.
pub(crate) fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Grid density for surface sampling: `factor` points per finest element
/// along each axis.
pub fn default_sampling(space: &TensorSplineSpace, factor: usize) -> (usize, usize) {
    let (ex, ey) = space.element_counts();
    (factor * ex + 1, factor * ey + 1)
}

/// Hausdorff distance between `cloud` and the image of `surface` over
/// `rect`, the latter sampled on a dense `grid`.
pub fn hausdorff_to_surface<S: Surface + ?Sized>(
    cloud: &PointCloud,
    surface: &S,
    rect: Rect,
    grid: (usize, usize),
) -> Result<f64> {
    let a: Vec<[f64; 3]> = cloud.iter().map(|p| [p.x, p.y, p.z]).collect();
    let b = sample_on(surface, rect, grid.0, grid.1)?;
    hausdorff(&a, &b)
}

/// Maximum absolute entrywise difference of two grids of equal shape.
pub fn linf_gridded(a: &[f64], a_shape: (usize, usize), b: &[f64], b_shape: (usize, usize)) -> Result<f64> {
    if a_shape != b_shape || a.len() != a_shape.0 * a_shape.1 || b.len() != b_shape.0 * b_shape.1 {
        return Err(WqisaError::ShapeMismatch {
            left: a_shape,
            right: b_shape,
        });
    }
    Ok(a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}
