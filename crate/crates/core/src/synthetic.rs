//! Synthetic clouds for tests, benchmarks and the demo.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cloud::{Point, PointCloud};
use crate::error::{Result, WqisaError};

/// `sqrt(64 - 81((x - 0.5)^2 + (y - 0.5)^2)) / 8.5`, or `None` where the
/// radicand is negative.
pub fn hemisphere_z(x: f64, y: f64) -> Option<f64> {
    let radicand = 64.0 - 81.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2));
    (radicand >= 0.0).then(|| radicand.sqrt() / (9.0 - 0.5))
}

/// `n` uniform samples of the hemisphere over `[0, 1]^2` with exact heights.
pub fn hemisphere_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let x: f64 = rng.random();
        let y: f64 = rng.random();
        if let Some(z) = hemisphere_z(x, y) {
            points.push(Point::new(x, y, z));
        }
    }
    PointCloud::new(points)
}

/// Adds `N(0, noise_std)` to every height, then replaces
/// `round(outlier_fraction * n)` heights with uniform draws from the z range
/// widened by `outlier_scale` about its centre.
pub fn perturb(
    cloud: &PointCloud,
    noise_std: f64,
    outlier_fraction: f64,
    outlier_scale: f64,
    seed: u64,
) -> Result<PointCloud> {
    if !(0.0..=1.0).contains(&outlier_fraction) {
        return Err(WqisaError::Config(format!(
            "outlier fraction {outlier_fraction} not in [0, 1]"
        )));
    }
    if noise_std.is_nan() || noise_std < 0.0 || outlier_scale.is_nan() || outlier_scale < 0.0 {
        return Err(WqisaError::Config("noise and outlier scale must be nonnegative".into()));
    }
    if cloud.is_empty() {
        return Ok(cloud.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = cloud.z_range()?;
    let mut points = cloud.points().to_vec();
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std).map_err(|e| WqisaError::Config(e.to_string()))?;
        for p in &mut points {
            p.z += normal.sample(&mut rng);
        }
    }
    let count = (outlier_fraction * points.len() as f64).round() as usize;
    if count > 0 {
        let centre = 0.5 * (lo + hi);
        let range = if hi > lo { hi - lo } else { 1.0 };
        let half = 0.5 * outlier_scale * range;
        for i in index::sample(&mut rng, points.len(), count) {
            points[i].z = if half > 0.0 {
                rng.random_range(centre - half..=centre + half)
            } else {
                centre
            };
        }
    }
    Ok(PointCloud::new(points))
}
