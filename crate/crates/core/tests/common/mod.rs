//! Independent brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use wqisa::cloud::{Point, PointCloud};
use wqisa::weights::{WeightKind, WeightSpec};

pub fn d2(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let dx = ax - bx;
    let dy = ay - by;
    dx * dx + dy * dy
}

/// Per-point weights computed by scanning and fully sorting the cloud.
pub fn brute_weights(cloud: &[Point], u: f64, v: f64, spec: &WeightSpec, delta: f64) -> Vec<f64> {
    let n = cloud.len();
    let dist: Vec<f64> = cloud.iter().map(|p| d2(p.x, p.y, u, v).sqrt()).collect();
    let nearest = |k: usize| {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            d2(cloud[a].x, cloud[a].y, u, v)
                .total_cmp(&d2(cloud[b].x, cloud[b].y, u, v))
                .then(a.cmp(&b))
        });
        order.truncate(k);
        order
    };
    let idw_over = |members: &[usize]| {
        let mut w = vec![0.0; n];
        let coincident: Vec<usize> = members.iter().copied().filter(|&i| dist[i] <= delta).collect();
        if coincident.is_empty() {
            for &i in members {
                w[i] = 1.0 / dist[i];
            }
        } else {
            for &i in &coincident {
                w[i] = 1.0 / coincident.len() as f64;
            }
        }
        w
    };
    match spec.kind {
        WeightKind::Indicator { radius } => dist.iter().map(|&d| if d <= radius { 1.0 } else { 0.0 }).collect(),
        WeightKind::Gaussian { sigma, squared_norm } => dist
            .iter()
            .map(|&d| {
                let e = if squared_norm { d * d } else { d };
                (-e / (2.0 * sigma * sigma)).exp()
            })
            .collect(),
        WeightKind::Knn { k } => {
            let mut w = vec![0.0; n];
            for i in nearest(k) {
                w[i] = 1.0 / k as f64;
            }
            w
        }
        WeightKind::Idw => idw_over(&(0..n).collect::<Vec<_>>()),
        WeightKind::TruncatedIdw { k } => idw_over(&nearest(k.min(n))),
    }
}

/// Weights after the optional Tukey filter; the unfiltered weights come back
/// when the filter would remove every point.
pub fn brute_filtered_weights(cloud: &[Point], u: f64, v: f64, spec: &WeightSpec, delta: f64) -> Vec<f64> {
    let w = brute_weights(cloud, u, v, spec, delta);
    let Some(f) = spec.outlier_fence else {
        return w;
    };
    let mut z: Vec<f64> = cloud
        .iter()
        .zip(&w)
        .filter(|(_, &w)| w > 0.0)
        .map(|(p, _)| p.z)
        .collect();
    if z.is_empty() {
        return w;
    }
    z.sort_by(f64::total_cmp);
    let q = |t: f64| {
        let pos = t * (z.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        z[lo] + (pos - lo as f64) * (z[hi] - z[lo])
    };
    let (q1, q3) = (q(0.25), q(0.75));
    let (lo, hi) = (q1 - f * (q3 - q1), q3 + f * (q3 - q1));
    let kept: Vec<f64> = w
        .iter()
        .zip(cloud)
        .map(|(&wi, p)| if p.z < lo || p.z > hi { 0.0 } else { wi })
        .collect();
    if kept.iter().any(|&k| k > 0.0) {
        kept
    } else {
        w
    }
}

/// `sum z w / sum w` with all sums in input order.
pub fn brute_estimate(cloud: &[Point], u: f64, v: f64, spec: &WeightSpec, delta: f64) -> Option<f64> {
    if matches!(spec.kind, WeightKind::Knn { k } if k > cloud.len()) {
        return None;
    }
    let w = brute_filtered_weights(cloud, u, v, spec, delta);
    let num: f64 = cloud.iter().zip(&w).map(|(p, w)| p.z * w).sum();
    let den: f64 = w.iter().sum();
    (den > 0.0).then(|| num / den)
}

/// Indices of the points that enter the estimate at `(u, v)`.
pub fn support(cloud: &[Point], u: f64, v: f64, spec: &WeightSpec, delta: f64) -> Vec<usize> {
    brute_filtered_weights(cloud, u, v, spec, delta)
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, _)| i)
        .collect()
}

pub fn delta_for(cloud: &PointCloud, spec: &WeightSpec) -> f64 {
    spec.coincidence_tolerance
        .unwrap_or(1e-12 * cloud.bounding_box().unwrap().diagonal())
}

pub fn brute_hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let dist = |p: &[f64; 3], q: &[f64; 3]| {
        let dx = p[0] - q[0];
        let dy = p[1] - q[1];
        let dz = p[2] - q[2];
        (dx * dx + dy * dy + dz * dz).sqrt()
    };
    let directed = |a: &[[f64; 3]], b: &[[f64; 3]]| {
        a.iter()
            .map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}
