use serde::{Deserialize, Serialize};

use crate::error::{Result, WqisaError};

/// A sample `(x, y, z)` of a height field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

impl From<[f64; 3]> for Point {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

/// Axis-aligned rectangle in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    /// Widens zero-width sides so the rectangle can carry a knot vector.
    pub fn non_degenerate(mut self) -> Self {
        if self.x_max <= self.x_min {
            let pad = 0.5 * self.x_min.abs().max(1.0);
            self.x_min -= pad;
            self.x_max += pad;
        }
        if self.y_max <= self.y_min {
            let pad = 0.5 * self.y_min.abs().max(1.0);
            self.y_min -= pad;
            self.y_max += pad;
        }
        self
    }
}

/// An unordered set of samples. Input order is kept because neighbour
/// tie-breaking is defined in terms of it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointCloud {
    points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Subset by index, keeping the order of `indices`.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud::new(indices.iter().map(|&i| self.points[i]).collect())
    }

    pub fn bounding_box(&self) -> Result<Rect> {
        let first = self.points.first().ok_or(WqisaError::EmptyCloud)?;
        let init = Rect {
            x_min: first.x,
            x_max: first.x,
            y_min: first.y,
            y_max: first.y,
        };
        Ok(self.points.iter().fold(init, |r, p| Rect {
            x_min: r.x_min.min(p.x),
            x_max: r.x_max.max(p.x),
            y_min: r.y_min.min(p.y),
            y_max: r.y_max.max(p.y),
        }))
    }

    /// `(min z, max z)`.
    pub fn z_range(&self) -> Result<(f64, f64)> {
        if self.points.is_empty() {
            return Err(WqisaError::EmptyCloud);
        }
        Ok(self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.z), hi.max(p.z))
            }))
    }

    pub fn z_variance(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let n = self.points.len() as f64;
        let mean = self.points.iter().map(|p| p.z).sum::<f64>() / n;
        self.points.iter().map(|p| (p.z - mean).powi(2)).sum::<f64>() / n
    }
}

impl FromIterator<Point> for PointCloud {
    fn from_iter<T: IntoIterator<Item = Point>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}
