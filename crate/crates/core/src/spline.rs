//! Tensor-product B-spline machinery: knot vectors, basis evaluation, knot
//! averages, surface evaluation and knot insertion.

use crate::cloud::Rect;
use crate::error::{Result, WqisaError};

/// A `(p+1)`-regular knot vector of degree `p`.
///
/// Boundary values repeat exactly `p + 1` times and no interior value repeats
/// more than `p + 1` times, so the domain is `[knots[p], knots[n]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        let invalid = |msg: String| Err(WqisaError::InvalidKnotVector(msg));
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return invalid(format!(
                "{} knots cannot carry degree {p}; need at least {}",
                knots.len(),
                2 * (p + 1)
            ));
        }
        if let Some(k) = knots.iter().find(|k| !k.is_finite()) {
            return invalid(format!("non-finite knot {k}"));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return invalid("knots must be nondecreasing".into());
        }
        let a = knots[0];
        let b = knots[knots.len() - 1];
        if a >= b {
            return invalid(format!("empty domain [{a}, {b}]"));
        }
        let lead = knots.iter().take_while(|&&k| k == a).count();
        let trail = knots.iter().rev().take_while(|&&k| k == b).count();
        if lead != p + 1 || trail != p + 1 {
            return invalid(format!(
                "boundary knots must repeat exactly {} times (found {lead} and {trail})",
                p + 1
            ));
        }
        let mut run = 1;
        for w in knots[lead..knots.len() - trail].windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            if run > p + 1 {
                return invalid(format!("interior knot {} repeats more than {} times", w[0], p + 1));
            }
        }
        Ok(Self { degree, knots })
    }

    /// Single element `[a, b]` with maximal boundary multiplicity.
    pub fn bezier(degree: usize, a: f64, b: f64) -> Result<Self> {
        Self::uniform(degree, a, b, 1)
    }

    /// Open knot vector with `elements` equal spans on `[a, b]`.
    pub fn uniform(degree: usize, a: f64, b: f64, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(WqisaError::InvalidKnotVector("zero elements".into()));
        }
        let mut knots = vec![a; degree + 1];
        let h = (b - a) / elements as f64;
        knots.extend((1..elements).map(|e| a + h * e as f64));
        knots.extend(std::iter::repeat_n(b, degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.domain();
        t >= a && t <= b
    }

    /// Knot index `mu` with `knots[mu] <= t < knots[mu + 1]`; `t == b` maps to
    /// the last nonempty span.
    pub fn span(&self, t: f64) -> Option<usize> {
        if !self.contains(t) {
            return None;
        }
        let n = self.len();
        let upper = self.knots.partition_point(|&k| k <= t);
        Some(upper.saturating_sub(1).clamp(self.degree, n - 1))
    }

    /// The nonempty spans as `(knot index, lo, hi)`, left to right.
    pub fn elements(&self) -> Vec<(usize, f64, f64)> {
        (self.degree..self.len())
            .filter(|&mu| self.knots[mu] < self.knots[mu + 1])
            .map(|mu| (mu, self.knots[mu], self.knots[mu + 1]))
            .collect()
    }

    pub fn element_count(&self) -> usize {
        self.elements().len()
    }

    /// Position of the span containing `t` among [`elements`](Self::elements).
    pub fn element_ordinal(&self, t: f64) -> Option<usize> {
        let mu = self.span(t)?;
        let (a, _) = self.domain();
        // Count distinct knot values strictly greater than a and <= knots[mu].
        let mut ordinal = 0;
        let mut prev = a;
        for &k in &self.knots[self.degree + 1..=mu] {
            if k > prev {
                ordinal += 1;
                prev = k;
            }
        }
        Some(ordinal)
    }

    /// `B_i(t)` by the Cox-de Boor recursion.
    pub fn basis_value(&self, i: usize, t: f64) -> Result<f64> {
        let n = self.len();
        if i >= n {
            return Err(WqisaError::IndexOutOfRange { index: i, count: n });
        }
        if !self.contains(t) {
            return Ok(0.0);
        }
        let (_, b) = self.domain();
        // The right end of the domain belongs to the last nonempty span.
        let last_span = n - 1;
        Ok(cox_de_boor(&self.knots, i, self.degree, t, |j| {
            t == b && j == last_span
        }))
    }

    /// The `p + 1` basis functions that may be nonzero on span `mu`, i.e.
    /// `B_{mu-p}(t), ..., B_mu(t)`.
    pub fn active_basis(&self, mu: usize, t: f64) -> Vec<f64> {
        let p = self.degree;
        let x = &self.knots;
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = t - x[mu + 1 - j];
            right[j] = x[mu + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        values
    }

    /// Greville abscissae `(x_{i+1} + ... + x_{i+p}) / p`; span midpoints for
    /// degree zero.
    pub fn knot_averages(&self) -> Vec<f64> {
        let p = self.degree;
        let (a, b) = self.domain();
        (0..self.len())
            .map(|i| {
                let avg = if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                };
                avg.clamp(a, b)
            })
            .collect()
    }

    pub fn multiplicity(&self, t: f64) -> usize {
        self.knots.iter().filter(|&&k| k == t).count()
    }

    /// Inserts `t` strictly inside the domain.
    pub fn insert_knot(&self, t: f64) -> Result<KnotVector> {
        let (a, b) = self.domain();
        if !(t > a && t < b) {
            return Err(WqisaError::KnotOutsideDomain { knot: t, a, b });
        }
        if self.multiplicity(t) + 1 > self.degree + 1 {
            return Err(WqisaError::MultiplicityOverflow {
                knot: t,
                max: self.degree + 1,
            });
        }
        let at = self.knots.partition_point(|&k| k <= t);
        let mut knots = self.knots.clone();
        knots.insert(at, t);
        Ok(KnotVector {
            degree: self.degree,
            knots,
        })
    }
}

/// Value at `t` of the single B-spline defined by the local knot vector
/// `local = [x_0, ..., x_{p+1}]`, with half-open support `[x_0, x_{p+1})`.
pub fn local_basis(local: &[f64], t: f64) -> f64 {
    assert!(local.len() >= 2, "a local knot vector needs at least two knots");
    let p = local.len() - 2;
    cox_de_boor(local, 0, p, t, |_| false)
}

fn cox_de_boor(x: &[f64], i: usize, p: usize, t: f64, closes_right: impl Fn(usize) -> bool + Copy) -> f64 {
    if p == 0 {
        let inside = x[i] <= t && t < x[i + 1];
        let end = x[i] < x[i + 1] && t == x[i + 1] && closes_right(i);
        return if inside || end { 1.0 } else { 0.0 };
    }
    let mut value = 0.0;
    let d1 = x[i + p] - x[i];
    if d1 > 0.0 {
        value += (t - x[i]) / d1 * cox_de_boor(x, i, p - 1, t, closes_right);
    }
    let d2 = x[i + p + 1] - x[i + 1];
    if d2 > 0.0 {
        value += (x[i + p + 1] - t) / d2 * cox_de_boor(x, i + 1, p - 1, t, closes_right);
    }
    value
}

/// Tensor product of two knot vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSplineSpace {
    pub knots_x: KnotVector,
    pub knots_y: KnotVector,
}

impl TensorSplineSpace {
    pub fn new(knots_x: KnotVector, knots_y: KnotVector) -> Self {
        Self { knots_x, knots_y }
    }

    /// One element covering `rect` with maximal boundary multiplicities.
    pub fn single_element(degree: (usize, usize), rect: Rect) -> Result<Self> {
        Self::uniform(degree, rect, (1, 1))
    }

    pub fn uniform(degree: (usize, usize), rect: Rect, elements: (usize, usize)) -> Result<Self> {
        Ok(Self {
            knots_x: KnotVector::uniform(degree.0, rect.x_min, rect.x_max, elements.0)?,
            knots_y: KnotVector::uniform(degree.1, rect.y_min, rect.y_max, elements.1)?,
        })
    }

    pub fn degree(&self) -> (usize, usize) {
        (self.knots_x.degree(), self.knots_y.degree())
    }

    /// `(n_x, n_y)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.knots_x.len(), self.knots_y.len())
    }

    pub fn dimension(&self) -> usize {
        self.knots_x.len() * self.knots_y.len()
    }

    pub fn domain(&self) -> Rect {
        let (x_min, x_max) = self.knots_x.domain();
        let (y_min, y_max) = self.knots_y.domain();
        Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// Number of nonempty elements per direction.
    pub fn element_counts(&self) -> (usize, usize) {
        (self.knots_x.element_count(), self.knots_y.element_count())
    }

    /// Knot indices `(mu, nu)` of the element containing `(x, y)`.
    pub fn element_of(&self, x: f64, y: f64) -> Result<(usize, usize)> {
        match (self.knots_x.span(x), self.knots_y.span(y)) {
            (Some(mu), Some(nu)) => Ok((mu, nu)),
            _ => Err(WqisaError::OutOfDomain { x, y }),
        }
    }

    /// Element position `(ex, ey)` among the nonempty spans of each direction.
    pub fn element_ordinal(&self, x: f64, y: f64) -> Result<(usize, usize)> {
        match (self.knots_x.element_ordinal(x), self.knots_y.element_ordinal(y)) {
            (Some(ex), Some(ey)) => Ok((ex, ey)),
            _ => Err(WqisaError::OutOfDomain { x, y }),
        }
    }
}

/// A tensor-product spline surface `sum_ij c_ij B_i(x) B_j(y)` with its
/// coefficient grid stored row-major (`i` over x, `j` over y).
#[derive(Debug, Clone, PartialEq)]
pub struct WqisaSurface {
    space: TensorSplineSpace,
    coefficients: Vec<f64>,
}

impl WqisaSurface {
    pub fn new(space: TensorSplineSpace, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.dimension() {
            let (nx, ny) = space.shape();
            return Err(WqisaError::ShapeMismatch {
                left: (nx, ny),
                right: (coefficients.len(), 1),
            });
        }
        Ok(Self { space, coefficients })
    }

    pub fn constant(space: TensorSplineSpace, value: f64) -> Self {
        let coefficients = vec![value; space.dimension()];
        Self { space, coefficients }
    }

    pub fn space(&self) -> &TensorSplineSpace {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.coefficients[i * self.space.knots_y.len() + j]
    }

    pub fn domain(&self) -> Rect {
        self.space.domain()
    }

    /// Evaluates the surface over the `(p_x+1)(p_y+1)` active basis functions.
    ///
    /// The result is kept inside the range of the active coefficients, which
    /// the exact value always satisfies.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        let (mu, nu) = self.space.element_of(x, y)?;
        let (px, py) = self.space.degree();
        let ny = self.space.knots_y.len();
        let bx = self.space.knots_x.active_basis(mu, x);
        let by = self.space.knots_y.active_basis(nu, y);
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, wx) in bx.iter().enumerate() {
            let row = (mu - px + a) * ny + (nu - py);
            let mut inner = 0.0;
            for (b, wy) in by.iter().enumerate() {
                let c = self.coefficients[row + b];
                inner += c * wy;
                lo = lo.min(c);
                hi = hi.max(c);
            }
            sum += inner * wx;
        }
        Ok(sum.clamp(lo, hi))
    }

    /// Same surface over `knots_x` with `t` inserted (Boehm's algorithm).
    pub fn insert_knot_x(&self, t: f64) -> Result<WqisaSurface> {
        let (nx, ny) = self.space.shape();
        let (knots, weights) = boehm(&self.space.knots_x, t)?;
        let mut coefficients = vec![0.0; (nx + 1) * ny];
        for j in 0..ny {
            let column: Vec<f64> = (0..nx).map(|i| self.coefficient(i, j)).collect();
            for (i, c) in apply_boehm(&column, &weights).into_iter().enumerate() {
                coefficients[i * ny + j] = c;
            }
        }
        WqisaSurface::new(TensorSplineSpace::new(knots, self.space.knots_y.clone()), coefficients)
    }

    /// Same surface over `knots_y` with `t` inserted (Boehm's algorithm).
    pub fn insert_knot_y(&self, t: f64) -> Result<WqisaSurface> {
        let (nx, ny) = self.space.shape();
        let (knots, weights) = boehm(&self.space.knots_y, t)?;
        let mut coefficients = Vec::with_capacity(nx * (ny + 1));
        for i in 0..nx {
            coefficients.extend(apply_boehm(&self.coefficients[i * ny..(i + 1) * ny], &weights));
        }
        WqisaSurface::new(TensorSplineSpace::new(self.space.knots_x.clone(), knots), coefficients)
    }
}

/// Blending weights for inserting `t`: new coefficient `i` is
/// `alpha_i c_i + (1 - alpha_i) c_{i-1}`.
fn boehm(kv: &KnotVector, t: f64) -> Result<(KnotVector, Vec<f64>)> {
    let refined = kv.insert_knot(t)?;
    let p = kv.degree();
    let x = kv.knots();
    let k = x.partition_point(|&v| v <= t) - 1;
    let alphas = (0..=kv.len())
        .map(|i| {
            if i + p <= k {
                1.0
            } else if i > k {
                0.0
            } else {
                (t - x[i]) / (x[i + p] - x[i])
            }
        })
        .collect();
    Ok((refined, alphas))
}

fn apply_boehm(c: &[f64], alphas: &[f64]) -> Vec<f64> {
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let cur = if i < c.len() { c[i] } else { 0.0 };
            let prev = if i > 0 { c[i - 1] } else { 0.0 };
            alpha * cur + (1.0 - alpha) * prev
        })
        .collect()
}
