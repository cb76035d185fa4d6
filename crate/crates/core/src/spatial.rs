//! Exact k-d tree over the `(x, y)` projections of a cloud.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, WqisaError};

/// Squared planar distance, the quantity every comparison in this crate uses.
#[inline]
pub fn squared_distance(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let dx = ax - bx;
    let dy = ay - by;
    dx * dx + dy * dy
}

/// A neighbour returned by a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbour {
    pub id: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    x: f64,
    y: f64,
    id: usize,
}

/// Balanced 2-d tree built by median splits on alternating axes.
///
/// The tree is stored implicitly: the subtree over `entries[lo..hi]` has its
/// root at `(lo + hi) / 2` and splits on axis `depth % 2`.
#[derive(Debug, Clone)]
pub struct PlanarIndex {
    entries: Vec<Entry>,
}

#[derive(PartialEq)]
struct Candidate {
    d2: f64,
    id: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

impl PlanarIndex {
    /// Builds the index; payload ids are positions in `points`.
    pub fn build(points: &[(f64, f64)]) -> Result<Self> {
        Self::build_with_ids(points.iter().enumerate().map(|(id, &(x, y))| (x, y, id)))
    }

    pub fn build_with_ids(points: impl IntoIterator<Item = (f64, f64, usize)>) -> Result<Self> {
        let mut entries: Vec<Entry> = points.into_iter().map(|(x, y, id)| Entry { x, y, id }).collect();
        if entries.is_empty() {
            return Err(WqisaError::EmptyCloud);
        }
        if entries.iter().any(|e| !e.x.is_finite() || !e.y.is_finite()) {
            return Err(WqisaError::InvalidWeight(
                "non-finite coordinate in spatial index".into(),
            ));
        }
        let len = entries.len();
        partition(&mut entries, 0, len, 0);
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Depth of the deepest node; a single point has depth zero.
    pub fn depth(&self) -> usize {
        (usize::BITS - self.entries.len().leading_zeros()) as usize - 1
    }

    /// The `k` nearest points by ascending distance, ties by lower id.
    pub fn knn(&self, u: f64, v: f64, k: usize) -> Result<Vec<Neighbour>> {
        self.knn_counted(u, v, k).map(|(n, _)| n)
    }

    /// As [`knn`](Self::knn), also reporting the number of visited nodes.
    pub fn knn_counted(&self, u: f64, v: f64, k: usize) -> Result<(Vec<Neighbour>, usize)> {
        let n = self.entries.len();
        if k == 0 || k > n {
            return Err(WqisaError::InvalidNeighbourCount { k, n });
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        let mut visits = 0;
        self.knn_rec(0, n, 0, u, v, k, &mut heap, &mut visits);
        let neighbours = heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| Neighbour {
                id: c.id,
                distance: c.d2.sqrt(),
            })
            .collect();
        Ok((neighbours, visits))
    }

    #[allow(clippy::too_many_arguments)]
    fn knn_rec(
        &self,
        lo: usize,
        hi: usize,
        depth: usize,
        u: f64,
        v: f64,
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
        visits: &mut usize,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let e = self.entries[mid];
        *visits += 1;
        let cand = Candidate {
            d2: squared_distance(e.x, e.y, u, v),
            id: e.id,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if heap.peek().is_some_and(|worst| cand < *worst) {
            heap.pop();
            heap.push(cand);
        }
        let diff = if depth.is_multiple_of(2) { u - e.x } else { v - e.y };
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.knn_rec(near.0, near.1, depth + 1, u, v, k, heap, visits);
        let plane = diff * diff;
        // Equality must still be explored: a tie may carry a lower id.
        let explore = heap.len() < k || heap.peek().is_some_and(|worst| plane <= worst.d2);
        if explore {
            self.knn_rec(far.0, far.1, depth + 1, u, v, k, heap, visits);
        }
    }

    /// All points with `sqrt(squared distance) <= r`, by ascending id.
    pub fn within_radius(&self, u: f64, v: f64, r: f64) -> Vec<Neighbour> {
        let mut out = Vec::new();
        if r >= 0.0 {
            self.radius_rec(0, self.entries.len(), 0, u, v, r, &mut out);
        }
        out.sort_unstable_by_key(|n| n.id);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn radius_rec(&self, lo: usize, hi: usize, depth: usize, u: f64, v: f64, r: f64, out: &mut Vec<Neighbour>) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let e = self.entries[mid];
        let d = squared_distance(e.x, e.y, u, v).sqrt();
        if d <= r {
            out.push(Neighbour { id: e.id, distance: d });
        }
        let diff = if depth.is_multiple_of(2) { u - e.x } else { v - e.y };
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.radius_rec(near.0, near.1, depth + 1, u, v, r, out);
        if (diff * diff).sqrt() <= r {
            self.radius_rec(far.0, far.1, depth + 1, u, v, r, out);
        }
    }
}

fn partition(entries: &mut [Entry], lo: usize, hi: usize, depth: usize) {
    if hi - lo <= 1 {
        return;
    }
    let mid = (lo + hi) / 2;
    let axis = depth % 2;
    let key = |e: &Entry| if axis == 0 { e.x } else { e.y };
    entries[lo..hi].select_nth_unstable_by(mid - lo, |a, b| key(a).total_cmp(&key(b)).then(a.id.cmp(&b.id)));
    partition(entries, lo, mid, depth + 1);
    partition(entries, mid + 1, hi, depth + 1);
}
