//! Planar geometry kernel: Delaunay triangulation, Euclidean minimum
//! spanning trees, nearest-point queries and the candidate-source rule used
//! by the Prim-style tree construction.

mod delaunay;
mod kdtree;
mod mst;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use delaunay::{candidate_sources, delaunay, Triangulation};
pub use kdtree::KdTree;
pub use mst::{euclidean_mst, prim_sparse, Edge, EdgeList};

/// Collinearity tolerance, applied to coordinates normalized to the unit
/// bounding box.
pub const EPS_GEO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    #[inline]
    pub fn dist2(self, other: Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn key(self) -> (u64, u64) {
        // -0.0 and 0.0 are the same location.
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Collapses coincident points.
///
/// Returns the distinct points in first-occurrence order and, for every
/// input point, the index of its representative in that list.
pub fn dedup_points(points: &[Point]) -> (Vec<Point>, Vec<usize>) {
    let mut seen: HashMap<(u64, u64), usize> = HashMap::with_capacity(points.len());
    let mut unique = Vec::new();
    let mut map = Vec::with_capacity(points.len());
    for &p in points {
        let idx = *seen.entry(p.key()).or_insert_with(|| {
            unique.push(p);
            unique.len() - 1
        });
        map.push(idx);
    }
    (unique, map)
}

/// Sign-exact orientation test; positive when (a, b, c) is counter-clockwise.
#[inline]
pub(crate) fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

/// Sign-exact in-circle test; positive when `p` lies strictly inside the
/// circumcircle of the counter-clockwise triangle (a, b, c).
#[inline]
pub(crate) fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(p))
}

#[inline]
fn coord(p: [f64; 2]) -> robust::Coord<f64> {
    robust::Coord { x: p[0], y: p[1] }
}

/// Affine map of a point set onto the unit box, preserving aspect ratio.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Normalizer {
    min_x: f64,
    min_y: f64,
    scale: f64,
}

impl Normalizer {
    pub fn fit(points: &[Point]) -> Self {
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for p in points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        let span = (max_x - min_x).max(max_y - min_y);
        let scale = if span > 0.0 && span.is_finite() { span } else { 1.0 };
        Normalizer {
            min_x: if min_x.is_finite() { min_x } else { 0.0 },
            min_y: if min_y.is_finite() { min_y } else { 0.0 },
            scale,
        }
    }

    #[inline]
    pub fn apply(&self, p: Point) -> [f64; 2] {
        [(p.x - self.min_x) / self.scale, (p.y - self.min_y) / self.scale]
    }
}

/// True when every point lies within [`EPS_GEO`] of the line through the two
/// points farthest apart along the dominant axis.
pub fn all_collinear(points: &[Point]) -> bool {
    if points.len() < 3 {
        return true;
    }
    let norm = Normalizer::fit(points);
    let q: Vec<[f64; 2]> = points.iter().map(|&p| norm.apply(p)).collect();
    let (mut lo, mut hi) = (0, 0);
    for i in 1..q.len() {
        if (q[i][0], q[i][1]) < (q[lo][0], q[lo][1]) {
            lo = i;
        }
        if (q[i][0], q[i][1]) > (q[hi][0], q[hi][1]) {
            hi = i;
        }
    }
    let len = ((q[hi][0] - q[lo][0]).powi(2) + (q[hi][1] - q[lo][1]).powi(2)).sqrt();
    if len == 0.0 {
        return true;
    }
    q.iter()
        .all(|&c| (orient(q[lo], q[hi], c) / len).abs() <= EPS_GEO)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_maps_back_to_representatives() {
        let pts = [
            Point::new(1.0, 2.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 2.0),
            Point::new(-0.0, 0.0),
        ];
        let (unique, map) = dedup_points(&pts);
        assert_eq!(unique.len(), 2);
        assert_eq!(map, vec![0, 1, 0, 1]);
    }

    #[test]
    fn predicates_have_expected_sign() {
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert!(orient(a, b, c) > 0.0);
        assert!(incircle(a, b, c, [0.4, 0.4]) > 0.0);
        assert!(incircle(a, b, c, [2.0, 2.0]) < 0.0);
        assert_eq!(incircle(a, b, c, [1.0, 1.0]), 0.0);
    }

    #[test]
    fn collinearity() {
        let line: Vec<Point> = (0..5).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert!(all_collinear(&line));
        let mut bent = line.clone();
        bent.push(Point::new(0.0, 1.0));
        assert!(!all_collinear(&bent));
    }
}
