use super::Point;

/// Static 2-d tree for nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point>,
    /// Permutation of point indices laid out as an implicit balanced tree.
    order: Vec<usize>,
}

impl KdTree {
    pub fn new(points: &[Point]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        build(points, &mut order, 0);
        KdTree { points: points.to_vec(), order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index and distance of the point closest to `q`; ties go to the
    /// smallest index.
    pub fn nearest(&self, q: Point) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(&self.order, 0, q, &mut best);
        Some((best.0, best.1.sqrt()))
    }

    fn search(&self, slice: &[usize], depth: usize, q: Point, best: &mut (usize, f64)) {
        if slice.is_empty() {
            return;
        }
        let mid = slice.len() / 2;
        let i = slice[mid];
        let p = self.points[i];
        let d2 = p.dist2(q);
        if d2 < best.1 || (d2 == best.1 && i < best.0) {
            *best = (i, d2);
        }
        let diff = if depth % 2 == 0 { q.x - p.x } else { q.y - p.y };
        let (near, far) = if diff < 0.0 {
            (&slice[..mid], &slice[mid + 1..])
        } else {
            (&slice[mid + 1..], &slice[..mid])
        };
        self.search(near, depth + 1, q, best);
        if diff * diff <= best.1 {
            self.search(far, depth + 1, q, best);
        }
    }
}

fn build(points: &[Point], slice: &mut [usize], depth: usize) {
    if slice.len() <= 1 {
        return;
    }
    let mid = slice.len() / 2;
    let axis = depth % 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        let (ka, kb) = if axis == 0 {
            (points[a].x, points[b].x)
        } else {
            (points[a].y, points[b].y)
        };
        ka.total_cmp(&kb).then(a.cmp(&b))
    });
    let (left, right) = slice.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut right[1..], depth + 1);
}
