use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{all_collinear, dedup_points, delaunay, Point};
use crate::error::{Error, Result};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

pub type EdgeList = Vec<Edge>;

/// Euclidean minimum spanning tree over `points`, computed on Delaunay edges.
///
/// Coincident points are attached to their first occurrence with zero-length
/// edges. Collinear inputs fall back to a path in lexicographic order.
pub fn euclidean_mst(points: &[Point]) -> Result<EdgeList> {
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidParam(format!("non-finite point {p:?}")));
    }
    let n = points.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let (unique, map) = dedup_points(points);
    let mut rep = vec![usize::MAX; unique.len()];
    let mut out = Vec::with_capacity(n - 1);
    for (i, &m) in map.iter().enumerate() {
        if rep[m] == usize::MAX {
            rep[m] = i;
        } else {
            out.push(Edge { u: rep[m], v: i, w: 0.0 });
        }
    }

    let candidates: Vec<(usize, usize)> = if unique.len() < 3 || all_collinear(&unique) {
        let mut order: Vec<usize> = (0..unique.len()).collect();
        order.sort_by(|&a, &b| {
            (unique[a].x, unique[a].y)
                .partial_cmp(&(unique[b].x, unique[b].y))
                .unwrap_or(Ordering::Equal)
        });
        order.windows(2).map(|w| (w[0], w[1])).collect()
    } else {
        delaunay(&unique)?.edges()
    };

    let mut weighted: Vec<Edge> = candidates
        .into_iter()
        .map(|(a, b)| Edge { u: a, v: b, w: unique[a].dist(unique[b]) })
        .collect();
    weighted.sort_by(|a, b| a.w.total_cmp(&b.w).then((a.u, a.v).cmp(&(b.u, b.v))));
    let mut uf = UnionFind::new(unique.len());
    for e in weighted {
        if uf.union(e.u, e.v) {
            out.push(Edge { u: rep[e.u], v: rep[e.v], w: e.w });
        }
    }
    Ok(out)
}

#[derive(PartialEq)]
struct Item(f64, usize, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
            .then_with(|| other.2.cmp(&self.2))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prim on a sparse weighted graph given as adjacency lists `(neighbour,
/// weight)`. Returns a spanning forest; each component is grown from its
/// smallest vertex.
pub fn prim_sparse(adj: &[Vec<(usize, f64)>]) -> EdgeList {
    let n = adj.len();
    let mut done = vec![false; n];
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let mut heap = BinaryHeap::new();
    for root in 0..n {
        if done[root] {
            continue;
        }
        heap.push(Item(0.0, root, usize::MAX));
        while let Some(Item(w, v, from)) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            if from != usize::MAX {
                out.push(Edge { u: from, v, w });
            }
            for &(x, wx) in &adj[v] {
                if !done[x] {
                    heap.push(Item(wx, x, v));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_mst(points: &[Point]) -> f64 {
        let n = points.len();
        let adj: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| (j, points[i].dist(points[j]))).collect())
            .collect();
        prim_sparse(&adj).iter().map(|e| e.w).sum()
    }

    #[test]
    fn square_mst() {
        let p: Vec<Point> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
            .iter()
            .map(|&q| q.into())
            .collect();
        let t = euclidean_mst(&p).unwrap();
        assert_eq!(t.len(), 3);
        assert!((t.iter().map(|e| e.w).sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_and_duplicates() {
        let p: Vec<Point> = [(2.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]
            .iter()
            .map(|&q| q.into())
            .collect();
        let t = euclidean_mst(&p).unwrap();
        assert_eq!(t.len(), 3);
        assert!((t.iter().map(|e| e.w).sum::<f64>() - 2.0).abs() < 1e-12);
        assert!(t.iter().any(|e| e.w == 0.0 && e.u == 1 && e.v == 3));
    }

    proptest! {
        #[test]
        fn matches_dense_prim(raw in prop::collection::vec((0i32..50, 0i32..50), 2..40)) {
            let p: Vec<Point> = raw.iter().map(|&(x, y)| Point::new(x as f64, y as f64)).collect();
            let t = euclidean_mst(&p).unwrap();
            prop_assert_eq!(t.len(), p.len() - 1);
            let mut uf = UnionFind::new(p.len());
            for e in &t {
                prop_assert!(uf.union(e.u, e.v));
            }
            let got: f64 = t.iter().map(|e| e.w).sum();
            prop_assert!((got - brute_mst(&p)).abs() < 1e-9 * got.max(1.0));
        }
    }
}
