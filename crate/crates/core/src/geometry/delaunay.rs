//! Incremental Bowyer-Watson triangulation.
//!
//! The convex hull is closed off with "ghost" triangles that share a single
//! vertex at infinity, so points outside the current hull are inserted with
//! the same cavity procedure as interior points and no super-triangle is
//! needed. Points are inserted along a Hilbert curve so the point-location
//! walk from the previously created triangle stays short.

use std::collections::{BTreeSet, HashMap};

use super::{incircle, orient, Normalizer, Point};
use crate::error::{Error, Result};

/// Vertex at infinity.
const GHOST: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    /// Counter-clockwise; a ghost triangle stores `GHOST` at index 2.
    v: [usize; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    n: [usize; 3],
    alive: bool,
}

impl Tri {
    fn new(a: usize, b: usize, c: usize) -> Self {
        let v = if a == GHOST {
            [b, c, GHOST]
        } else if b == GHOST {
            [c, a, GHOST]
        } else {
            [a, b, c]
        };
        Tri {
            v,
            n: [usize::MAX; 3],
            alive: true,
        }
    }

    #[inline]
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }

    /// Index of the vertex opposite the edge {u, w}.
    #[inline]
    fn opposite(&self, u: usize, w: usize) -> usize {
        (0..3)
            .find(|&i| self.v[i] != u && self.v[i] != w)
            .expect("edge not in triangle")
    }
}

#[derive(Debug, Clone)]
struct Mesh {
    coords: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    incident: Vec<usize>,
    mark: Vec<u32>,
    generation: u32,
    last: usize,
}

impl Mesh {
    fn alloc(&mut self, t: Tri) -> usize {
        if let Some(id) = self.free.pop() {
            self.tris[id] = t;
            id
        } else {
            self.tris.push(t);
            self.mark.push(0);
            self.tris.len() - 1
        }
    }

    fn set_neighbor(&mut self, t: usize, u: usize, w: usize, nb: usize) {
        let i = self.tris[t].opposite(u, w);
        self.tris[t].n[i] = nb;
    }

    fn in_conflict(&self, t: usize, p: [f64; 2]) -> bool {
        let tri = &self.tris[t];
        let a = self.coords[tri.v[0]];
        let b = self.coords[tri.v[1]];
        if tri.is_ghost() {
            let o = orient(a, b, p);
            if o != 0.0 {
                return o > 0.0;
            }
            let dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            dot > 0.0 && dot < len2
        } else {
            incircle(a, b, self.coords[tri.v[2]], p) > 0.0
        }
    }

    fn finite_start(&self, t: usize) -> usize {
        if self.tris[t].is_ghost() {
            self.tris[t].n[2]
        } else {
            t
        }
    }

    /// Visibility walk. Returns a finite triangle containing `p` (closed), or
    /// the ghost triangle whose hull edge separates `p` from the interior.
    fn locate(&self, p: [f64; 2], start: usize) -> usize {
        let mut t = self.finite_start(start);
        let limit = self.tris.len() + 16;
        let mut rot = 0usize;
        'walk: for _ in 0..limit {
            let tri = self.tris[t];
            if tri.is_ghost() {
                return t;
            }
            rot += 1;
            for k in 0..3 {
                let i = (k + rot) % 3;
                let a = self.coords[tri.v[(i + 1) % 3]];
                let b = self.coords[tri.v[(i + 2) % 3]];
                if orient(a, b, p) < 0.0 {
                    t = tri.n[i];
                    continue 'walk;
                }
            }
            return t;
        }
        self.locate_scan(p)
    }

    fn locate_scan(&self, p: [f64; 2]) -> usize {
        let mut fallback = None;
        for (id, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            if tri.is_ghost() {
                if fallback.is_none() && self.in_conflict(id, p) {
                    fallback = Some(id);
                }
                continue;
            }
            let inside = (0..3).all(|i| {
                orient(
                    self.coords[tri.v[(i + 1) % 3]],
                    self.coords[tri.v[(i + 2) % 3]],
                    p,
                ) >= 0.0
            });
            if inside {
                return id;
            }
        }
        fallback.unwrap_or(self.last)
    }

    fn next_generation(&mut self) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.generation = 1;
        }
        self.generation
    }

    /// Triangles whose circumcircle strictly contains `p`, grown from the
    /// triangle `start` located for `p`.
    fn conflict_region(&mut self, p: [f64; 2], start: usize, force_start: bool) -> Vec<usize> {
        let gen = self.next_generation();
        let mut region = Vec::new();
        if !force_start && !self.in_conflict(start, p) {
            return region;
        }
        self.mark[start] = gen;
        region.push(start);
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if self.mark[nb] == gen {
                    continue;
                }
                if self.in_conflict(nb, p) {
                    self.mark[nb] = gen;
                    region.push(nb);
                    stack.push(nb);
                }
            }
        }
        region
    }

    fn insert(&mut self, pi: usize) {
        let p = self.coords[pi];
        let start = self.locate(p, self.last);
        let mut cavity = self.conflict_region(p, start, true);
        let gen = self.generation;

        // The cavity must be star-shaped from p; absorb any neighbour across
        // an edge that p does not strictly see from the inside.
        let mut boundary: Vec<(usize, usize, usize)> = Vec::new();
        loop {
            boundary.clear();
            let mut absorbed = Vec::new();
            for &t in &cavity {
                let tri = self.tris[t];
                for i in 0..3 {
                    let nb = tri.n[i];
                    if self.mark[nb] == gen {
                        continue;
                    }
                    let a = tri.v[(i + 1) % 3];
                    let b = tri.v[(i + 2) % 3];
                    if a != GHOST
                        && b != GHOST
                        && orient(self.coords[a], self.coords[b], p) <= 0.0
                    {
                        self.mark[nb] = gen;
                        absorbed.push(nb);
                    } else {
                        boundary.push((a, b, nb));
                    }
                }
            }
            if absorbed.is_empty() {
                break;
            }
            cavity.extend(absorbed);
        }

        for &t in &cavity {
            self.tris[t].alive = false;
            self.free.push(t);
        }

        let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(boundary.len());
        let mut by_end: HashMap<usize, usize> = HashMap::with_capacity(boundary.len());
        let mut created = Vec::with_capacity(boundary.len());
        for &(a, b, nb) in &boundary {
            let t = self.alloc(Tri::new(a, b, pi));
            self.set_neighbor(t, a, b, nb);
            self.set_neighbor(nb, a, b, t);
            by_start.insert(a, t);
            by_end.insert(b, t);
            created.push((a, b, t));
        }
        for &(a, b, t) in &created {
            let after = by_start[&b];
            let before = by_end[&a];
            self.set_neighbor(t, b, pi, after);
            self.set_neighbor(t, pi, a, before);
            for v in [a, b] {
                if v != GHOST {
                    self.incident[v] = t;
                }
            }
            if !self.tris[t].is_ghost() {
                self.last = t;
            }
        }
        self.incident[pi] = self.last;
    }
}

/// Delaunay triangulation of a planar point set.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub points: Vec<Point>,
    /// Counter-clockwise index triples, each rotated so the smallest index
    /// comes first, sorted.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted neighbour lists.
    pub adjacency: Vec<Vec<usize>>,
    /// Convex-hull vertices in counter-clockwise order, starting at the
    /// smallest index.
    pub hull: Vec<usize>,
    mesh: Mesh,
}

impl Triangulation {
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    #[inline]
    fn coords(p: Point) -> [f64; 2] {
        [p.x, p.y]
    }
}

/// Builds the Delaunay triangulation of `points`.
///
/// Requires at least three distinct points that are not all collinear;
/// coincident points are rejected and must be collapsed by the caller.
pub fn delaunay(points: &[Point]) -> Result<Triangulation> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("{n} points, need at least 3")));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidParam(format!("non-finite point {p:?}")));
    }
    let (unique, _) = super::dedup_points(points);
    if unique.len() != n {
        return Err(Error::Degenerate("duplicate points".into()));
    }

    if super::all_collinear(points) {
        return Err(Error::Degenerate("all points collinear".into()));
    }

    let norm = Normalizer::fit(points);
    let order = hilbert_order(&points.iter().map(|&p| norm.apply(p)).collect::<Vec<_>>());
    let coords: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();

    let (i0, i1) = (order[0], order[1]);
    let third = order[2..]
        .iter()
        .position(|&k| orient(coords[i0], coords[i1], coords[k]) != 0.0)
        .map(|pos| pos + 2)
        .ok_or_else(|| Error::Degenerate("all points collinear".into()))?;
    let i2 = order[third];

    let (a, b, c) = if orient(coords[i0], coords[i1], coords[i2]) > 0.0 {
        (i0, i1, i2)
    } else {
        (i0, i2, i1)
    };
    let mut mesh = Mesh {
        coords,
        tris: Vec::with_capacity(2 * n + 8),
        free: Vec::new(),
        incident: vec![usize::MAX; n],
        mark: Vec::with_capacity(2 * n + 8),
        generation: 0,
        last: 0,
    };
    let seed = [
        Tri::new(a, b, c),
        Tri::new(c, b, GHOST),
        Tri::new(a, c, GHOST),
        Tri::new(b, a, GHOST),
    ];
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for t in seed {
        let id = mesh.alloc(t);
        for i in 0..3 {
            directed.insert((t.v[(i + 1) % 3], t.v[(i + 2) % 3]), id);
        }
    }
    for id in 0..4 {
        for i in 0..3 {
            let v = mesh.tris[id].v;
            mesh.tris[id].n[i] = directed[&(v[(i + 2) % 3], v[(i + 1) % 3])];
        }
    }
    for v in [a, b, c] {
        mesh.incident[v] = 0;
    }

    for (pos, &k) in order.iter().enumerate() {
        if pos == 0 || pos == 1 || pos == third {
            continue;
        }
        mesh.insert(k);
    }

    Ok(extract(points.to_vec(), mesh))
}

fn extract(points: Vec<Point>, mesh: Mesh) -> Triangulation {
    let n = points.len();
    let mut triangles = Vec::new();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut hull_next = vec![usize::MAX; n];
    for tri in mesh.tris.iter().filter(|t| t.alive) {
        if tri.is_ghost() {
            hull_next[tri.v[1]] = tri.v[0];
            continue;
        }
        let v = tri.v;
        let r = (0..3).min_by_key(|&i| v[i]).unwrap();
        triangles.push([v[r], v[(r + 1) % 3], v[(r + 2) % 3]]);
        for i in 0..3 {
            let (x, y) = (v[i], v[(i + 1) % 3]);
            adj[x].insert(y);
            adj[y].insert(x);
        }
    }
    triangles.sort_unstable();
    let mut hull = Vec::new();
    if let Some(start) = (0..n).find(|&i| hull_next[i] != usize::MAX) {
        let mut cur = start;
        loop {
            hull.push(cur);
            cur = hull_next[cur];
            if cur == start || hull.len() > n {
                break;
            }
        }
    }
    Triangulation {
        points,
        triangles,
        adjacency: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        hull,
        mesh,
    }
}

fn hilbert_order(coords: &[[f64; 2]]) -> Vec<usize> {
    const ORDER: u32 = 16;
    let side = ((1u32 << ORDER) - 1) as f64;
    let mut keyed: Vec<(u64, usize)> = coords
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let x = (c[0].clamp(0.0, 1.0) * side) as u32;
            let y = (c[1].clamp(0.0, 1.0) * side) as u32;
            (hilbert_index(x, y, ORDER), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_index(mut x: u32, mut y: u32, order: u32) -> u64 {
    let n = 1u32 << order;
    let mut d = 0u64;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

/// Sources near `target`, used to limit priority updates during Prim-style
/// tree growth.
///
/// If `target` lies strictly inside the circumcircle of one or more Delaunay
/// triangles, the vertices of all those triangles are returned. Otherwise the
/// target is outside the hull and the hull chain between the two tangent
/// points seen from it is returned. When `paired_source` (the source of the
/// request that `target` belongs to) is among the candidates, its Delaunay
/// neighbours are added as well. A target that coincides with a source is
/// treated as lying on the circumcircles around that source.
pub fn candidate_sources(tri: &Triangulation, target: Point, paired_source: usize) -> Vec<usize> {
    let p = Triangulation::coords(target);
    let mesh = &tri.mesh;
    let hint = mesh.incident[paired_source];
    let start = mesh.locate(p, hint);

    // The traversal marks are interior state; work on a scratch copy of them
    // so the triangulation can be shared between threads.
    let mut scratch = Scratch::new(mesh.tris.len());
    let region = scratch.conflict_region(mesh, p, start);

    let mut set: BTreeSet<usize> = BTreeSet::new();
    let finite: Vec<usize> = region
        .iter()
        .copied()
        .filter(|&t| !mesh.tris[t].is_ghost())
        .collect();
    if !finite.is_empty() {
        for t in finite {
            set.extend(mesh.tris[t].v);
        }
    } else {
        for &t in &region {
            let v = mesh.tris[t].v;
            set.insert(v[0]);
            set.insert(v[1]);
        }
    }
    if set.is_empty() {
        // Only possible when the target sits exactly on a source.
        if let Some(v) = tri.points.iter().position(|&q| q == target) {
            set.insert(v);
            set.extend(tri.adjacency[v].iter().copied());
        } else {
            set.extend(0..tri.points.len());
        }
    }
    if set.contains(&paired_source) {
        set.extend(tri.adjacency[paired_source].iter().copied());
    }
    set.into_iter().collect()
}

struct Scratch {
    mark: Vec<bool>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            mark: vec![false; n],
        }
    }

    fn conflict_region(&mut self, mesh: &Mesh, p: [f64; 2], start: usize) -> Vec<usize> {
        let mut region = Vec::new();
        if !mesh.in_conflict(start, p) {
            return region;
        }
        self.mark[start] = true;
        region.push(start);
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            for &nb in &mesh.tris[t].n {
                if !self.mark[nb] && mesh.in_conflict(nb, p) {
                    self.mark[nb] = true;
                    region.push(nb);
                    stack.push(nb);
                }
            }
        }
        region
    }
}
