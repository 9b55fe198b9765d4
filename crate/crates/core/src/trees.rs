//! Per-depot spanning trees over request sources ("original trees").
//!
//! Both constructions contract all depots into one super-depot whose distance
//! to a source is the distance to the nearest depot (ties to the lower depot
//! index, i.e. the faster one), grow a tree over the super-depot and the
//! sources, and finally hand every subtree hanging off the super-depot to the
//! depot realizing that distance. Each request's target hangs off its source.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geometry::{self, candidate_sources, dedup_points, euclidean_mst, KdTree, Point, Triangulation};
use crate::instance::Instance;
use crate::union_find::UnionFind;

pub const DEFAULT_MST_K: f64 = 7.0;

/// A vertex of an original or large tree. Indices refer to
/// [`Instance::depots`] and [`Instance::requests`]. The derived order (depot,
/// source, target, then index) is the deterministic child order used when
/// routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    Depot(usize),
    Source(usize),
    Target(usize),
}

impl Node {
    pub fn point(self, inst: &Instance) -> Point {
        match self {
            Node::Depot(j) => inst.depots[j].location,
            Node::Source(i) => inst.requests[i].source,
            Node::Target(i) => inst.requests[i].target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub a: Node,
    pub b: Node,
    pub len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalTree {
    pub depot: usize,
    /// Depot first, then sources and targets in request order.
    pub nodes: Vec<Node>,
    pub edges: Vec<TreeEdge>,
    pub weight: f64,
    /// Request indices, ascending.
    pub requests: Vec<usize>,
}

impl OriginalTree {
    fn empty(depot: usize) -> Self {
        OriginalTree { depot, nodes: vec![Node::Depot(depot)], edges: Vec::new(), weight: 0.0, requests: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Checks connectivity, acyclicity, the source-target edges and the
    /// stored weight.
    pub fn validate(&self, inst: &Instance) -> std::result::Result<(), String> {
        let n = self.nodes.len();
        if self.edges.len() + 1 != n {
            return Err(format!("tree of depot {}: {} nodes, {} edges", self.depot, n, self.edges.len()));
        }
        if self.nodes[0] != Node::Depot(self.depot) {
            return Err(format!("tree of depot {} does not start at its depot", self.depot));
        }
        let pos = |x: Node| self.nodes.iter().position(|&y| y == x);
        let mut uf = UnionFind::new(n);
        let mut total = 0.0;
        for e in &self.edges {
            let (Some(a), Some(b)) = (pos(e.a), pos(e.b)) else {
                return Err(format!("edge {e:?} leaves the node set"));
            };
            if !uf.union(a, b) {
                return Err(format!("edge {e:?} closes a cycle"));
            }
            let d = e.a.point(inst).dist(e.b.point(inst));
            if (d - e.len).abs() > 1e-9 * d.max(1.0) {
                return Err(format!("edge {e:?} has length {d}"));
            }
            total += e.len;
        }
        for &i in &self.requests {
            let st = self
                .edges
                .iter()
                .any(|e| (e.a, e.b) == (Node::Source(i), Node::Target(i)) || (e.b, e.a) == (Node::Source(i), Node::Target(i)));
            if !st {
                return Err(format!("request {i} lacks its source-target edge"));
            }
        }
        if (total - self.weight).abs() > 1e-9 * total.max(1.0) {
            return Err(format!("weight {} but edges sum to {total}", self.weight));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    /// One tree per depot index; depots without requests own a depot-only tree.
    pub trees: Vec<OriginalTree>,
    /// Depot index serving each request.
    pub coverage: Vec<usize>,
}

impl Forest {
    pub fn total_weight(&self) -> f64 {
        self.trees.iter().map(|t| t.weight).sum()
    }

    pub fn validate(&self, inst: &Instance) -> std::result::Result<(), String> {
        if self.coverage.len() != inst.m() {
            return Err("coverage size mismatch".into());
        }
        let mut seen = vec![false; inst.m()];
        for t in &self.trees {
            t.validate(inst)?;
            for &i in &t.requests {
                if std::mem::replace(&mut seen[i], true) {
                    return Err(format!("request {i} in two trees"));
                }
                if self.coverage[i] != t.depot {
                    return Err(format!("coverage of request {i} disagrees with tree"));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(format!("request {i} not covered"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Nearest depot for every source; ties go to the lowest depot index.
fn nearest_depots(inst: &Instance) -> Vec<(usize, f64)> {
    let locs: Vec<Point> = inst.depots.iter().map(|d| d.location).collect();
    let kd = KdTree::new(&locs);
    inst.requests.iter().map(|r| kd.nearest(r.source).unwrap()).collect()
}

/// `parent[i]` is the node through which source `i` joined: a depot or
/// another request's source or target.
fn assemble(inst: &Instance, parent: &[(Node, f64)]) -> Forest {
    let m = inst.m();
    // Resolve the depot owning each source by following parents.
    let mut owner = vec![usize::MAX; m];
    for start in 0..m {
        let mut chain = Vec::new();
        let mut cur = start;
        let depot = loop {
            if owner[cur] != usize::MAX {
                break owner[cur];
            }
            chain.push(cur);
            match parent[cur].0 {
                Node::Depot(j) => break j,
                Node::Source(i) | Node::Target(i) => cur = i,
            }
        };
        for c in chain {
            owner[c] = depot;
        }
    }
    let mut trees: Vec<OriginalTree> = (0..inst.k()).map(OriginalTree::empty).collect();
    for i in 0..m {
        trees[owner[i]].requests.push(i);
    }
    for t in &mut trees {
        for &i in &t.requests {
            t.nodes.push(Node::Source(i));
            t.nodes.push(Node::Target(i));
            let (p, len) = parent[i];
            t.edges.push(TreeEdge { a: p, b: Node::Source(i), len });
            t.edges.push(TreeEdge { a: Node::Source(i), b: Node::Target(i), len: inst.requests[i].length() });
        }
        t.weight = t.edges.iter().map(|e| e.len).sum();
    }
    Forest { trees, coverage: owner }
}

/// Minimum spanning tree over the contracted super-depot and all sources,
/// split back into per-depot trees.
pub fn build_trees_mst(inst: &Instance) -> Forest {
    let m = inst.m();
    if m == 0 {
        return assemble(inst, &[]);
    }
    let sources: Vec<Point> = inst.requests.iter().map(|r| r.source).collect();
    let near = nearest_depots(inst);
    // Node m is the super-depot. The contracted MST uses only Euclidean
    // source-MST edges among sources (cycle property) plus super edges.
    let mut cand: Vec<(f64, usize, usize)> = euclidean_mst(&sources)
        .expect("finite sources")
        .into_iter()
        .map(|e| (e.w, e.u.min(e.v), e.u.max(e.v)))
        .collect();
    cand.extend((0..m).map(|i| (near[i].1, i, m)));
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut uf = UnionFind::new(m + 1);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
    for (_, u, v) in cand {
        if uf.union(u, v) {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut parent = vec![(Node::Depot(0), 0.0); m];
    let mut seen = vec![false; m + 1];
    seen[m] = true;
    let mut queue = VecDeque::from([m]);
    while let Some(u) = queue.pop_front() {
        adj[u].sort_unstable();
        for &v in &adj[u] {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            parent[v] = if u == m {
                (Node::Depot(near[v].0), near[v].1)
            } else {
                (Node::Source(u), sources[u].dist(sources[v]))
            };
            queue.push_back(v);
        }
    }
    assemble(inst, &parent)
}

/// Sources grouped by coincident location, with the Delaunay triangulation of
/// the distinct locations when one exists.
struct SourceIndex {
    tri: Option<Triangulation>,
    /// Distinct location of each request's source.
    loc_of: Vec<usize>,
    /// Requests at each distinct location.
    members: Vec<Vec<usize>>,
    /// Neighbouring locations: Delaunay adjacency, or the sorted chain in the
    /// degenerate case.
    neighbors: Vec<Vec<usize>>,
    /// Degenerate case only: locations sorted along their common line.
    unique: Vec<Point>,
    chain: Vec<usize>,
}

impl SourceIndex {
    fn new(inst: &Instance) -> Self {
        let sources: Vec<Point> = inst.requests.iter().map(|r| r.source).collect();
        let (unique, loc_of) = dedup_points(&sources);
        let mut members = vec![Vec::new(); unique.len()];
        for (i, &l) in loc_of.iter().enumerate() {
            members[l].push(i);
        }
        match geometry::delaunay(&unique) {
            Ok(tri) => {
                let neighbors = tri.adjacency.clone();
                SourceIndex { tri: Some(tri), loc_of, members, neighbors, unique: Vec::new(), chain: Vec::new() }
            }
            Err(_) => {
                let mut order: Vec<usize> = (0..unique.len()).collect();
                order.sort_by(|&a, &b| {
                    (unique[a].x, unique[a].y).partial_cmp(&(unique[b].x, unique[b].y)).unwrap_or(Ordering::Equal)
                });
                let mut neighbors = vec![Vec::new(); unique.len()];
                for w in order.windows(2) {
                    neighbors[w[0]].push(w[1]);
                    neighbors[w[1]].push(w[0]);
                }
                SourceIndex { tri: None, loc_of, members, neighbors, unique, chain: order }
            }
        }
    }

    fn key(p: Point) -> (f64, f64) {
        (p.x, p.y)
    }

    /// Degenerate case. A target on the line of sources is adjacent only to
    /// the locations bracketing it; off the line it sees every location.
    fn chain_candidates(&self, target: Point, request: usize) -> Vec<usize> {
        let n = self.chain.len();
        let (a, b) = (self.unique[self.chain[0]], self.unique[self.chain[n - 1]]);
        if n <= 2 || geometry::orient([a.x, a.y], [b.x, b.y], [target.x, target.y]) != 0.0 {
            return (0..n).collect();
        }
        let pos = self.chain.partition_point(|&l| Self::key(self.unique[l]) < Self::key(target));
        let mut out = Vec::with_capacity(6);
        out.extend(pos.checked_sub(1).map(|p| self.chain[p]));
        if pos < n {
            out.push(self.chain[pos]);
            if self.unique[self.chain[pos]] == target && pos + 1 < n {
                out.push(self.chain[pos + 1]);
            }
        }
        let own = self.loc_of[request];
        out.push(own);
        out.extend(self.neighbors[own].iter().copied());
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Candidate source locations for a target belonging to `request`.
    fn candidates(&self, target: Point, request: usize) -> Vec<usize> {
        match &self.tri {
            Some(tri) => candidate_sources(tri, target, self.loc_of[request]),
            None => self.chain_candidates(target, request),
        }
    }
}

#[derive(PartialEq)]
struct Pending(f64, usize);

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prim-style growth from the super-depot in which pending sources can also
/// attach to targets already in the tree.
///
/// A source's target-side priority starts at its super-depot distance and is
/// lowered only when a newly attached target lists it among its candidate
/// sources. With `mst_k = Some(k)`, sources also track the distance to their
/// nearest Delaunay-neighbour source in the tree and are keyed by
/// `min(P_ST, k·P_SS)`; the target-side edge is used when `P_ST <= k·P_SS`.
/// This keeps the source-connection length within `k` times the contracted
/// MST.
pub fn build_trees_prim(inst: &Instance, mst_k: Option<f64>) -> Forest {
    let m = inst.m();
    if m == 0 {
        return assemble(inst, &[]);
    }
    let near = nearest_depots(inst);
    let idx = SourceIndex::new(inst);
    let req = &inst.requests;

    let mut p_st: Vec<(f64, Node)> = (0..m).map(|i| (near[i].1, Node::Depot(near[i].0))).collect();
    let mut p_ss: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); m];
    let key = |st: f64, ss: f64| match mst_k {
        Some(k) => st.min(k * ss),
        None => st,
    };
    let mut done = vec![false; m];
    let mut heap: BinaryHeap<Pending> = (0..m).map(|i| Pending(p_st[i].0, i)).collect();
    let mut parent = vec![(Node::Depot(0), 0.0); m];

    while let Some(Pending(pri, i)) = heap.pop() {
        if done[i] || pri != key(p_st[i].0, p_ss[i].0) {
            continue;
        }
        done[i] = true;
        parent[i] = match mst_k {
            Some(k) if p_st[i].0 > k * p_ss[i].0 => (Node::Source(p_ss[i].1), p_ss[i].0),
            _ => (p_st[i].1, p_st[i].0),
        };

        let t = req[i].target;
        for loc in idx.candidates(t, i) {
            for &c in &idx.members[loc] {
                if done[c] {
                    continue;
                }
                let d = t.dist(req[c].source);
                if d < p_st[c].0 {
                    p_st[c] = (d, Node::Target(i));
                    heap.push(Pending(key(p_st[c].0, p_ss[c].0), c));
                }
            }
        }
        if mst_k.is_some() {
            let s = req[i].source;
            let here = idx.loc_of[i];
            let locs = std::iter::once(here).chain(idx.neighbors[here].iter().copied());
            for loc in locs {
                for &c in &idx.members[loc] {
                    if done[c] {
                        continue;
                    }
                    let d = s.dist(req[c].source);
                    if d < p_ss[c].0 {
                        p_ss[c] = (d, i);
                        heap.push(Pending(key(p_st[c].0, p_ss[c].0), c));
                    }
                }
            }
        }
    }
    assemble(inst, &parent)
}

/// Total length of the contracted source MST: forest weight minus the
/// source-target edges.
pub fn connection_weight(forest: &Forest, inst: &Instance) -> f64 {
    forest.total_weight() - inst.requests.iter().map(|r| r.length()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_gmm, gen_uniform, Depot, Request};
    use proptest::prelude::*;
    use serde_json::Map;

    fn inst(depots: &[(f64, f64, f64)], reqs: &[((f64, f64), (f64, f64))]) -> Instance {
        Instance::new(
            depots
                .iter()
                .enumerate()
                .map(|(id, &(x, y, s))| Depot { id, location: Point::new(x, y), speed: s })
                .collect(),
            reqs.iter()
                .enumerate()
                .map(|(id, &(s, t))| Request { id, source: s.into(), target: t.into() })
                .collect(),
            Map::new(),
        )
        .unwrap()
    }

    /// O(n²) Prim over the contracted graph.
    fn dense_contracted_mst(inst: &Instance) -> f64 {
        let m = inst.m();
        let dr = |i: usize| {
            inst.depots.iter().map(|d| d.location.dist(inst.requests[i].source)).fold(f64::INFINITY, f64::min)
        };
        let mut best: Vec<f64> = (0..m).map(dr).collect();
        let mut done = vec![false; m];
        let mut total = 0.0;
        for _ in 0..m {
            let i = (0..m).filter(|&i| !done[i]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
            done[i] = true;
            total += best[i];
            for j in 0..m {
                if !done[j] {
                    best[j] = best[j].min(inst.requests[i].source.dist(inst.requests[j].source));
                }
            }
        }
        total
    }

    #[test]
    fn single_request_tree() {
        let i = inst(&[(0.0, 0.0, 1.0)], &[((1.0, 0.0), (1.0, 1.0))]);
        let f = build_trees_mst(&i);
        f.validate(&i).unwrap();
        assert_eq!(f.trees[0].weight, 2.0);
        assert_eq!(f, build_trees_prim(&i, None));
        assert_eq!(f, build_trees_prim(&i, Some(7.0)));
    }

    #[test]
    fn sources_go_to_nearest_depot() {
        let i = inst(&[(0.0, 0.0, 1.0), (10.0, 0.0, 1.0)], &[((1.0, 0.0), (1.0, 0.0)), ((9.0, 0.0), (9.0, 0.0))]);
        let f = build_trees_mst(&i);
        f.validate(&i).unwrap();
        assert_eq!(f.coverage, vec![0, 1]);
        assert_eq!(f.total_weight(), 2.0);
    }

    #[test]
    fn empty_instance_gives_empty_trees() {
        let i = inst(&[(0.0, 0.0, 1.0), (3.0, 0.0, 0.5)], &[]);
        let f = build_trees_mst(&i);
        assert_eq!(f.trees.len(), 2);
        assert!(f.trees.iter().all(|t| t.is_empty() && t.weight == 0.0));
    }

    #[test]
    fn prim_attaches_to_nearby_target() {
        let i = inst(&[(0.0, 0.0, 1.0)], &[((1.0, 0.0), (2.0, 0.0)), ((2.1, 0.0), (5.0, 0.0))]);
        let f = build_trees_prim(&i, None);
        f.validate(&i).unwrap();
        let e = f.trees[0].edges.iter().find(|e| e.b == Node::Source(1)).unwrap();
        assert_eq!(e.a, Node::Target(0));
        assert!((e.len - 0.1).abs() < 1e-12);
    }

    #[test]
    fn prim_on_long_collinear_chain() {
        let i = crate::instance::gen_worst_case(20_000, 1.0, 1000.0, 0.01).unwrap();
        let t0 = std::time::Instant::now();
        let f = build_trees_prim(&i, Some(DEFAULT_MST_K));
        assert!(t0.elapsed().as_secs_f64() < 5.0);
        f.validate(&i).unwrap();
        // each point hangs off the previous one
        assert_eq!(f.total_weight(), build_trees_mst(&i).total_weight());
    }

    proptest! {
        #[test]
        fn mst_forest_matches_dense_oracle(seed in 0u64..1000, n in 1usize..120, k in 1usize..5) {
            let i = gen_uniform(n, k, 1, 5.0, seed).unwrap();
            let f = build_trees_mst(&i);
            prop_assert!(f.validate(&i).is_ok(), "{:?}", f.validate(&i));
            let oracle = dense_contracted_mst(&i);
            prop_assert!((connection_weight(&f, &i) - oracle).abs() <= 1e-9 * oracle.max(1.0));
        }

        #[test]
        fn prim_variants_are_valid_and_guarded(seed in 0u64..1000, n in 1usize..150, k in 1usize..5, gmm in any::<bool>()) {
            let i = if gmm { gen_gmm(n, k, 1, 3, 2.0, 5.0, seed).unwrap() } else { gen_uniform(n, k, 1, 5.0, seed).unwrap() };
            let mst = build_trees_mst(&i);
            for g in [None, Some(1.0), Some(DEFAULT_MST_K)] {
                let f = build_trees_prim(&i, g);
                prop_assert!(f.validate(&i).is_ok(), "{:?}", f.validate(&i));
                if let Some(kk) = g {
                    prop_assert!(f.total_weight() <= kk * mst.total_weight() * (1.0 + 1e-9));
                    prop_assert!(connection_weight(&f, &i) <= kk * connection_weight(&mst, &i) * (1.0 + 1e-9) + 1e-9);
                }
            }
        }

        #[test]
        fn duplicate_and_collinear_sources(xs in prop::collection::vec(0i32..6, 1..25)) {
            let reqs: Vec<((f64, f64), (f64, f64))> = xs.iter().map(|&x| ((x as f64, 0.0), (x as f64 + 0.5, 1.0))).collect();
            let i = inst(&[(0.0, -1.0, 1.0), (5.0, -1.0, 0.5)], &reqs);
            for f in [build_trees_mst(&i), build_trees_prim(&i, None), build_trees_prim(&i, Some(7.0))] {
                prop_assert!(f.validate(&i).is_ok(), "{:?}", f.validate(&i));
            }
            // targets on the line of sources
            let reqs: Vec<((f64, f64), (f64, f64))> = xs.iter().map(|&x| ((x as f64, 0.0), (x as f64 * 0.7, 0.0))).collect();
            let i = inst(&[(0.0, -1.0, 1.0), (5.0, -1.0, 0.5)], &reqs);
            let mst = build_trees_mst(&i).total_weight();
            let f = build_trees_prim(&i, Some(7.0));
            prop_assert!(f.validate(&i).is_ok(), "{:?}", f.validate(&i));
            prop_assert!(f.total_weight() <= 7.0 * mst * (1.0 + 1e-9));
        }
    }
}
