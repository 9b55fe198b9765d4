//! Tree combination across speed levels.
//!
//! Every original tree becomes a vertex of a [`LevelGraph`]. Moats grow
//! simultaneously in one forest per level ([`run_moat_growing`]); pruning
//! then decides at which level each vertex is served ([`prune`]), and every
//! surviving tree becomes a [`LargeTree`] served by its root's vehicle
//! ([`assemble_large_trees`]).
//!
//! Levels are 0-based here: level 0 is the fastest.

mod growth;
mod prune;
mod verify;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::geometry::{KdTree, Point};
use crate::instance::{Instance, LevelPartition};
use crate::trees::{Forest, Node};

pub use growth::{remaining_potential, run_moat_growing, Component, ComponentState, Event, EventKind, GrowthState, LevelState};
pub use prune::{assemble_large_trees, assembled_objective, prune, Connector, LargeTree, PrunedForests, PrunedTree};
pub use verify::{verify_dual, VerificationReport};

/// Relative tolerance for dual feasibility and event ties.
pub const TOL: f64 = 1e-9;

#[inline]
pub(crate) fn tol(scale: f64) -> f64 {
    TOL * scale.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgVertex {
    /// Depot index of the underlying original tree.
    pub depot: usize,
    pub level: usize,
    pub weight: f64,
    /// Requests of the underlying tree.
    pub requests: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelGraph {
    /// Speed of each level, strictly decreasing.
    pub speeds: Vec<f64>,
    /// Sorted by depot index, hence by non-increasing speed.
    pub vertices: Vec<LgVertex>,
    /// Row-major `n × n` matrix of ℓ(u, v).
    pub ell: Vec<f64>,
    /// Node pair realizing ℓ(u, v) for `u < v`, stored at `[u * n + v]`;
    /// `None` for graphs built without geometry.
    pub pairs: Vec<Option<(Node, Node)>>,
}

impl LevelGraph {
    /// A graph given directly by levels, weights and an edge-length matrix.
    pub fn from_matrix(levels: Vec<usize>, weights: Vec<f64>, speeds: Vec<f64>, ell: Vec<f64>) -> crate::Result<Self> {
        let n = levels.len();
        if weights.len() != n || ell.len() != n * n {
            return Err(crate::Error::InvalidParam("inconsistent level graph sizes".into()));
        }
        if levels.iter().any(|&l| l >= speeds.len()) {
            return Err(crate::Error::InvalidParam("vertex level out of range".into()));
        }
        if speeds.windows(2).any(|w| w[0] <= w[1]) || speeds.iter().any(|&s| !(s > 0.0)) {
            return Err(crate::Error::InvalidParam("level speeds must be positive and strictly decreasing".into()));
        }
        if levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(crate::Error::InvalidParam("vertices must be sorted by level".into()));
        }
        let vertices = levels
            .into_iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (level, weight))| LgVertex { depot: i, level, weight, requests: Vec::new() })
            .collect();
        Ok(LevelGraph { speeds, vertices, ell, pairs: vec![None; n * n] })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn h(&self) -> usize {
        self.speeds.len()
    }

    #[inline]
    pub fn ell(&self, u: usize, v: usize) -> f64 {
        self.ell[u * self.n() + v]
    }

    pub fn pair(&self, u: usize, v: usize) -> Option<(Node, Node)> {
        let n = self.n();
        if u < v {
            self.pairs[u * n + v]
        } else {
            self.pairs[v * n + u].map(|(a, b)| (b, a))
        }
    }

    /// ℓ(e)/p_l.
    #[inline]
    pub fn cost(&self, level: usize, u: usize, v: usize) -> f64 {
        self.ell(u, v) / self.speeds[level]
    }

    /// Penalty of serving `v` at level `l + 1` instead of `l`.
    #[inline]
    pub fn penalty(&self, level: usize, v: usize) -> f64 {
        let w = self.vertices[v].weight;
        w / self.speeds[level + 1] - w / self.speeds[level]
    }

    /// π_l(U).
    pub fn penalty_of(&self, level: usize, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.penalty(level, v)).sum()
    }

    /// Number of vertices per level.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.h()];
        for v in &self.vertices {
            sizes[v.level] += 1;
        }
        sizes
    }

    /// Σ_{l ∈ 1..=limit} |V_l|·(2l − 1) with 1-based levels.
    pub fn iteration_bound(&self, limit: usize) -> usize {
        self.level_sizes()
            .iter()
            .enumerate()
            .take(limit)
            .map(|(l, &s)| s * (2 * l + 1))
            .sum()
    }
}

/// One vertex per used depot; its original tree may be empty, in which case
/// the vertex is the depot alone with weight 0.
pub fn build_level_graph(forest: &Forest, levels: &LevelPartition, inst: &Instance) -> LevelGraph {
    let mut vertices = Vec::new();
    let mut node_sets: Vec<Vec<Node>> = Vec::new();
    for (j, tree) in forest.trees.iter().enumerate() {
        let Some(level) = levels.level_of[j] else {
            debug_assert!(tree.is_empty(), "unused depot {j} owns requests");
            continue;
        };
        vertices.push(LgVertex { depot: j, level, weight: tree.weight, requests: tree.requests.clone() });
        let mut nodes = tree.nodes.clone();
        nodes.sort_unstable();
        node_sets.push(nodes);
    }
    let n = vertices.len();
    let points: Vec<Vec<Point>> = node_sets.iter().map(|s| s.iter().map(|x| x.point(inst)).collect()).collect();
    let kds: Vec<KdTree> = points.iter().map(|p| KdTree::new(p)).collect();
    let mut ell = vec![0.0; n * n];
    let mut pairs = vec![None; n * n];
    for u in 0..n {
        for v in u + 1..n {
            // query the larger tree with the nodes of the smaller one
            let (small, large, swap) = if points[u].len() <= points[v].len() { (u, v, false) } else { (v, u, true) };
            let mut best = (f64::INFINITY, (Node::Depot(usize::MAX), Node::Depot(usize::MAX)));
            for (a, &p) in points[small].iter().enumerate() {
                let (b, d) = kds[large].nearest(p).unwrap();
                let pair = if swap {
                    (node_sets[large][b], node_sets[small][a])
                } else {
                    (node_sets[small][a], node_sets[large][b])
                };
                if d < best.0 || (d == best.0 && pair < best.1) {
                    best = (d, pair);
                }
            }
            ell[u * n + v] = best.0;
            ell[v * n + u] = best.0;
            pairs[u * n + v] = Some(best.1);
        }
    }
    LevelGraph { speeds: levels.speeds.clone(), vertices, ell, pairs }
}

/// Writes the event log as JSON lines.
pub fn events_to_jsonl(state: &GrowthState) -> crate::Result<String> {
    let mut out = String::new();
    for e in &state.events {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn events_from_jsonl(text: &str) -> crate::Result<Vec<Event>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

/// Convenience: level graph, moat growing, pruning and assembly.
pub fn combine(g: &LevelGraph) -> crate::Result<(GrowthState, Vec<LargeTree>)> {
    let state = run_moat_growing(g)?;
    let pruned = prune(&state, g);
    let trees = assemble_large_trees(&pruned, g);
    Ok((state, trees))
}

/// Random level graph on `n` vertices spread over `h` levels. Each vertex
/// is a small cloud of points and ℓ is the closest pair between clouds.
pub fn random_level_graph(n: usize, h: usize, seed: u64) -> LevelGraph {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut levels: Vec<usize> = (0..n).map(|_| rng.random_range(0..h)).collect();
    levels.sort_unstable();
    let clouds: Vec<Vec<Point>> = (0..n)
        .map(|_| {
            let c = rng.random_range(1..=3);
            (0..c).map(|_| Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect()
        })
        .collect();
    let mut ell = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            if u != v {
                ell[u * n + v] = clouds[u]
                    .iter()
                    .flat_map(|a| clouds[v].iter().map(move |b| a.dist(*b)))
                    .fold(f64::INFINITY, f64::min);
            }
        }
    }
    let weights = (0..n).map(|_| rng.random_range(0.0..200.0)).collect();
    let decay: f64 = rng.random_range(1.5..6.0);
    let speeds = (0..h).map(|l| decay.powi(-(l as i32))).collect();
    LevelGraph::from_matrix(levels, weights, speeds, ell).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{level_partition, Depot, Request};
    use crate::trees::build_trees_mst;
    use serde_json::Map;

    #[test]
    fn ell_is_min_node_distance() {
        let inst = Instance::new(
            vec![
                Depot { id: 0, location: Point::new(0.0, 0.0), speed: 2.0 },
                Depot { id: 1, location: Point::new(10.0, 10.0), speed: 1.0 },
            ],
            vec![Request { id: 0, source: Point::new(9.0, 9.0), target: Point::new(3.0, 4.0) }],
            Map::new(),
        )
        .unwrap();
        let f = build_trees_mst(&inst);
        assert_eq!(f.coverage, vec![1]);
        let g = build_level_graph(&f, &level_partition(&inst), &inst);
        assert_eq!(g.n(), 2);
        assert_eq!(g.ell(0, 1), 5.0);
        assert_eq!(g.pair(0, 1), Some((Node::Depot(0), Node::Target(0))));
        assert_eq!(g.pair(1, 0), Some((Node::Target(0), Node::Depot(0))));
        assert_eq!(g.vertices[0].weight, 0.0);
    }

    #[test]
    fn penalty_formula() {
        let g = LevelGraph::from_matrix(vec![0, 1], vec![0.0, 10.0], vec![2.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.penalty(0, 1), 5.0);
        assert_eq!(g.cost(0, 0, 1), 0.5);
        assert_eq!(g.iteration_bound(2), 1 + 3);
        assert_eq!(g.iteration_bound(1), 1);
    }

    #[test]
    fn coincident_nodes_give_zero_length() {
        let inst = Instance::new(
            vec![
                Depot { id: 0, location: Point::new(0.0, 0.0), speed: 2.0 },
                Depot { id: 1, location: Point::new(5.0, 0.0), speed: 1.0 },
            ],
            vec![Request { id: 0, source: Point::new(4.0, 0.0), target: Point::new(0.0, 0.0) }],
            Map::new(),
        )
        .unwrap();
        let f = build_trees_mst(&inst);
        let g = build_level_graph(&f, &level_partition(&inst), &inst);
        assert_eq!(g.ell(0, 1), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn combination_is_certified_and_within_twice_optimum(n in 1usize..=8, h in 1usize..=3, seed in 0u64..u64::MAX) {
            let g = random_level_graph(n, h, seed);
            let (s, trees) = combine(&g).unwrap();
            proptest::prop_assert!(s.nested_ok);
            let report = verify_dual(&s, &g, &trees);
            proptest::prop_assert!(report.passed(), "{:?}", report.failures);
            let fixed: f64 = g.vertices.iter().map(|v| v.weight).sum::<f64>() / g.speeds[0];
            let obj = assembled_objective(&trees, &g);
            proptest::prop_assert!((obj - fixed - report.primal).abs() <= 1e-9 * obj.max(1.0));
            let opt = crate::oracle::brute_force_tree_combination(&g, crate::oracle::OracleBudget::default()).unwrap();
            proptest::prop_assert!(obj <= 2.0 * opt * (1.0 + 1e-9), "obj {} opt {}", obj, opt);
            proptest::prop_assert!(opt <= obj * (1.0 + 1e-9));
        }
    }
}
