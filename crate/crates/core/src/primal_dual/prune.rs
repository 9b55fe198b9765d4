use serde::{Deserialize, Serialize};

use super::{GrowthState, LevelGraph};
use crate::trees::Node;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedTree {
    pub level: usize,
    /// The unique vertex of `level` in the tree.
    pub root: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedForests {
    pub trees: Vec<PrunedTree>,
    /// Level at which each vertex ends up being served.
    pub served_at: Vec<usize>,
    /// U_l: vertices still unserved after level l, for every growing level.
    pub penalty_sets: Vec<Vec<usize>>,
}

/// Decides, level by level, which vertices are served by which root.
///
/// At level l the forest built by the moat growing is restricted to the
/// vertices not yet served. Trees without a level-l vertex are left for the
/// next level. From every rooted tree, maximal frozen sets that avoid the
/// root and hang off the rest by a single forest edge are cut away (again and
/// again, until none is left); what is cut also moves on to the next level.
/// At the slowest level every remaining vertex is its own tree.
pub fn prune(state: &GrowthState, g: &LevelGraph) -> PrunedForests {
    let n = g.n();
    let h = g.h();
    let mut remaining = vec![true; n];
    let mut served_at = vec![usize::MAX; n];
    let mut trees = Vec::new();
    let mut penalty_sets = Vec::new();

    for l in 0..h {
        let Some(ls) = state.levels.get(l) else {
            for x in 0..n {
                if remaining[x] {
                    remaining[x] = false;
                    served_at[x] = l;
                    trees.push(PrunedTree { level: l, root: x, vertices: vec![x], edges: Vec::new() });
                }
            }
            break;
        };
        let edges: Vec<(usize, usize)> =
            ls.forest.iter().copied().filter(|&(u, v)| remaining[u] && remaining[v]).collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let frozen: Vec<&Vec<usize>> = ls.comps.iter().filter(|c| c.froze).map(|c| &c.vertices).collect();

        let mut seen = vec![false; n];
        for start in 0..n {
            if !remaining[start] || !ls.present[start] || seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                for &y in &adj[comp[i]] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
                i += 1;
            }
            let Some(&root) = comp.iter().find(|&&x| g.vertices[x].level == l) else {
                continue;
            };
            let mut in_tree = vec![false; n];
            for &x in &comp {
                in_tree[x] = true;
            }
            loop {
                let cut = frozen
                    .iter()
                    .filter(|set| set.iter().all(|&x| in_tree[x]) && !set.contains(&root))
                    .filter(|set| {
                        let degree = edges
                            .iter()
                            .filter(|&&(u, v)| in_tree[u] && in_tree[v] && set.contains(&u) != set.contains(&v))
                            .count();
                        degree == 1
                    })
                    .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])));
                let Some(cut) = cut else { break };
                for &x in cut.iter() {
                    in_tree[x] = false;
                }
            }
            let mut vertices: Vec<usize> = comp.into_iter().filter(|&x| in_tree[x]).collect();
            vertices.sort_unstable();
            for &x in &vertices {
                remaining[x] = false;
                served_at[x] = l;
            }
            let tree_edges = edges.iter().copied().filter(|&(u, v)| in_tree[u] && in_tree[v]).collect();
            trees.push(PrunedTree { level: l, root, vertices, edges: tree_edges });
        }
        if l + 1 < h {
            penalty_sets.push((0..n).filter(|&x| remaining[x]).collect());
        }
    }
    trees.sort_by_key(|t| t.root);
    PrunedForests { trees, served_at, penalty_sets }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub u: usize,
    pub v: usize,
    pub len: f64,
    /// Concrete nodes realizing the length, the first in `u`'s tree.
    pub nodes: Option<(Node, Node)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeTree {
    pub level: usize,
    pub speed: f64,
    /// Root vertex in the level graph and its depot.
    pub root: usize,
    pub root_depot: usize,
    /// Member vertices in breadth-first order from the root, neighbours by
    /// ascending id; the root comes first.
    pub members: Vec<usize>,
    pub connectors: Vec<Connector>,
}

impl LargeTree {
    /// Connector length plus member weights.
    pub fn length(&self, g: &LevelGraph) -> f64 {
        self.connectors.iter().map(|c| c.len).sum::<f64>()
            + self.members.iter().map(|&v| g.vertices[v].weight).sum::<f64>()
    }

    pub fn objective(&self, g: &LevelGraph) -> f64 {
        self.length(g) / self.speed
    }

    /// Requests of all members, member by member.
    pub fn requests(&self, g: &LevelGraph) -> Vec<usize> {
        self.members.iter().flat_map(|&v| g.vertices[v].requests.iter().copied()).collect()
    }
}

pub fn assemble_large_trees(pruned: &PrunedForests, g: &LevelGraph) -> Vec<LargeTree> {
    pruned
        .trees
        .iter()
        .map(|t| {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
            for &(u, v) in &t.edges {
                adj[u].push(v);
                adj[v].push(u);
            }
            let mut members = vec![t.root];
            let mut connectors = Vec::new();
            let mut seen = vec![false; g.n()];
            seen[t.root] = true;
            let mut i = 0;
            while i < members.len() {
                let u = members[i];
                adj[u].sort_unstable();
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        members.push(v);
                        connectors.push(Connector { u, v, len: g.ell(u, v), nodes: g.pair(u, v) });
                    }
                }
                i += 1;
            }
            LargeTree {
                level: t.level,
                speed: g.speeds[t.level],
                root: t.root,
                root_depot: g.vertices[t.root].depot,
                members,
                connectors,
            }
        })
        .collect()
}

/// Σ over large trees of (connectors + member weights) / root speed.
pub fn assembled_objective(trees: &[LargeTree], g: &LevelGraph) -> f64 {
    trees.iter().map(|t| t.objective(g)).sum()
}
