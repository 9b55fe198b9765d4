use std::collections::HashMap;

use super::Route;
use crate::geometry::Point;
use crate::instance::Instance;
use crate::primal_dual::{LargeTree, LevelGraph};
use crate::trees::{Forest, Node};

/// Something to be traversed from `s` to `t` at internal length `inner`.
#[derive(Debug, Clone, Copy)]
struct Item {
    s: Point,
    t: Point,
    inner: f64,
}

/// Route under cheapest insertion. `legs[p]` caches the length of the leg
/// arriving at stop `p`'s pickup.
#[derive(Debug, Clone)]
pub(crate) struct InsertionRoute {
    start: Point,
    stops: Vec<(Point, Point)>,
    legs: Vec<f64>,
    pub(crate) ids: Vec<usize>,
}

impl InsertionRoute {
    pub(crate) fn new(start: Point) -> Self {
        InsertionRoute { start, stops: Vec::new(), legs: Vec::new(), ids: Vec::new() }
    }

    /// Least length increase of serving `s` to `t` and its position; ties go
    /// to the earliest position.
    pub(crate) fn best(&self, s: Point, t: Point, inner: f64) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0usize);
        let mut prev = self.start;
        for (p, &(ns, nt)) in self.stops.iter().enumerate() {
            let inc = prev.dist(s) + inner + t.dist(ns) - self.legs[p];
            if inc < best.0 {
                best = (inc, p);
            }
            prev = nt;
        }
        let inc = prev.dist(s) + inner;
        if inc < best.0 {
            best = (inc, self.stops.len());
        }
        best
    }

    pub(crate) fn insert(&mut self, p: usize, s: Point, t: Point, id: usize) {
        let prev = if p == 0 { self.start } else { self.stops[p - 1].1 };
        if p < self.stops.len() {
            self.legs[p] = t.dist(self.stops[p].0);
        }
        self.stops.insert(p, (s, t));
        self.legs.insert(p, prev.dist(s));
        self.ids.insert(p, id);
    }
}

/// Inserts items one by one, in the given order, at the position of least
/// length increase. Returns item indices in route order.
fn insert_items(start: Point, items: &[Item], seed: &[usize]) -> Vec<usize> {
    let mut route = InsertionRoute::new(start);
    for &x in seed {
        let it = items[x];
        let (_, p) = route.best(it.s, it.t, it.inner);
        route.insert(p, it.s, it.t, x);
    }
    route.ids
}

fn request_items(inst: &Instance, reqs: &[usize]) -> Vec<Item> {
    reqs.iter()
        .map(|&i| {
            let r = &inst.requests[i];
            Item { s: r.source, t: r.target, inner: r.length() }
        })
        .collect()
}

/// Cheapest insertion of request indices `seed_order` starting from `start`.
pub fn cheapest_insertion(inst: &Instance, start: Point, seed_order: &[usize]) -> Vec<usize> {
    let items = request_items(inst, seed_order);
    let seq: Vec<usize> = (0..items.len()).collect();
    insert_items(start, &items, &seq).into_iter().map(|k| seed_order[k]).collect()
}

/// Route of depot index `depot` built by cheapest insertion.
pub fn route_cheapest_insertion(inst: &Instance, depot: usize, seed_order: &[usize]) -> Route {
    let order = cheapest_insertion(inst, inst.depots[depot].location, seed_order);
    Route::from_indices(inst, depot, &order)
}

/// Two stages: each member's requests are ordered by cheapest insertion from
/// the member's own depot, then the member paths are inserted as blocks,
/// starting from the root member's path, into one route of the root depot.
pub fn route_dgreedy(tree: &LargeTree, g: &LevelGraph, inst: &Instance) -> Route {
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for &v in &tree.members {
        let vert = &g.vertices[v];
        if vert.requests.is_empty() {
            continue;
        }
        paths.push(cheapest_insertion(inst, inst.depots[vert.depot].location, &vert.requests));
    }
    let blocks: Vec<Item> = paths
        .iter()
        .map(|p| {
            let first = &inst.requests[p[0]];
            let last = &inst.requests[*p.last().unwrap()];
            let inner = super::order_length(inst, first.source, p);
            Item { s: first.source, t: last.target, inner }
        })
        .collect();
    let seq: Vec<usize> = (0..blocks.len()).collect();
    let order: Vec<usize> = insert_items(inst.depots[tree.root_depot].location, &blocks, &seq)
        .into_iter()
        .flat_map(|b| paths[b].iter().copied())
        .collect();
    Route::from_indices(inst, tree.root_depot, &order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfsInfo {
    /// Member tree weights plus connectors.
    pub tree_length: f64,
    /// Σ d(s, t) over requests whose target the traversal reached before
    /// their source.
    pub early_targets: f64,
}

impl DfsInfo {
    /// Shortcutting bound for the traversal: 2·tree_length + 2·early_targets.
    pub fn bound(&self) -> f64 {
        2.0 * self.tree_length + 2.0 * self.early_targets
    }
}

pub fn route_dfs(tree: &LargeTree, g: &LevelGraph, forest: &Forest, inst: &Instance) -> Route {
    route_dfs_detailed(tree, g, forest, inst).0
}

/// Depth-first traversal of the large tree (member trees plus connectors)
/// from the root depot. Requests are served in the order their sources are
/// first reached. Children are visited with a source's own target first,
/// then by ascending node.
pub fn route_dfs_detailed(tree: &LargeTree, g: &LevelGraph, forest: &Forest, inst: &Instance) -> (Route, DfsInfo) {
    let mut adj: HashMap<Node, Vec<Node>> = HashMap::new();
    let mut tree_length = 0.0;
    let mut link = |a: Node, b: Node| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for &v in &tree.members {
        let t = &forest.trees[g.vertices[v].depot];
        for e in &t.edges {
            link(e.a, e.b);
            tree_length += e.len;
        }
    }
    for c in &tree.connectors {
        let (a, b) = c.nodes.expect("geometric level graph");
        link(a, b);
        tree_length += c.len;
    }
    for list in adj.values_mut() {
        list.sort_unstable();
        list.dedup();
    }

    let root = Node::Depot(tree.root_depot);
    let mut order = Vec::new();
    let mut seen_target = vec![false; inst.m()];
    let mut early_targets = 0.0;
    let mut visited: HashMap<Node, ()> = HashMap::new();
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        if visited.insert(x, ()).is_some() {
            continue;
        }
        match x {
            Node::Source(i) => {
                order.push(i);
                if seen_target[i] {
                    early_targets += inst.requests[i].length();
                }
            }
            Node::Target(i) => seen_target[i] = true,
            Node::Depot(_) => {}
        }
        let Some(children) = adj.get(&x) else { continue };
        // Push in reverse so the first child is visited first.
        let own = match x {
            Node::Source(i) => Some(Node::Target(i)),
            _ => None,
        };
        for &c in children.iter().rev() {
            if Some(c) != own && !visited.contains_key(&c) {
                stack.push(c);
            }
        }
        if let Some(t) = own {
            if children.contains(&t) && !visited.contains_key(&t) {
                stack.push(t);
            }
        }
    }
    let route = Route::from_indices(inst, tree.root_depot, &order);
    (route, DfsInfo { tree_length, early_targets })
}
