use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::build::{cheapest_insertion, InsertionRoute, route_dfs_detailed, route_dgreedy, DfsInfo};
use super::{Route, Solution};
use crate::error::{Error, Result};
use crate::geometry::{euclidean_mst, Point};
use crate::instance::{level_partition, Instance};
use crate::primal_dual::{assemble_large_trees, build_level_graph, prune, run_moat_growing, GrowthState, LargeTree, LevelGraph};
use crate::trees::{build_trees_mst, build_trees_prim, Forest, DEFAULT_MST_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeVariant {
    Mst,
    Prim,
    PrimMstK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Router {
    Dfs,
    Greedy,
    DGreedy,
}

impl TreeVariant {
    pub const ALL: [TreeVariant; 3] = [TreeVariant::Mst, TreeVariant::Prim, TreeVariant::PrimMstK];

    pub fn as_str(self) -> &'static str {
        match self {
            TreeVariant::Mst => "mst",
            TreeVariant::Prim => "prim",
            TreeVariant::PrimMstK => "prim-mst-k",
        }
    }
}

impl Router {
    pub const ALL: [Router; 3] = [Router::Dfs, Router::Greedy, Router::DGreedy];

    pub fn as_str(self) -> &'static str {
        match self {
            Router::Dfs => "dfs",
            Router::Greedy => "greedy",
            Router::DGreedy => "dgreedy",
        }
    }
}

impl fmt::Display for TreeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Router {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TreeVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mst" => Ok(TreeVariant::Mst),
            "prim" => Ok(TreeVariant::Prim),
            "prim-mst-k" | "prim-mst-7" => Ok(TreeVariant::PrimMstK),
            _ => Err(Error::InvalidParam(format!("unknown tree variant {s:?}"))),
        }
    }
}

impl FromStr for Router {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dfs" => Ok(Router::Dfs),
            "greedy" => Ok(Router::Greedy),
            "dgreedy" => Ok(Router::DGreedy),
            _ => Err(Error::InvalidParam(format!("unknown router {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdOptions {
    pub tree: TreeVariant,
    pub router: Router,
    /// Guard factor for [`TreeVariant::PrimMstK`].
    pub mst_k: f64,
}

impl Default for PdOptions {
    fn default() -> Self {
        PdOptions { tree: TreeVariant::Mst, router: Router::Dfs, mst_k: DEFAULT_MST_K }
    }
}

impl PdOptions {
    pub fn new(tree: TreeVariant, router: Router) -> Self {
        PdOptions { tree, router, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub tree_s: f64,
    pub pd_s: f64,
    pub route_s: f64,
    pub total_s: f64,
}

/// Everything produced along the way by [`solve_pd_detailed`].
#[derive(Debug, Clone)]
pub struct PdRun {
    pub solution: Solution,
    pub forest: Forest,
    pub graph: LevelGraph,
    pub state: GrowthState,
    pub large_trees: Vec<LargeTree>,
    /// Per routed large tree, for the DFS router only.
    pub dfs: Vec<(Route, DfsInfo)>,
    pub times: StageTimes,
}

pub fn solve_pd(inst: &Instance, opts: PdOptions) -> Result<Solution> {
    solve_pd_detailed(inst, opts).map(|r| r.solution)
}

/// Trees, level graph, moat growing, pruning, large trees, then one route
/// per large tree that holds requests.
pub fn solve_pd_detailed(inst: &Instance, opts: PdOptions) -> Result<PdRun> {
    if opts.tree == TreeVariant::PrimMstK && !(opts.mst_k >= 1.0 && opts.mst_k.is_finite()) {
        return Err(Error::InvalidParam(format!("mst_k must be at least 1, got {}", opts.mst_k)));
    }
    let t0 = Instant::now();
    let forest = match opts.tree {
        TreeVariant::Mst => build_trees_mst(inst),
        TreeVariant::Prim => build_trees_prim(inst, None),
        TreeVariant::PrimMstK => build_trees_prim(inst, Some(opts.mst_k)),
    };
    let t1 = Instant::now();
    let levels = level_partition(inst);
    let graph = build_level_graph(&forest, &levels, inst);
    let state = run_moat_growing(&graph)?;
    let pruned = prune(&state, &graph);
    let large_trees = assemble_large_trees(&pruned, &graph);
    let t2 = Instant::now();

    let mut routes = Vec::new();
    let mut dfs = Vec::new();
    for tree in &large_trees {
        let mut requests = tree.requests(&graph);
        if requests.is_empty() {
            continue;
        }
        let route = match opts.router {
            Router::Dfs => {
                let (route, info) = route_dfs_detailed(tree, &graph, &forest, inst);
                dfs.push((route.clone(), info));
                route
            }
            Router::Greedy => {
                // input order, as the baseline
                requests.sort_unstable();
                let order = cheapest_insertion(inst, inst.depots[tree.root_depot].location, &requests);
                Route::from_indices(inst, tree.root_depot, &order)
            }
            Router::DGreedy => route_dgreedy(tree, &graph, inst),
        };
        routes.push(route);
    }
    let t3 = Instant::now();
    let mut params = json!({"tree": opts.tree, "router": opts.router});
    if opts.tree == TreeVariant::PrimMstK {
        params["mst_k"] = json!(opts.mst_k);
    }
    let solution = Solution::new(inst, format!("pd-{}", opts.router), params, routes);
    let times = StageTimes {
        tree_s: (t1 - t0).as_secs_f64(),
        pd_s: (t2 - t1).as_secs_f64(),
        route_s: (t3 - t2).as_secs_f64(),
        total_s: (t3 - t0).as_secs_f64(),
    };
    Ok(PdRun { solution, forest, graph, state, large_trees, dfs, times })
}

/// Requests in input order, each placed at the vehicle and position with the
/// smallest increase in that vehicle's travel time.
pub fn solve_baseline(inst: &Instance) -> Solution {
    let mut routes: Vec<InsertionRoute> = inst.depots.iter().map(|d| InsertionRoute::new(d.location)).collect();
    for (i, r) in inst.requests.iter().enumerate() {
        let inner = r.length();
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for (j, d) in inst.depots.iter().enumerate() {
            let (inc, p) = routes[j].best(r.source, r.target, inner);
            let time = inc / d.speed;
            if time < best.0 {
                best = (time, j, p);
            }
        }
        routes[best.1].insert(best.2, r.source, r.target, i);
    }
    let routes = routes.iter().enumerate().map(|(j, o)| Route::from_indices(inst, j, &o.ids)).collect();
    Solution::new(inst, "baseline", json!({"order": "input"}), routes)
}

/// Fastest vehicle only: serve requests in depth-first preorder of the MST
/// over the depot and the sources. Requires co-located depots.
pub fn solve_single_depot(inst: &Instance) -> Result<Solution> {
    if !inst.depots_colocated() {
        return Err(Error::InvalidParam("depots are not co-located".into()));
    }
    let depot = inst.depots[0].location;
    let mut pts: Vec<Point> = vec![depot];
    pts.extend(inst.requests.iter().map(|r| r.source));
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); pts.len()];
    for e in euclidean_mst(&pts)? {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut order = Vec::with_capacity(inst.m());
    let mut seen = vec![false; pts.len()];
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        if std::mem::replace(&mut seen[x], true) {
            continue;
        }
        if x > 0 {
            order.push(x - 1);
        }
        adj[x].sort_unstable();
        for &y in adj[x].iter().rev() {
            if !seen[y] {
                stack.push(y);
            }
        }
    }
    let route = Route::from_indices(inst, 0, &order);
    Ok(Solution::new(inst, "single-depot", json!({}), vec![route]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_uniform, gen_worst_case, Depot, Request};
    use crate::routing::evaluate;
    use serde_json::Map;

    fn inst(depots: &[(f64, f64, f64)], reqs: &[((f64, f64), (f64, f64))]) -> Instance {
        Instance::new(
            depots.iter().enumerate().map(|(id, &(x, y, s))| Depot { id, location: Point::new(x, y), speed: s }).collect(),
            reqs.iter().enumerate().map(|(id, &(s, t))| Request { id, source: s.into(), target: t.into() }).collect(),
            Map::new(),
        )
        .unwrap()
    }

    #[test]
    fn baseline_on_worst_case_is_n_squared() {
        for n in [1usize, 2, 7, 50] {
            let i = gen_worst_case(n, 1.0, 1000.0, 0.01).unwrap();
            let s = solve_baseline(&i);
            assert_eq!(s.total_cost, (n * n) as f64);
            assert_eq!(s.routes.len(), 1);
            assert_eq!(s.routes[0].depot_id, 0);
        }
    }

    #[test]
    fn baseline_without_requests() {
        let i = inst(&[(0.0, 0.0, 1.0)], &[]);
        let s = solve_baseline(&i);
        assert!(s.routes.is_empty());
        assert_eq!(s.total_cost, 0.0);
    }

    #[test]
    fn single_depot_checks_location() {
        let i = inst(&[(0.0, 0.0, 1.0), (1.0, 0.0, 1.0)], &[((1.0, 1.0), (2.0, 2.0))]);
        assert!(matches!(solve_single_depot(&i), Err(Error::InvalidParam(_))));
        let i = inst(&[(0.0, 0.0, 1.0), (0.0, 0.0, 2.0)], &[((3.0, 0.0), (3.0, 4.0))]);
        let s = solve_single_depot(&i).unwrap();
        assert_eq!(s.total_cost, 3.5);
        assert_eq!(s.routes[0].depot_id, 1);
    }

    #[test]
    fn pd_on_worst_case_uses_fast_vehicle() {
        let i = gen_worst_case(200, 1.0, 1000.0, 0.01).unwrap();
        let run = solve_pd_detailed(&i, PdOptions::default()).unwrap();
        assert_eq!(run.solution.routes.len(), 1);
        assert_eq!(run.solution.routes[0].depot_id, 1);
        assert!(evaluate(&run.solution, &i).feasible);
        assert!(solve_baseline(&i).total_cost / run.solution.total_cost > 30.0);
    }

    #[test]
    fn all_pipelines_are_feasible() {
        let i = gen_uniform(300, 6, 3, 5.0, 9).unwrap();
        for tree in TreeVariant::ALL {
            for router in Router::ALL {
                let s = solve_pd(&i, PdOptions::new(tree, router)).unwrap();
                let e = evaluate(&s, &i);
                assert!(e.feasible, "{tree} {router}: {:?}", e.violations);
            }
        }
    }

    #[test]
    fn greedy_with_one_depot_matches_baseline() {
        for seed in 0..5 {
            let i = gen_uniform(200, 1, 1, 5.0, seed).unwrap();
            let pd = solve_pd(&i, PdOptions { router: Router::Greedy, ..Default::default() }).unwrap();
            let base = solve_baseline(&i);
            assert_eq!(pd.routes[0].order, base.routes[0].order);
            assert_eq!(pd.total_cost, base.total_cost);
        }
    }

    #[test]
    fn dfs_can_exceed_twice_the_tree_when_a_target_comes_first() {
        // The fast empty depot joins the slow tree through a's target, so the
        // traversal reaches t_a before s_a and pays d(s_a, t_a) twice more.
        let i = inst(
            &[(0.0, 0.0, 10.0), (100.0, -1.0, 1.0)],
            &[((100.0, 0.0), (1.0, 0.0)), ((100.0, 1.0), (100.0, 2.0))],
        );
        let run = solve_pd_detailed(&i, PdOptions::default()).unwrap();
        assert_eq!(run.dfs.len(), 1);
        let (route, info) = &run.dfs[0];
        assert_eq!(route.depot_id, 0);
        assert!((info.tree_length - 103.0).abs() < 1e-9);
        assert!(route.length > 2.0 * info.tree_length);
        assert!(info.early_targets > 0.0);
        assert!(route.length <= info.bound());
    }

    #[test]
    fn names_parse() {
        for t in TreeVariant::ALL {
            assert_eq!(t.as_str().parse::<TreeVariant>().unwrap(), t);
        }
        for r in Router::ALL {
            assert_eq!(r.as_str().parse::<Router>().unwrap(), r);
        }
        assert!("x".parse::<Router>().is_err());
    }
}
