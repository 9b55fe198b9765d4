//! Routes, solutions and the solvers that produce them.

mod build;
pub mod preemptive;
mod solve;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::geometry::Point;
use crate::instance::Instance;

pub use build::{cheapest_insertion, route_cheapest_insertion, route_dfs, route_dfs_detailed, route_dgreedy, DfsInfo};
pub use preemptive::{preemptive_to_nonpreemptive, random_preemptive, DroneSchedule, PreemptiveSchedule, Triple};
pub use solve::{
    solve_baseline, solve_pd, solve_pd_detailed, solve_single_depot, PdOptions, PdRun, Router, StageTimes, TreeVariant,
};

/// Relative tolerance when comparing stored and recomputed costs.
pub const COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub depot_id: usize,
    /// Request ids in serving order.
    pub order: Vec<usize>,
    pub length: f64,
    pub cost: f64,
}

/// Length of serving requests (by index) in order from `start`.
pub fn order_length(inst: &Instance, start: Point, order: &[usize]) -> f64 {
    let mut at = start;
    let mut len = 0.0;
    for &i in order {
        let r = &inst.requests[i];
        len += at.dist(r.source) + r.length();
        at = r.target;
    }
    len
}

impl Route {
    /// Builds a route for depot index `depot` serving request indices `order`.
    pub fn from_indices(inst: &Instance, depot: usize, order: &[usize]) -> Route {
        let d = &inst.depots[depot];
        let length = order_length(inst, d.location, order);
        Route {
            depot_id: d.id,
            order: order.iter().map(|&i| inst.requests[i].id).collect(),
            length,
            cost: length / d.speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub algorithm: String,
    pub params: Value,
    pub total_cost: f64,
    pub routes: Vec<Route>,
}

impl Solution {
    /// Drops empty routes, sorts by depot rank and sums the costs.
    pub fn new(inst: &Instance, algorithm: impl Into<String>, params: Value, mut routes: Vec<Route>) -> Solution {
        routes.retain(|r| !r.order.is_empty());
        let rank: HashMap<usize, usize> = inst.depots.iter().enumerate().map(|(j, d)| (d.id, j)).collect();
        routes.sort_by_key(|r| rank.get(&r.depot_id).copied().unwrap_or(usize::MAX));
        let total_cost = routes.iter().map(|r| r.cost).sum();
        Solution { algorithm: algorithm.into(), params, total_cost, routes }
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub total_cost: f64,
    pub feasible: bool,
    pub violations: Vec<String>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Recomputes every route from coordinates and checks coverage and the
/// stored numbers.
pub fn evaluate(sol: &Solution, inst: &Instance) -> Evaluation {
    let mut violations = Vec::new();
    let depot_of: HashMap<usize, usize> = inst.depots.iter().enumerate().map(|(j, d)| (d.id, j)).collect();
    let req_of: HashMap<usize, usize> = inst.requests.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
    let mut served = vec![0usize; inst.m()];
    let mut depot_used = vec![false; inst.k()];
    let mut total = 0.0;
    for route in &sol.routes {
        let Some(&j) = depot_of.get(&route.depot_id) else {
            violations.push(format!("unknown depot id {}", route.depot_id));
            continue;
        };
        if std::mem::replace(&mut depot_used[j], true) {
            violations.push(format!("depot {} has more than one route", route.depot_id));
        }
        let mut idx = Vec::with_capacity(route.order.len());
        for id in &route.order {
            match req_of.get(id) {
                Some(&i) => {
                    served[i] += 1;
                    idx.push(i);
                }
                None => violations.push(format!("unknown request id {id}")),
            }
        }
        let length = order_length(inst, inst.depots[j].location, &idx);
        let cost = length / inst.depots[j].speed;
        if !close(length, route.length) {
            violations.push(format!("route of depot {}: length {} recomputes to {length}", route.depot_id, route.length));
        }
        if !close(cost, route.cost) {
            violations.push(format!("route of depot {}: cost {} recomputes to {cost}", route.depot_id, route.cost));
        }
        total += cost;
    }
    for (i, &c) in served.iter().enumerate() {
        match c {
            1 => {}
            0 => violations.push(format!("request {} not served", inst.requests[i].id)),
            _ => violations.push(format!("request {} served {c} times", inst.requests[i].id)),
        }
    }
    if !close(total, sol.total_cost) {
        violations.push(format!("total cost {} recomputes to {total}", sol.total_cost));
    }
    Evaluation { total_cost: total, feasible: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Depot, Request};
    use serde_json::{json, Map};

    fn inst() -> Instance {
        Instance::new(
            vec![Depot { id: 0, location: Point::new(0.0, 0.0), speed: 2.0 }],
            vec![
                Request { id: 0, source: Point::new(3.0, 0.0), target: Point::new(3.0, 4.0) },
                Request { id: 1, source: Point::new(3.0, 4.0), target: Point::new(0.0, 4.0) },
            ],
            Map::new(),
        )
        .unwrap()
    }

    #[test]
    fn evaluates_route_cost() {
        let i = inst();
        let sol = Solution::new(&i, "manual", json!({}), vec![Route::from_indices(&i, 0, &[0, 1])]);
        let e = evaluate(&sol, &i);
        assert!(e.feasible, "{:?}", e.violations);
        assert_eq!(e.total_cost, (3.0 + 4.0 + 0.0 + 3.0) / 2.0);
    }

    #[test]
    fn empty_solution_without_requests() {
        let mut i = inst();
        i.requests.clear();
        let sol = Solution::new(&i, "manual", json!({}), vec![]);
        let e = evaluate(&sol, &i);
        assert!(e.feasible);
        assert_eq!(e.total_cost, 0.0);
    }

    #[test]
    fn detects_coverage_and_cost_errors() {
        let i = inst();
        let mut sol = Solution::new(&i, "manual", json!({}), vec![Route::from_indices(&i, 0, &[0, 1])]);
        sol.routes[0].order = vec![0, 0];
        let e = evaluate(&sol, &i);
        assert!(!e.feasible);
        assert!(e.violations.iter().any(|v| v.contains("served 2 times")));
        assert!(e.violations.iter().any(|v| v.contains("not served")));

        let mut sol = Solution::new(&i, "manual", json!({}), vec![Route::from_indices(&i, 0, &[0, 1])]);
        sol.total_cost += 1.0;
        assert!(!evaluate(&sol, &i).feasible);
    }

    #[test]
    fn solution_json_round_trip() {
        let i = inst();
        let sol = Solution::new(&i, "manual", json!({"x": 1}), vec![Route::from_indices(&i, 0, &[1, 0])]);
        let text = sol.to_json().unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        for key in ["algorithm", "params", "total_cost", "routes"] {
            assert!(v.get(key).is_some());
        }
        assert_eq!(Solution::from_json(&text).unwrap(), sol);
    }
}
