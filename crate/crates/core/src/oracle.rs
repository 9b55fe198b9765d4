//! Exhaustive solvers and simple lower bounds for small instances.

use crate::error::{Error, Result};
use crate::geometry::{euclidean_mst, Point};
use crate::instance::Instance;
use crate::primal_dual::LevelGraph;

/// Hard cap on enumerated states.
pub const STATE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_requests: usize,
    pub max_depots: usize,
    pub max_tc_vertices: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_requests: 5, max_depots: 3, max_tc_vertices: 8 }
    }
}

/// Length of serving `order` from `depot`.
fn route_length(inst: &Instance, depot: Point, order: &[usize]) -> f64 {
    let mut at = depot;
    let mut len = 0.0;
    for &i in order {
        let r = &inst.requests[i];
        len += at.dist(r.source) + r.length();
        at = r.target;
    }
    len
}

fn best_permutation(inst: &Instance, depot: Point, items: &mut Vec<usize>, k: usize, best: &mut f64) {
    if k == items.len() {
        *best = best.min(route_length(inst, depot, items));
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        best_permutation(inst, depot, items, k + 1, best);
        items.swap(k, i);
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Optimal non-preemptive cost: every assignment of requests to vehicles and
/// every serving order per vehicle.
pub fn brute_force_cd(inst: &Instance, budget: OracleBudget) -> Result<f64> {
    let (m, k) = (inst.m(), inst.k());
    if m > budget.max_requests || k > budget.max_depots {
        return Err(Error::BudgetExceeded(format!(
            "m={m}, k={k} exceeds budget {}/{}",
            budget.max_requests, budget.max_depots
        )));
    }
    let states = (k as u64) * (1u64 << m) * factorial(m) + (k as u64).pow(m as u32);
    if states > STATE_CAP {
        return Err(Error::BudgetExceeded(format!("{states} states")));
    }
    // best[j][mask]: cheapest time for vehicle j to serve exactly `mask`.
    let best: Vec<Vec<f64>> = inst
        .depots
        .iter()
        .map(|d| {
            (0..1usize << m)
                .map(|mask| {
                    let mut items: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
                    let mut b = f64::INFINITY;
                    best_permutation(inst, d.location, &mut items, 0, &mut b);
                    b / d.speed
                })
                .collect()
        })
        .collect();
    let mut optimum = f64::INFINITY;
    let mut assign = vec![0usize; m];
    loop {
        let mut masks = vec![0usize; k];
        for (i, &j) in assign.iter().enumerate() {
            masks[j] |= 1 << i;
        }
        let cost: f64 = masks.iter().enumerate().map(|(j, &mk)| best[j][mk]).sum();
        optimum = optimum.min(cost);
        // next assignment in base k
        let mut pos = 0;
        while pos < m {
            assign[pos] += 1;
            if assign[pos] < k {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
        if pos == m {
            break;
        }
    }
    Ok(optimum)
}

/// Cost of one group of the tree combination: minimum spanning tree over the
/// group under ℓ, plus member weights, divided by the fastest member speed.
fn group_cost(g: &LevelGraph, members: &[usize]) -> f64 {
    let mut in_tree = vec![false; members.len()];
    let mut dist = vec![f64::INFINITY; members.len()];
    let mut len = 0.0;
    if !members.is_empty() {
        dist[0] = 0.0;
    }
    for _ in 0..members.len() {
        let i = (0..members.len()).filter(|&i| !in_tree[i]).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
        in_tree[i] = true;
        len += dist[i];
        for j in 0..members.len() {
            if !in_tree[j] {
                dist[j] = dist[j].min(g.ell(members[i], members[j]));
            }
        }
    }
    let weight: f64 = members.iter().map(|&v| g.vertices[v].weight).sum();
    let level = members.iter().map(|&v| g.vertices[v].level).min().unwrap_or(0);
    (len + weight) / g.speeds[level]
}

/// Optimal tree combination and one optimal grouping, by enumerating set
/// partitions as restricted growth strings.
pub fn brute_force_tree_combination_detailed(g: &LevelGraph, budget: OracleBudget) -> Result<(f64, Vec<Vec<usize>>)> {
    let n = g.n();
    if n > budget.max_tc_vertices || n > 20 {
        return Err(Error::BudgetExceeded(format!("{n} vertices exceeds budget {}", budget.max_tc_vertices)));
    }
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let cost: Vec<f64> = (0..1usize << n)
        .map(|mask| group_cost(g, &(0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>()))
        .collect();
    let mut rgs = vec![0usize; n];
    let mut best = (f64::INFINITY, Vec::new());
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut masks = vec![0usize; blocks];
        for (i, &b) in rgs.iter().enumerate() {
            masks[b] |= 1 << i;
        }
        let total: f64 = masks.iter().map(|&mk| cost[mk]).sum();
        if total < best.0 {
            best = (total, masks.clone());
        }
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                let groups = best.1.iter().map(|&mk| (0..n).filter(|&v| mk >> v & 1 == 1).collect()).collect();
                return Ok((best.0, groups));
            }
            let prefix_max = rgs[..i].iter().max().copied().unwrap();
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
            i -= 1;
        }
    }
}

pub fn brute_force_tree_combination(g: &LevelGraph, budget: OracleBudget) -> Result<f64> {
    brute_force_tree_combination_detailed(g, budget).map(|(c, _)| c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBounds {
    /// Σ d(s, t) / p₁.
    pub sum_st_over_p1: f64,
    /// Weight of the MST over the depot and the sources / p₁, when all
    /// depots share one location.
    pub mst_over_p1: Option<f64>,
}

impl LowerBounds {
    pub fn max(&self) -> f64 {
        self.sum_st_over_p1.max(self.mst_over_p1.unwrap_or(0.0))
    }
}

pub fn lower_bounds(inst: &Instance) -> LowerBounds {
    let p1 = inst.depots[0].speed;
    let sum_st_over_p1 = inst.requests.iter().map(|r| r.length()).sum::<f64>() / p1;
    let mst_over_p1 = inst.depots_colocated().then(|| {
        let mut pts = vec![inst.depots[0].location];
        pts.extend(inst.requests.iter().map(|r| r.source));
        euclidean_mst(&pts).map(|e| e.iter().map(|x| x.w).sum::<f64>()).unwrap_or(0.0) / p1
    });
    LowerBounds { sum_st_over_p1, mst_over_p1 }
}
