//! Preemptive schedules (packages may change hands at relay points) and the
//! reduction to a non-preemptive solution.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map};

use super::{Route, Solution};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::instance::{Depot, Instance, Request};

/// Slack for temporal and location checks.
pub const SCHEDULE_TOL: f64 = 1e-9;

/// Drone picks up `package` at `u` at time `t` and carries it to `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub package: usize,
    pub u: Point,
    pub w: Point,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneSchedule {
    /// Depot id.
    pub depot: usize,
    /// Ordered by pickup time.
    pub triples: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PreemptiveSchedule {
    pub drones: Vec<DroneSchedule>,
}

fn near(a: Point, b: Point) -> bool {
    a.dist(b) <= SCHEDULE_TOL * (1.0 + a.x.abs().max(a.y.abs()))
}

fn late_ok(t: f64, earliest: f64) -> bool {
    t + SCHEDULE_TOL * (1.0 + earliest.abs()) >= earliest
}

impl PreemptiveSchedule {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Sum over drones of the time the last package is dropped off.
    pub fn cost(&self, inst: &Instance) -> Result<f64> {
        let mut total = 0.0;
        for d in &self.drones {
            let j = inst.depot_index(d.depot).ok_or_else(|| Error::InfeasibleInput(format!("unknown depot {}", d.depot)))?;
            if let Some(last) = d.triples.last() {
                total += last.t + last.u.dist(last.w) / inst.depots[j].speed;
            }
        }
        Ok(total)
    }

    /// Checks per-drone timing and per-package relay chains.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleInput(msg));
        let mut seen_depot = HashSet::new();
        // package id -> (drop time, u, w) legs
        let mut legs: HashMap<usize, Vec<(f64, f64, Point, Point)>> = HashMap::new();
        for d in &self.drones {
            let Some(j) = inst.depot_index(d.depot) else {
                return bad(format!("unknown depot {}", d.depot));
            };
            if !seen_depot.insert(d.depot) {
                return bad(format!("depot {} listed twice", d.depot));
            }
            let p = inst.depots[j].speed;
            let mut at = inst.depots[j].location;
            let mut free = 0.0;
            for tr in &d.triples {
                if !tr.t.is_finite() || !tr.u.is_finite() || !tr.w.is_finite() {
                    return bad(format!("drone {}: non-finite triple", d.depot));
                }
                if inst.request_index(tr.package).is_none() {
                    return bad(format!("drone {}: unknown package {}", d.depot, tr.package));
                }
                let earliest = free + at.dist(tr.u) / p;
                if !late_ok(tr.t, earliest) {
                    return bad(format!("drone {}: pickup of {} at {} before it can arrive at {}", d.depot, tr.package, tr.t, earliest));
                }
                free = tr.t + tr.u.dist(tr.w) / p;
                at = tr.w;
                legs.entry(tr.package).or_default().push((tr.t, free, tr.u, tr.w));
            }
        }
        for r in &inst.requests {
            let Some(chain) = legs.get_mut(&r.id) else {
                return bad(format!("package {} never picked up", r.id));
            };
            chain.sort_by(|a, b| a.0.total_cmp(&b.0));
            if !near(chain[0].2, r.source) {
                return bad(format!("package {} first picked up away from its source", r.id));
            }
            if !near(chain[chain.len() - 1].3, r.target) {
                return bad(format!("package {} last dropped away from its target", r.id));
            }
            for w in chain.windows(2) {
                if !near(w[0].3, w[1].2) {
                    return bad(format!("package {} picked up where it was not dropped", r.id));
                }
                if !late_ok(w[1].0, w[0].1) {
                    return bad(format!("package {} picked up before it was dropped", r.id));
                }
            }
        }
        Ok(())
    }
}

/// Fastest drone first, each drone takes over, in first-pickup order, every
/// package it touches that no faster drone has taken. A drone serves its
/// packages whole, in that order. Timing is dropped: the result is charged
/// by route length only.
pub fn preemptive_to_nonpreemptive(sched: &PreemptiveSchedule, inst: &Instance) -> Result<Solution> {
    sched.validate(inst)?;
    let mut drones: Vec<(usize, &DroneSchedule)> =
        sched.drones.iter().map(|d| (inst.depot_index(d.depot).expect("validated"), d)).collect();
    // depot indices are already sorted by speed
    drones.sort_by_key(|&(j, _)| j);
    let mut taken: HashSet<usize> = HashSet::new();
    let mut routes = Vec::new();
    for (j, d) in drones {
        let mut order = Vec::new();
        for tr in &d.triples {
            if taken.insert(tr.package) {
                order.push(inst.request_index(tr.package).expect("validated"));
            }
        }
        routes.push(Route::from_indices(inst, j, &order));
    }
    Ok(Solution::new(inst, "preemptive-reduction", json!({}), routes))
}

/// Small random instance with a feasible preemptive schedule: up to three
/// drones, up to four packages, each carried over a relay chain of up to
/// three legs by randomly chosen drones.
pub fn random_preemptive(seed: u64) -> (Instance, PreemptiveSchedule) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt = |rng: &mut ChaCha8Rng| Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
    let k = rng.random_range(1..=3);
    let m = rng.random_range(1..=4);
    let depots: Vec<Depot> =
        (0..k).map(|id| Depot { id, location: pt(&mut rng), speed: rng.random_range(1.0..10.0) }).collect();
    let requests: Vec<Request> = (0..m).map(|id| Request { id, source: pt(&mut rng), target: pt(&mut rng) }).collect();
    let inst = Instance::new(depots, requests, Map::new()).expect("valid random instance");

    let mut state: Vec<(Point, f64)> = inst.depots.iter().map(|d| (d.location, 0.0)).collect();
    let mut triples: Vec<Vec<Triple>> = vec![Vec::new(); k];
    for r in &inst.requests {
        let legs = rng.random_range(1..=3);
        let mut stops = vec![r.source];
        for _ in 1..legs {
            stops.push(pt(&mut rng));
        }
        stops.push(r.target);
        let mut ready = 0.0f64;
        for w in stops.windows(2) {
            let j = rng.random_range(0..k);
            let p = inst.depots[j].speed;
            let (at, free) = state[j];
            let t = (free + at.dist(w[0]) / p).max(ready);
            ready = t + w[0].dist(w[1]) / p;
            state[j] = (w[1], ready);
            triples[j].push(Triple { package: r.id, u: w[0], w: w[1], t });
        }
    }
    let drones = inst
        .depots
        .iter()
        .zip(triples)
        .filter(|(_, t)| !t.is_empty())
        .map(|(d, triples)| DroneSchedule { depot: d.id, triples })
        .collect();
    (inst, PreemptiveSchedule { drones })
}
