use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{tol, LevelGraph, TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentState {
    Active,
    Inactive,
    Frozen,
}

/// A moat: a set of level-graph vertices that existed as a component of one
/// level's forest at some point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub level: usize,
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    pub state: ComponentState,
    /// Y_l of this set.
    pub dual: f64,
    /// Remaining potential; kept for components without a root.
    pub potential: f64,
    pub has_root: bool,
    /// False once merged into a larger component.
    pub alive: bool,
    /// Whether the set ever ran out of potential.
    pub froze: bool,
}

/// Forest and moat ledger of one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelState {
    pub level: usize,
    /// Vertices taking part at this level (those of this level or slower).
    pub present: Vec<bool>,
    /// Current component of each present vertex.
    pub comp_of: Vec<usize>,
    pub comps: Vec<Component>,
    /// Σ Y_l(S) over moats S containing each vertex.
    pub vertex_dual: Vec<f64>,
    /// Edges added by merge events, in order.
    pub forest: Vec<(usize, usize)>,
}

impl LevelState {
    fn active(&self, c: usize) -> bool {
        self.comps[c].state == ComponentState::Active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Merge,
    Freeze,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub iteration: usize,
    pub delta: f64,
    pub kind: EventKind,
    pub level: usize,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthState {
    /// One entry per level that grows (all but the slowest).
    pub levels: Vec<LevelState>,
    pub events: Vec<Event>,
    pub iterations: usize,
    /// Σ_S Y_0(S), the dual objective.
    pub dual_objective: f64,
    /// Largest amount by which an edge load exceeded its cost, beyond the
    /// tolerance, over all events (0 when feasible).
    pub max_edge_excess: f64,
    /// Smallest remaining potential observed, relative to tolerance
    /// (0 when feasible, negative otherwise).
    pub min_potential_excess: f64,
    /// Whether every component at a slower level stayed inside the component
    /// of the same vertex at each faster level, after every event.
    pub nested_ok: bool,
}

impl GrowthState {
    pub fn remaining_potential(&self, level: usize, component: usize) -> f64 {
        self.levels[level].comps[component].potential
    }
}

/// See [`GrowthState::remaining_potential`].
pub fn remaining_potential(state: &GrowthState, level: usize, component: usize) -> f64 {
    state.remaining_potential(level, component)
}

#[derive(Debug, Clone, Copy)]
enum Pick {
    Edge { level: usize, u: usize, v: usize },
    Freeze { level: usize, comp: usize },
}

/// Event-driven simulation of the synchronized multi-level moat growing.
///
/// All active components of all levels raise their duals at the same rate.
/// Per iteration the time to the next tight edge constraint or exhausted
/// potential is computed exactly, every level advances by that amount and
/// exactly one event is applied: edges before freezes, lower levels first,
/// then the smallest `(level, min id, max id)` key.
pub fn run_moat_growing(g: &LevelGraph) -> Result<GrowthState> {
    let n = g.n();
    let h = g.h();
    let grow = h.saturating_sub(1);
    let mut levels: Vec<LevelState> = (0..grow)
        .map(|l| {
            let present: Vec<bool> = g.vertices.iter().map(|v| v.level >= l).collect();
            let mut comps = Vec::new();
            let mut comp_of = vec![usize::MAX; n];
            for (x, v) in g.vertices.iter().enumerate() {
                if !present[x] {
                    continue;
                }
                let root = v.level == l;
                comp_of[x] = comps.len();
                comps.push(Component {
                    level: l,
                    vertices: vec![x],
                    state: if root { ComponentState::Inactive } else { ComponentState::Active },
                    dual: 0.0,
                    potential: if root { 0.0 } else { g.penalty(l, x) },
                    has_root: root,
                    alive: true,
                    froze: false,
                });
            }
            LevelState { level: l, present, comp_of, comps, vertex_dual: vec![0.0; n], forest: Vec::new() }
        })
        .collect();

    let bound = g.iteration_bound(h);
    let mut state = GrowthState {
        levels: Vec::new(),
        events: Vec::new(),
        iterations: 0,
        dual_objective: 0.0,
        max_edge_excess: 0.0,
        min_potential_excess: 0.0,
        nested_ok: true,
    };

    loop {
        if !levels.iter().any(|ls| ls.comps.iter().any(|c| c.alive && c.state == ComponentState::Active)) {
            break;
        }
        if state.iterations >= bound {
            return Err(Error::InternalInvariantViolation(format!(
                "moat growing exceeded {bound} iterations"
            )));
        }

        // Active components one level up nested inside each component.
        let nested: Vec<Vec<usize>> = (0..grow)
            .map(|l| {
                let mut cnt = vec![0usize; levels[l].comps.len()];
                if l + 1 < grow {
                    let up = &levels[l + 1];
                    for c in up.comps.iter().filter(|c| c.alive && c.state == ComponentState::Active) {
                        cnt[levels[l].comp_of[c.vertices[0]]] += 1;
                    }
                }
                cnt
            })
            .collect();

        // Time to each candidate event.
        let mut delta = f64::INFINITY;
        let mut edges: Vec<(f64, usize, usize, usize)> = Vec::new();
        let mut freezes: Vec<(f64, usize, usize)> = Vec::new();
        for (l, ls) in levels.iter().enumerate() {
            for u in 0..n {
                if !ls.present[u] {
                    continue;
                }
                for v in u + 1..n {
                    if !ls.present[v] {
                        continue;
                    }
                    let (cu, cv) = (ls.comp_of[u], ls.comp_of[v]);
                    if cu == cv {
                        continue;
                    }
                    let rate = usize::from(ls.active(cu)) + usize::from(ls.active(cv));
                    if rate == 0 {
                        continue;
                    }
                    let slack = g.cost(l, u, v) - ls.vertex_dual[u] - ls.vertex_dual[v];
                    let t = slack.max(0.0) / rate as f64;
                    delta = delta.min(t);
                    edges.push((t, l, u, v));
                }
            }
            for (c, comp) in ls.comps.iter().enumerate() {
                if comp.alive && comp.state == ComponentState::Active && nested[l][c] == 0 {
                    let t = comp.potential.max(0.0);
                    delta = delta.min(t);
                    freezes.push((t, l, c));
                }
            }
        }
        if !delta.is_finite() {
            return Err(Error::InternalInvariantViolation("active moats but no pending event".into()));
        }

        // Advance every level by delta.
        for (l, ls) in levels.iter_mut().enumerate() {
            let mut active_count = 0usize;
            for c in 0..ls.comps.len() {
                let comp = &mut ls.comps[c];
                if !comp.alive {
                    continue;
                }
                let nd = nested[l][c] as f64;
                match comp.state {
                    ComponentState::Active => {
                        active_count += 1;
                        comp.dual += delta;
                        comp.potential += delta * (nd - 1.0);
                        for &x in &comp.vertices {
                            ls.vertex_dual[x] += delta;
                        }
                    }
                    ComponentState::Frozen => comp.potential += delta * nd,
                    ComponentState::Inactive => {}
                }
            }
            if l == 0 {
                state.dual_objective += delta * active_count as f64;
            }
        }

        let threshold = delta + TOL * delta.max(1.0);
        let pick = edges
            .iter()
            .filter(|e| e.0 <= threshold)
            .map(|&(_, level, u, v)| (level, u, v))
            .min()
            .map(|(level, u, v)| Pick::Edge { level, u, v })
            .or_else(|| {
                freezes
                    .iter()
                    .filter(|f| f.0 <= threshold)
                    .map(|&(_, level, comp)| (level, levels[level].comps[comp].vertices[0], comp))
                    .min()
                    .map(|(level, _, comp)| Pick::Freeze { level, comp })
            })
            .ok_or_else(|| Error::InternalInvariantViolation("no event at the computed time".into()))?;

        state.iterations += 1;
        let iteration = state.iterations;
        match pick {
            Pick::Edge { level, u, v } => {
                let id = merge(&mut levels, level, u, v);
                let comp = &levels[level].comps[id];
                state.events.push(Event {
                    iteration,
                    delta,
                    kind: EventKind::Merge,
                    level,
                    payload: json!({"u": u, "v": v, "component": id, "vertices": comp.vertices, "state": comp.state}),
                });
            }
            Pick::Freeze { level, comp } => {
                let c = &mut levels[level].comps[comp];
                c.state = ComponentState::Frozen;
                c.potential = 0.0;
                c.froze = true;
                state.events.push(Event {
                    iteration,
                    delta,
                    kind: EventKind::Freeze,
                    level,
                    payload: json!({"component": comp, "vertices": c.vertices}),
                });
            }
        }
        check_feasibility(g, &levels, &mut state);
        state.nested_ok &= is_nested(&levels);
    }
    state.levels = levels;
    Ok(state)
}

/// Merges the components of `u` and `v` at `level`; returns the new id.
fn merge(levels: &mut [LevelState], level: usize, u: usize, v: usize) -> usize {
    let ls = &mut levels[level];
    let (a, b) = (ls.comp_of[u], ls.comp_of[v]);
    let (ca, cb) = (&ls.comps[a], &ls.comps[b]);
    let inactive = ca.state == ComponentState::Inactive || cb.state == ComponentState::Inactive;
    let mut vertices: Vec<usize> = ca.vertices.iter().chain(&cb.vertices).copied().collect();
    vertices.sort_unstable();
    let merged = Component {
        level,
        vertices,
        state: if inactive { ComponentState::Inactive } else { ComponentState::Active },
        dual: 0.0,
        potential: if inactive { 0.0 } else { ca.potential + cb.potential },
        has_root: ca.has_root || cb.has_root,
        alive: true,
        froze: false,
    };
    ls.comps[a].alive = false;
    ls.comps[b].alive = false;
    let id = ls.comps.len();
    for &x in &merged.vertices {
        ls.comp_of[x] = id;
    }
    ls.forest.push((u.min(v), u.max(v)));
    let members = merged.vertices.clone();
    ls.comps.push(merged);

    if inactive {
        // Slower levels stop growing inside a set that is now served by a
        // faster vehicle.
        for up in levels.iter_mut().skip(level + 1) {
            for &x in &members {
                if up.present[x] {
                    let c = up.comp_of[x];
                    if up.comps[c].state == ComponentState::Active {
                        up.comps[c].state = ComponentState::Inactive;
                    }
                }
            }
        }
    }
    id
}

fn is_nested(levels: &[LevelState]) -> bool {
    levels.windows(2).all(|w| {
        let (lo, hi) = (&w[0], &w[1]);
        hi.comps.iter().filter(|c| c.alive).all(|c| {
            let outer = lo.comp_of[c.vertices[0]];
            c.vertices.iter().all(|&x| lo.comp_of[x] == outer)
        })
    })
}

fn check_feasibility(g: &LevelGraph, levels: &[LevelState], state: &mut GrowthState) {
    let n = g.n();
    for (l, ls) in levels.iter().enumerate() {
        for u in 0..n {
            if !ls.present[u] {
                continue;
            }
            for v in u + 1..n {
                if !ls.present[v] || ls.comp_of[u] == ls.comp_of[v] {
                    continue;
                }
                let cost = g.cost(l, u, v);
                let excess = ls.vertex_dual[u] + ls.vertex_dual[v] - cost - tol(cost);
                state.max_edge_excess = state.max_edge_excess.max(excess);
            }
        }
        for c in ls.comps.iter().filter(|c| c.alive && !c.has_root && c.state != ComponentState::Inactive) {
            let scale = g.penalty_of(l, &c.vertices);
            state.min_potential_excess = state.min_potential_excess.min(c.potential + tol(scale));
        }
    }
}
