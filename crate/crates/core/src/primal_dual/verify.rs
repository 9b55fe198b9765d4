use serde::{Deserialize, Serialize};

use super::{tol, GrowthState, LargeTree, LevelGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub dual_feasible: bool,
    pub max_edge_excess: f64,
    pub min_potential_excess: f64,
    /// Connector costs at the serving level plus penalties of the unserved
    /// sets, i.e. the assembled objective minus Σ w(v)/p_fastest.
    pub primal: f64,
    pub dual: f64,
    pub primal_within_twice_dual: bool,
    pub iterations: usize,
    /// Σ over all levels l of |V_l|·(2l − 1) (1-based).
    pub iteration_bound: usize,
    /// The same sum over all levels but the slowest; informational only.
    pub iteration_bound_without_top: usize,
    pub iterations_within_bound: bool,
    pub partition_ok: bool,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks a finished run: dual feasibility at every event, primal ≤ 2·dual,
/// the iteration bound, and that the large trees partition the vertices with
/// the fastest member at each root.
pub fn verify_dual(state: &GrowthState, g: &LevelGraph, result: &[LargeTree]) -> VerificationReport {
    let mut failures = Vec::new();
    let dual_feasible = state.max_edge_excess <= 0.0 && state.min_potential_excess >= 0.0;
    if !dual_feasible {
        failures.push(format!(
            "dual infeasible: edge excess {:e}, potential excess {:e}",
            state.max_edge_excess, state.min_potential_excess
        ));
    }

    let mut served = vec![usize::MAX; g.n()];
    let mut partition_ok = true;
    for t in result {
        for &v in &t.members {
            if served[v] != usize::MAX {
                partition_ok = false;
                failures.push(format!("vertex {v} in two large trees"));
            }
            served[v] = t.level;
            if g.vertices[v].level < t.level {
                partition_ok = false;
                failures.push(format!("vertex {v} served slower than its own vehicle"));
            }
        }
        if g.vertices[t.root].level != t.level {
            partition_ok = false;
            failures.push(format!("root {} is not of level {}", t.root, t.level));
        }
    }
    if let Some(v) = served.iter().position(|&s| s == usize::MAX) {
        partition_ok = false;
        failures.push(format!("vertex {v} not served"));
    }

    let p0 = g.speeds.first().copied().unwrap_or(1.0);
    let connectors: f64 = result.iter().map(|t| t.connectors.iter().map(|c| c.len).sum::<f64>() / t.speed).sum();
    let penalties: f64 = served
        .iter()
        .enumerate()
        .filter(|(_, &s)| s != usize::MAX)
        .map(|(v, &s)| g.vertices[v].weight * (1.0 / g.speeds[s] - 1.0 / p0))
        .sum();
    let primal = connectors + penalties;
    let dual = state.dual_objective;
    let primal_within_twice_dual = primal <= 2.0 * dual + tol(primal);
    if !primal_within_twice_dual {
        failures.push(format!("primal {primal} exceeds twice the dual {dual}"));
    }

    let iteration_bound = g.iteration_bound(g.h());
    let iterations_within_bound = state.iterations <= iteration_bound;
    if !iterations_within_bound {
        failures.push(format!("{} iterations, bound {iteration_bound}", state.iterations));
    }
    VerificationReport {
        dual_feasible,
        max_edge_excess: state.max_edge_excess,
        min_potential_excess: state.min_potential_excess,
        primal,
        dual,
        primal_within_twice_dual,
        iterations: state.iterations,
        iteration_bound,
        iteration_bound_without_top: g.iteration_bound(g.h().saturating_sub(1)),
        iterations_within_bound,
        partition_ok,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::super::combine;
    use super::*;

    #[test]
    fn examples_pass() {
        for (ell, primal, dual) in [(1.0, 0.5, 0.5), (20.0, 5.0, 5.0)] {
            let g = LevelGraph::from_matrix(vec![0, 1], vec![3.0, 10.0], vec![2.0, 1.0], vec![0.0, ell, ell, 0.0]).unwrap();
            let (s, t) = combine(&g).unwrap();
            let r = verify_dual(&s, &g, &t);
            assert!(r.passed(), "{:?}", r.failures);
            assert!((r.primal - primal).abs() < 1e-12);
            assert!((r.dual - dual).abs() < 1e-12);
        }
        let g = LevelGraph::from_matrix(vec![0], vec![3.0], vec![2.0], vec![0.0]).unwrap();
        let (s, t) = combine(&g).unwrap();
        let r = verify_dual(&s, &g, &t);
        assert!(r.passed());
        assert_eq!((r.primal, r.dual), (0.0, 0.0));
    }
}
