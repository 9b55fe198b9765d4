use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mscd::instance::{self as inst_mod, level_partition, Depot, Format, Request};
use mscd::oracle::{brute_force_cd, lower_bounds, OracleBudget};
use mscd::primal_dual::verify_dual;
use mscd::routing::{self, PdOptions, PreemptiveSchedule, Router, TreeVariant};
use mscd::trees::DEFAULT_MST_K;
use mscd::Point;

fn err(e: mscd::Error) -> PyErr {
    match e {
        mscd::Error::Io(e) => PyOSError::new_err(e.to_string()),
        mscd::Error::InternalInvariantViolation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

fn parse_format(format: &str) -> PyResult<Format> {
    match format {
        "json" => Ok(Format::Json),
        "courier-csv" => Ok(Format::CourierCsv),
        _ => Err(PyValueError::new_err(format!("unknown format {format:?}"))),
    }
}

/// Depots sorted fastest first, plus pickup and delivery requests.
#[pyclass(name = "Instance", module = "mscd_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyInstance {
    inner: mscd::Instance,
}

#[pymethods]
impl PyInstance {
    /// `depots`: (x, y, speed) triples; `requests`: ((sx, sy), (tx, ty)).
    /// Ids are the list positions.
    #[new]
    fn new(depots: Vec<(f64, f64, f64)>, requests: Vec<((f64, f64), (f64, f64))>) -> PyResult<Self> {
        let depots =
            depots.into_iter().enumerate().map(|(id, (x, y, speed))| Depot { id, location: Point::new(x, y), speed });
        let requests = requests
            .into_iter()
            .enumerate()
            .map(|(id, (s, t))| Request { id, source: Point::new(s.0, s.1), target: Point::new(t.0, t.1) });
        let inner = mscd::Instance::new(depots.collect(), requests.collect(), Default::default()).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn uniform(n: usize, k: usize, h: usize, seed: u64) -> PyResult<Self> {
        let inner = inst_mod::gen_uniform(n, k, h, inst_mod::DEFAULT_DECAY, seed).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, k, h, c, sigma, seed))]
    fn gmm(n: usize, k: usize, h: usize, c: usize, sigma: f64, seed: u64) -> PyResult<Self> {
        let inner = inst_mod::gen_gmm(n, k, h, c, sigma, inst_mod::DEFAULT_DECAY, seed).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, alpha = 1000.0, epsilon = 0.01))]
    fn worst_case(n: usize, alpha: f64, epsilon: f64) -> PyResult<Self> {
        let inner = inst_mod::gen_worst_case(n, 1.0, alpha, epsilon).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, format = "json"))]
    fn load(path: PathBuf, format: &str) -> PyResult<Self> {
        let inner = inst_mod::load_instance(path, parse_format(format)?).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: mscd::Instance::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    /// Number of speed levels actually used.
    #[getter]
    fn h(&self) -> usize {
        level_partition(&self.inner).h()
    }

    /// (id, x, y, speed), fastest first.
    #[getter]
    fn depots(&self) -> Vec<(usize, f64, f64, f64)> {
        self.inner.depots.iter().map(|d| (d.id, d.location.x, d.location.y, d.speed)).collect()
    }

    /// (id, (sx, sy), (tx, ty)).
    #[getter]
    fn requests(&self) -> Vec<(usize, (f64, f64), (f64, f64))> {
        self.inner.requests.iter().map(|r| (r.id, (r.source.x, r.source.y), (r.target.x, r.target.y))).collect()
    }

    fn lower_bound(&self) -> f64 {
        lower_bounds(&self.inner).max()
    }

    fn __len__(&self) -> usize {
        self.inner.m()
    }

    fn __repr__(&self) -> String {
        format!("Instance(k={}, m={})", self.inner.k(), self.inner.m())
    }
}

#[pyclass(name = "Route", module = "mscd_py", frozen, skip_from_py_object, get_all)]
#[derive(Clone)]
pub struct PyRoute {
    depot_id: usize,
    order: Vec<usize>,
    length: f64,
    cost: f64,
}

#[pymethods]
impl PyRoute {
    fn __repr__(&self) -> String {
        format!("Route(depot_id={}, stops={}, cost={})", self.depot_id, self.order.len(), self.cost)
    }
}

#[pyclass(name = "Solution", module = "mscd_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySolution {
    inner: routing::Solution,
}

#[pymethods]
impl PySolution {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySolution { inner: routing::Solution::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn algorithm(&self) -> &str {
        &self.inner.algorithm
    }

    #[getter]
    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.params)
    }

    #[getter]
    fn total_cost(&self) -> f64 {
        self.inner.total_cost
    }

    #[getter]
    fn routes(&self) -> Vec<PyRoute> {
        self.inner
            .routes
            .iter()
            .map(|r| PyRoute { depot_id: r.depot_id, order: r.order.clone(), length: r.length, cost: r.cost })
            .collect()
    }

    /// Recomputes the cost and checks that every request is served once.
    /// Returns a dict with `feasible`, `total_cost` and `violations`.
    fn evaluate<'py>(&self, py: Python<'py>, instance: &PyInstance) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &routing::evaluate(&self.inner, &instance.inner))
    }

    fn __repr__(&self) -> String {
        format!("Solution(algorithm={:?}, total_cost={}, routes={})", self.inner.algorithm, self.inner.total_cost, self.inner.routes.len())
    }
}

fn pd_options(tree: &str, router: &str, mst_k: Option<f64>) -> PyResult<PdOptions> {
    let tree: TreeVariant = tree.parse().map_err(err)?;
    let router: Router = router.parse().map_err(err)?;
    if mst_k.is_some() && tree != TreeVariant::PrimMstK {
        return Err(PyValueError::new_err("mst_k only applies to tree='prim-mst-k'"));
    }
    Ok(PdOptions { tree, router, mst_k: mst_k.unwrap_or(DEFAULT_MST_K) })
}

/// Primal-dual tree combination followed by routing.
#[pyfunction]
#[pyo3(signature = (instance, tree = "mst", router = "dfs", mst_k = None))]
fn solve_pd(py: Python<'_>, instance: &PyInstance, tree: &str, router: &str, mst_k: Option<f64>) -> PyResult<PySolution> {
    let opts = pd_options(tree, router, mst_k)?;
    let inner = py.detach(|| routing::solve_pd(&instance.inner, opts)).map_err(err)?;
    Ok(PySolution { inner })
}

/// Like `solve_pd`, also returning the dual certificate and stage times.
#[pyfunction]
#[pyo3(signature = (instance, tree = "mst", router = "dfs", mst_k = None))]
fn solve_pd_verified<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    tree: &str,
    router: &str,
    mst_k: Option<f64>,
) -> PyResult<(PySolution, Bound<'py, PyAny>, Bound<'py, PyDict>)> {
    let opts = pd_options(tree, router, mst_k)?;
    let (run, report) = py
        .detach(|| {
            routing::solve_pd_detailed(&instance.inner, opts).map(|run| {
                let report = verify_dual(&run.state, &run.graph, &run.large_trees);
                (run, report)
            })
        })
        .map_err(err)?;
    let times = PyDict::new(py);
    times.set_item("tree_s", run.times.tree_s)?;
    times.set_item("pd_s", run.times.pd_s)?;
    times.set_item("route_s", run.times.route_s)?;
    times.set_item("total_s", run.times.total_s)?;
    Ok((PySolution { inner: run.solution }, to_py(py, &report)?, times))
}

/// Per-request cheapest insertion over all depots.
#[pyfunction]
fn solve_baseline(py: Python<'_>, instance: &PyInstance) -> PySolution {
    PySolution { inner: py.detach(|| routing::solve_baseline(&instance.inner)) }
}

/// Requires all depots at one location.
#[pyfunction]
fn solve_single_depot(instance: &PyInstance) -> PyResult<PySolution> {
    Ok(PySolution { inner: routing::solve_single_depot(&instance.inner).map_err(err)? })
}

/// Exact optimum by enumeration; small instances only.
#[pyfunction]
fn brute_force(instance: &PyInstance) -> PyResult<f64> {
    brute_force_cd(&instance.inner, OracleBudget::default()).map_err(err)
}

/// Turns a schedule with hand-offs (JSON) into plain routes of no larger cost.
#[pyfunction]
fn preemptive_to_nonpreemptive(schedule_json: &str, instance: &PyInstance) -> PyResult<PySolution> {
    let sched = PreemptiveSchedule::from_json(schedule_json).map_err(err)?;
    Ok(PySolution { inner: routing::preemptive_to_nonpreemptive(&sched, &instance.inner).map_err(err)? })
}

/// Cost of a preemptive schedule given as JSON.
#[pyfunction]
fn preemptive_cost(schedule_json: &str, instance: &PyInstance) -> PyResult<f64> {
    let sched = PreemptiveSchedule::from_json(schedule_json).map_err(err)?;
    sched.cost(&instance.inner).map_err(err)
}

#[pymodule]
fn mscd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyRoute>()?;
    m.add_function(wrap_pyfunction!(solve_pd, m)?)?;
    m.add_function(wrap_pyfunction!(solve_pd_verified, m)?)?;
    m.add_function(wrap_pyfunction!(solve_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(solve_single_depot, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(preemptive_to_nonpreemptive, m)?)?;
    m.add_function(wrap_pyfunction!(preemptive_cost, m)?)?;
    m.add("TREES", ["mst", "prim", "prim-mst-k"])?;
    m.add("ROUTERS", ["dfs", "greedy", "dgreedy"])?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_parsing() {
        let o = pd_options("prim-mst-k", "dgreedy", Some(3.0)).unwrap();
        assert_eq!((o.tree, o.router, o.mst_k), (TreeVariant::PrimMstK, Router::DGreedy, 3.0));
        assert_eq!(pd_options("mst", "dfs", None).unwrap(), PdOptions::default());
        assert!(pd_options("mst", "dfs", Some(3.0)).is_err());
        assert!(pd_options("kruskal", "dfs", None).is_err());
        assert!(parse_format("xml").is_err());
    }
}
