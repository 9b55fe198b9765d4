//! Problem instances: depots with speeds, pickup/delivery requests, synthetic
//! generators, file formats and the grouping of depots into speed levels.
//!
//! Depots are always stored sorted by non-increasing speed, so the index of a
//! depot inside [`Instance::depots`] doubles as its rank. Algorithms work on
//! indices; the `id` fields are carried through to solutions and files.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Side length of the square used by the synthetic generators.
pub const GRID: f64 = 100.0;
pub const DEFAULT_DECAY: f64 = 5.0;

// Sub-streams of the generator RNG, one per entity class.
const STREAM_DEPOTS: u64 = 0;
const STREAM_REQUESTS: u64 = 1;
const STREAM_CENTERS: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Depot {
    pub id: usize,
    pub location: Point,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub id: usize,
    pub source: Point,
    pub target: Point,
}

impl Request {
    /// d(s, t).
    #[inline]
    pub fn length(&self) -> f64 {
        self.source.dist(self.target)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub depots: Vec<Depot>,
    pub requests: Vec<Request>,
    pub meta: Map<String, Value>,
}

impl Instance {
    /// Validates and sorts depots by non-increasing speed (stable).
    pub fn new(mut depots: Vec<Depot>, requests: Vec<Request>, meta: Map<String, Value>) -> Result<Self> {
        if depots.is_empty() {
            return Err(Error::InvalidParam("instance has no depots".into()));
        }
        let mut ids = HashSet::new();
        for d in &depots {
            if !(d.speed > 0.0 && d.speed.is_finite()) {
                return Err(Error::InvalidParam(format!("depot {} has speed {}", d.id, d.speed)));
            }
            if !d.location.is_finite() {
                return Err(Error::InvalidParam(format!("depot {} has non-finite location", d.id)));
            }
            if !ids.insert(d.id) {
                return Err(Error::InvalidParam(format!("duplicate depot id {}", d.id)));
            }
        }
        ids.clear();
        for r in &requests {
            if !r.source.is_finite() || !r.target.is_finite() {
                return Err(Error::InvalidParam(format!("request {} has non-finite coordinates", r.id)));
            }
            if !ids.insert(r.id) {
                return Err(Error::InvalidParam(format!("duplicate request id {}", r.id)));
            }
        }
        depots.sort_by(|a, b| b.speed.total_cmp(&a.speed));
        Ok(Instance { depots, requests, meta })
    }

    pub fn k(&self) -> usize {
        self.depots.len()
    }

    pub fn m(&self) -> usize {
        self.requests.len()
    }

    pub fn depot_index(&self, id: usize) -> Option<usize> {
        self.depots.iter().position(|d| d.id == id)
    }

    pub fn request_index(&self, id: usize) -> Option<usize> {
        self.requests.iter().position(|r| r.id == id)
    }

    /// True when every depot sits at the same location.
    pub fn depots_colocated(&self) -> bool {
        let first = self.depots[0].location;
        self.depots.iter().all(|d| d.location == first)
    }

    /// Multiplies every coordinate by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Instance {
        let s = |p: Point| Point::new(p.x * lambda, p.y * lambda);
        Instance {
            depots: self
                .depots
                .iter()
                .map(|d| Depot { location: s(d.location), ..*d })
                .collect(),
            requests: self
                .requests
                .iter()
                .map(|r| Request { id: r.id, source: s(r.source), target: s(r.target) })
                .collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            depots: self
                .depots
                .iter()
                .map(|d| DepotRow { id: d.id, x: d.location.x, y: d.location.y, speed: d.speed })
                .collect(),
            requests: self
                .requests
                .iter()
                .map(|r| RequestRow {
                    id: r.id,
                    sx: r.source.x,
                    sy: r.source.y,
                    tx: r.target.x,
                    ty: r.target.y,
                })
                .collect(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Instance::new(
            file.depots
                .into_iter()
                .map(|d| Depot { id: d.id, location: Point::new(d.x, d.y), speed: d.speed })
                .collect(),
            file.requests
                .into_iter()
                .map(|r| Request {
                    id: r.id,
                    source: Point::new(r.sx, r.sy),
                    target: Point::new(r.tx, r.ty),
                })
                .collect(),
            file.meta,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DepotRow {
    id: usize,
    x: f64,
    y: f64,
    speed: f64,
}

#[derive(Serialize, Deserialize)]
struct RequestRow {
    id: usize,
    sx: f64,
    sy: f64,
    tx: f64,
    ty: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    depots: Vec<DepotRow>,
    requests: Vec<RequestRow>,
    #[serde(default)]
    meta: Map<String, Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    /// A directory holding `depots.csv` and `orders.csv` (a path to either
    /// file is accepted too).
    CourierCsv,
}

pub fn load_instance(path: impl AsRef<Path>, format: Format) -> Result<Instance> {
    let path = path.as_ref();
    match format {
        Format::Json => Instance::from_json(&fs::read_to_string(path)?),
        Format::CourierCsv => load_courier_csv(path),
    }
}

#[derive(Deserialize)]
struct CourierRow {
    id: usize,
    lat: f64,
    lng: f64,
    speed: f64,
}

#[derive(Deserialize)]
struct OrderRow {
    id: usize,
    pickup_lat: f64,
    pickup_lng: f64,
    dropoff_lat: f64,
    dropoff_lng: f64,
}

fn load_courier_csv(path: &Path) -> Result<Instance> {
    let dir: PathBuf = if path.is_dir() {
        path.to_path_buf()
    } else {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    };
    let mut depots = Vec::new();
    for row in csv::Reader::from_path(dir.join("depots.csv"))?.deserialize() {
        let c: CourierRow = row?;
        depots.push(Depot { id: c.id, location: Point::new(c.lng, c.lat), speed: c.speed });
    }
    let mut requests = Vec::new();
    for row in csv::Reader::from_path(dir.join("orders.csv"))?.deserialize() {
        let o: OrderRow = row?;
        requests.push(Request {
            id: o.id,
            source: Point::new(o.pickup_lng, o.pickup_lat),
            target: Point::new(o.dropoff_lng, o.dropoff_lat),
        });
    }
    let mut meta = Map::new();
    meta.insert("generator".into(), json!("courier-csv"));
    meta.insert("source".into(), json!(dir.display().to_string()));
    Instance::new(depots, requests, meta)
}

/// Two depots on a line that lure a time-greedy insertion heuristic onto
/// the slow vehicle.
///
/// Depot `0` is slow (speed `v_slow`) and sits at `(-n·v_slow, 0)`; depot
/// `1` has speed `alpha·v_slow` and sits at `(-(n+epsilon)·alpha·v_slow, 0)`.
/// Request `i` (1-based) has source = target = `((i-1)·n·v_slow, 0)`.
pub fn gen_worst_case(n: usize, v_slow: f64, alpha: f64, epsilon: f64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidParam("n must be at least 1".into()));
    }
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParam(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParam(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(v_slow > 0.0 && v_slow.is_finite()) {
        return Err(Error::InvalidParam(format!("v_slow must be positive, got {v_slow}")));
    }
    let nf = n as f64;
    let v_fast = alpha * v_slow;
    let depots = vec![
        Depot { id: 0, location: Point::new(-nf * v_slow, 0.0), speed: v_slow },
        Depot { id: 1, location: Point::new(-(nf + epsilon) * v_fast, 0.0), speed: v_fast },
    ];
    let requests = (0..n)
        .map(|i| {
            let p = Point::new(i as f64 * nf * v_slow, 0.0);
            Request { id: i, source: p, target: p }
        })
        .collect();
    let mut meta = Map::new();
    meta.insert("generator".into(), json!("worst-case"));
    meta.insert(
        "params".into(),
        json!({"n": n, "v_slow": v_slow, "alpha": alpha, "epsilon": epsilon}),
    );
    Instance::new(depots, requests, meta)
}

fn check_levels(k: usize, h: usize, decay: f64) -> Result<()> {
    if k == 0 || h == 0 || h > k {
        return Err(Error::InvalidParam(format!("need 1 <= h <= k, got h={h}, k={k}")));
    }
    if !(decay > 0.0 && decay.is_finite()) {
        return Err(Error::InvalidParam(format!("decay must be positive, got {decay}")));
    }
    Ok(())
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

/// Depot `j` lands on level `j mod h` (0-based) with speed `decay^-level`.
fn uniform_depots(k: usize, h: usize, decay: f64, seed: u64) -> Vec<Depot> {
    let mut rng = stream(seed, STREAM_DEPOTS);
    (0..k)
        .map(|j| {
            let location = Point::new(rng.random::<f64>() * GRID, rng.random::<f64>() * GRID);
            Depot { id: j, location, speed: decay.powi(-((j % h) as i32)) }
        })
        .collect()
}

fn generator_meta(name: &str, params: Value, seed: u64) -> Map<String, Value> {
    let mut meta = Map::new();
    meta.insert("generator".into(), json!(name));
    meta.insert("params".into(), params);
    meta.insert("seed".into(), json!(seed));
    meta.insert(
        "rng".into(),
        json!({"algorithm": "chacha8", "streams": {"depots": STREAM_DEPOTS, "requests": STREAM_REQUESTS, "centers": STREAM_CENTERS}}),
    );
    meta
}

/// Depots, sources and targets i.i.d. uniform on `[0, 100]²`.
pub fn gen_uniform(n: usize, k: usize, h: usize, decay: f64, seed: u64) -> Result<Instance> {
    check_levels(k, h, decay)?;
    let depots = uniform_depots(k, h, decay, seed);
    let mut rng = stream(seed, STREAM_REQUESTS);
    let mut pt = || Point::new(rng.random::<f64>() * GRID, rng.random::<f64>() * GRID);
    let requests = (0..n)
        .map(|i| {
            let source = pt();
            let target = pt();
            Request { id: i, source, target }
        })
        .collect();
    let meta = generator_meta("uniform", json!({"n": n, "k": k, "h": h, "decay": decay}), seed);
    Instance::new(depots, requests, meta)
}

/// Requests drawn from a mixture of `c` isotropic Gaussians with standard
/// deviation `sigma` whose centres are uniform on `[0, 100]²`. Depots are
/// placed as in [`gen_uniform`].
pub fn gen_gmm(n: usize, k: usize, h: usize, c: usize, sigma: f64, decay: f64, seed: u64) -> Result<Instance> {
    check_levels(k, h, decay)?;
    if c == 0 {
        return Err(Error::InvalidParam("need at least one cluster".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParam(format!("sigma must be positive, got {sigma}")));
    }
    let depots = uniform_depots(k, h, decay, seed);
    let mut crng = stream(seed, STREAM_CENTERS);
    let centers: Vec<Point> = (0..c)
        .map(|_| Point::new(crng.random::<f64>() * GRID, crng.random::<f64>() * GRID))
        .collect();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParam(e.to_string()))?;
    let mut rng = stream(seed, STREAM_REQUESTS);
    let mut pt = || {
        let ctr = centers[rng.random_range(0..c)];
        Point::new(ctr.x + normal.sample(&mut rng), ctr.y + normal.sample(&mut rng))
    };
    let requests = (0..n)
        .map(|i| {
            let source = pt();
            let target = pt();
            Request { id: i, source, target }
        })
        .collect();
    let meta = generator_meta(
        "gmm",
        json!({"n": n, "k": k, "h": h, "c": c, "sigma": sigma, "decay": decay, "centers": centers.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>()}),
        seed,
    );
    Instance::new(depots, requests, meta)
}

/// Depots grouped by speed, fastest first. Entries are depot indices into
/// [`Instance::depots`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPartition {
    pub levels: Vec<Vec<usize>>,
    pub speeds: Vec<f64>,
    /// Depots sharing a location with an earlier (at least as fast) depot.
    pub unused: Vec<usize>,
    /// Level of each depot, `None` for unused ones.
    pub level_of: Vec<Option<usize>>,
}

impl LevelPartition {
    pub fn h(&self) -> usize {
        self.levels.len()
    }

    pub fn is_used(&self, depot: usize) -> bool {
        self.level_of[depot].is_some()
    }
}

pub fn level_partition(instance: &Instance) -> LevelPartition {
    let k = instance.k();
    let mut unused = Vec::new();
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut used = Vec::with_capacity(k);
    for (j, d) in instance.depots.iter().enumerate() {
        let key = ((d.location.x + 0.0).to_bits(), (d.location.y + 0.0).to_bits());
        if seen.insert(key) {
            used.push(j);
        } else {
            unused.push(j);
        }
    }
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut speeds: Vec<f64> = Vec::new();
    let mut level_of = vec![None; k];
    for j in used {
        let s = instance.depots[j].speed;
        if speeds.last() != Some(&s) {
            speeds.push(s);
            levels.push(Vec::new());
        }
        level_of[j] = Some(levels.len() - 1);
        levels.last_mut().unwrap().push(j);
    }
    LevelPartition { levels, speeds, unused, level_of }
}
