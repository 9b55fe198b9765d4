//! Independent exhaustive solvers written against the problem definition,
//! cross-checked with the library oracles and pinned on fixed instances.

use mscd::instance::{gen_gmm, gen_uniform, gen_worst_case};
use mscd::oracle::{brute_force_cd, brute_force_tree_combination, OracleBudget};
use mscd::primal_dual::{assembled_objective, combine, random_level_graph, LevelGraph};
use mscd::routing::{solve_baseline, solve_pd, PdOptions, Router, TreeVariant};
use mscd::{Depot, Instance, Point, Request};

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every way to cut `m` items into `k` consecutive, possibly empty, pieces.
fn cuts(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![m]];
    }
    (0..=m)
        .flat_map(|first| {
            cuts(m - first, k - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Each permutation of all requests cut into one piece per vehicle.
fn cd_optimum(inst: &Instance) -> f64 {
    let all: Vec<usize> = (0..inst.m()).collect();
    let mut best = f64::INFINITY;
    for perm in permutations(&all) {
        for sizes in cuts(inst.m(), inst.k()) {
            let mut at = 0;
            let mut cost = 0.0;
            for (d, &len) in inst.depots.iter().zip(&sizes) {
                let mut pos = d.location;
                let mut dist = 0.0;
                for &i in &perm[at..at + len] {
                    let r = &inst.requests[i];
                    dist += pos.dist(r.source) + r.source.dist(r.target);
                    pos = r.target;
                }
                cost += dist / d.speed;
                at += len;
            }
            best = best.min(cost);
        }
    }
    best
}

/// Every labelling of vertices with group ids; a group costs the Prim tree
/// over ℓ plus member weights, at its fastest member's speed.
fn tc_optimum(g: &LevelGraph) -> f64 {
    let n = g.n();
    let mut best = f64::INFINITY;
    let total = n.pow(n as u32);
    for code in 0..total {
        let mut label = vec![0usize; n];
        let mut c = code;
        for l in label.iter_mut() {
            *l = c % n;
            c /= n;
        }
        let mut cost = 0.0;
        for group in 0..n {
            let members: Vec<usize> = (0..n).filter(|&v| label[v] == group).collect();
            if members.is_empty() {
                continue;
            }
            let mut tree = vec![members[0]];
            let mut len = 0.0;
            while tree.len() < members.len() {
                let (d, v) = members
                    .iter()
                    .filter(|v| !tree.contains(v))
                    .map(|&v| (tree.iter().map(|&u| g.ell(u, v)).fold(f64::INFINITY, f64::min), v))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .unwrap();
                len += d;
                tree.push(v);
            }
            let w: f64 = members.iter().map(|&v| g.vertices[v].weight).sum();
            let lvl = members.iter().map(|&v| g.vertices[v].level).min().unwrap();
            cost += (len + w) / g.speeds[lvl];
        }
        best = best.min(cost);
    }
    best
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn fixed_instances() -> Vec<Instance> {
    vec![
        gen_uniform(4, 2, 2, 5.0, 11).unwrap(),
        gen_gmm(5, 3, 2, 2, 5.0, 3.0, 12).unwrap(),
        gen_worst_case(4, 1.0, 10.0, 0.01).unwrap(),
        Instance::new(
            vec![
                Depot { id: 0, location: Point::new(0.0, 0.0), speed: 1.0 },
                Depot { id: 1, location: Point::new(10.0, 0.0), speed: 3.0 },
            ],
            vec![
                Request { id: 0, source: Point::new(1.0, 1.0), target: Point::new(2.0, 2.0) },
                Request { id: 1, source: Point::new(9.0, 1.0), target: Point::new(8.0, 3.0) },
                Request { id: 2, source: Point::new(5.0, 5.0), target: Point::new(5.0, 0.0) },
            ],
            Default::default(),
        )
        .unwrap(),
    ]
}

#[test]
fn cd_oracles_agree_on_random_tiny_instances() {
    for seed in 0..60u64 {
        let m = 1 + (seed % 5) as usize;
        let k = 1 + (seed % 3) as usize;
        let inst = gen_uniform(m, k, 1 + (seed % k as u64) as usize, 4.0, seed).unwrap();
        let a = brute_force_cd(&inst, OracleBudget::default()).unwrap();
        let b = cd_optimum(&inst);
        assert!(close(a, b), "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn cd_optimum_pinned() {
    let expected = [FROZEN_CD_0, FROZEN_CD_1, FROZEN_CD_2, FROZEN_CD_3];
    for (inst, want) in fixed_instances().iter().zip(expected) {
        let got = cd_optimum(inst);
        assert!(close(got, want), "{got} vs {want}");
        assert!(close(brute_force_cd(inst, OracleBudget::default()).unwrap(), want));
        assert!(solve_baseline(inst).total_cost >= want * (1.0 - 1e-9));
        for tree in TreeVariant::ALL {
            for router in Router::ALL {
                let c = solve_pd(inst, PdOptions::new(tree, router)).unwrap().total_cost;
                assert!(c >= want * (1.0 - 1e-9) && c <= 12.0 * want);
            }
        }
    }
}

// Produced by `cd_optimum` above.
const FROZEN_CD_0: f64 = 306.37550704141677;
const FROZEN_CD_1: f64 = 272.60099898341184;
// fast vehicle takes all four: (40.1 + 12) / 10
const FROZEN_CD_2: f64 = 5.21;
const FROZEN_CD_3: f64 = 5.931050667775875;

#[test]
fn tree_combination_oracles_agree() {
    for seed in 0..80u64 {
        let g = random_level_graph(1 + (seed % 6) as usize, 1 + (seed % 3) as usize, seed);
        let a = brute_force_tree_combination(&g, OracleBudget::default()).unwrap();
        let b = tc_optimum(&g);
        assert!(close(a, b), "seed {seed}: {a} vs {b}");
        let (_, trees) = combine(&g).unwrap();
        assert!(assembled_objective(&trees, &g) <= 2.0 * b * (1.0 + 1e-9));
    }
}

#[test]
fn tree_combination_pinned() {
    // a fast empty tree between two heavy slow trees
    let g = LevelGraph::from_matrix(
        vec![0, 1, 1],
        vec![0.0, 40.0, 60.0],
        vec![1.0, 0.25],
        vec![0.0, 5.0, 7.0, 5.0, 0.0, 12.0, 7.0, 12.0, 0.0],
    )
    .unwrap();
    let opt = tc_optimum(&g);
    assert!(close(opt, FROZEN_TC), "{opt}");
    assert!(close(brute_force_tree_combination(&g, OracleBudget::default()).unwrap(), FROZEN_TC));
    let (_, trees) = combine(&g).unwrap();
    let obj = assembled_objective(&trees, &g);
    assert!(obj >= opt * (1.0 - 1e-9) && obj <= 2.0 * opt);
}

// Everything joins the fast tree: (5 + 7 + 40 + 60) / 1.
const FROZEN_TC: f64 = 112.0;
