use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mscd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mscd")).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn gen_small(dir: &Path) {
    let out = mscd(dir, &["gen", "--kind", "gmm", "--n", "200", "--k", "5", "--h", "2", "--seed", "4", "-o", "inst.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_solve_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_small(d);
    for (tree, router) in [("mst", "dfs"), ("prim", "greedy"), ("prim-mst-k", "dgreedy")] {
        let out = mscd(
            d,
            &["solve", "--instance", "inst.json", "--tree", tree, "--router", router, "-o", "sol.json", "--events", "ev.jsonl"],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let metrics = fs::read_to_string(d.join("sol.metrics.csv")).unwrap();
        assert!(metrics.lines().nth(1).unwrap().contains(&format!("pd-{router},{tree},{router}")));

        let out = mscd(d, &["verify", "--instance", "inst.json", "--solution", "sol.json", "--events", "ev.jsonl"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["evaluation"]["feasible"], true);
        assert_eq!(report["reproduced"], true);
        assert_eq!(report["events_match"], true);
        assert_eq!(report["verification"]["primal_within_twice_dual"], true);
    }
    let out = mscd(d, &["solve", "--instance", "inst.json", "--algo", "baseline", "-o", "b.json"]);
    assert_eq!(code(&out), 0);
    let out = mscd(d, &["verify", "--instance", "inst.json", "--solution", "b.json"]);
    assert_eq!(code(&out), 0);
    // depots are spread out here
    let out = mscd(d, &["solve", "--instance", "inst.json", "--algo", "single-depot"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn tampered_solution_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_small(d);
    assert_eq!(code(&mscd(d, &["solve", "--instance", "inst.json", "-o", "sol.json", "--events", "ev.jsonl"])), 0);

    let mut sol: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("sol.json")).unwrap()).unwrap();
    let routes = sol["routes"].as_array_mut().unwrap();
    let r = routes.iter_mut().find(|r| !r["order"].as_array().unwrap().is_empty()).unwrap();
    r["order"].as_array_mut().unwrap().pop();
    fs::write(d.join("bad.json"), sol.to_string()).unwrap();
    let out = mscd(d, &["verify", "--instance", "inst.json", "--solution", "bad.json"]);
    assert_eq!(code(&out), 2);

    // a log from another run does not match
    let events = fs::read_to_string(d.join("ev.jsonl")).unwrap();
    let cut: Vec<&str> = events.lines().collect();
    fs::write(d.join("short.jsonl"), cut[..cut.len() - 1].join("\n")).unwrap();
    let out = mscd(d, &["verify", "--instance", "inst.json", "--solution", "sol.json", "--events", "short.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_parameters_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_small(d);
    let cases: [&[&str]; 7] = [
        &["gen", "--n", "-3"],
        &["gen", "--kind", "spiral"],
        &["gen", "--kind", "uniform", "--n", "10", "--h", "0"],
        &["solve", "--instance", "inst.json", "--mst-k", "3"],
        &["solve", "--instance", "missing.json"],
        &["bench", "--axis", "n"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = mscd(d, args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&mscd(d, &["--help"])), 0);
}

#[test]
fn worst_case_sweep_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = mscd(
        d,
        &["bench", "--kind", "worst-case", "--axis", "n", "--values", "10,40", "--algos", "baseline,pd-dfs", "-o", "m.csv"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_path(d.join("m.ratios.csv")).unwrap();
    let header = rd.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "baseline_over_pd").unwrap();
    let ratios: Vec<f64> = rd.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 2);
    // the baseline loses a factor that grows with n
    assert!(ratios[0] > 5.0 && ratios[1] > 3.0 * ratios[0], "{ratios:?}");
}

#[test]
fn bench_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("sweep.toml"),
        "kind = \"uniform\"\nn = 80\nk = 4\nh = 2\naxis = \"k\"\nvalues = [3, 5]\nseeds = [1]\n\
         algorithms = [\"baseline\", \"pd-dfs\", \"pd-greedy\"]\ntrees = [\"mst\", \"prim\"]\n",
    )
    .unwrap();
    let out = mscd(d, &["bench", "--config", "sweep.toml", "-o", "out.csv", "--ratios", "r.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = fs::read_to_string(d.join("out.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,n,k,h,c,sigma,alpha,seed,algo,tree,router,cost,time_total_s,time_tree_s,time_pd_s,time_route_s,feasible"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 5);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert_eq!(fs::read_to_string(d.join("r.csv")).unwrap().lines().count(), 1 + 2 * 4);

    fs::write(d.join("broken.toml"), "axis = \"n\"\nvalues = [1]\nspeed = 3\n").unwrap();
    assert_eq!(code(&mscd(d, &["bench", "--config", "broken.toml"])), 1);
}
