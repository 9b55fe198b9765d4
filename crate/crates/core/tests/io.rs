use std::fs;

use mscd::instance::{gen_gmm, load_instance, Format};
use mscd::routing::{evaluate, solve_pd, PdOptions, PreemptiveSchedule};
use mscd::{Error, Solution};

fn write_courier_fixture(dir: &std::path::Path) {
    fs::write(dir.join("depots.csv"), "id,lat,lng,speed\n7,30.1,120.2,2.0\n3,30.3,120.0,5.0\n").unwrap();
    fs::write(
        dir.join("orders.csv"),
        "id,pickup_lat,pickup_lng,dropoff_lat,dropoff_lng\n\
         10,30.15,120.25,30.2,120.1\n\
         11,30.0,120.05,30.05,120.3\n\
         12,30.25,120.15,30.1,120.0\n",
    )
    .unwrap();
}

#[test]
fn courier_csv_maps_lng_to_x_and_sorts_by_speed() {
    let dir = tempfile::tempdir().unwrap();
    write_courier_fixture(dir.path());
    let inst = load_instance(dir.path(), Format::CourierCsv).unwrap();
    assert_eq!(inst.k(), 2);
    assert_eq!(inst.m(), 3);
    assert_eq!(inst.depots[0].id, 3);
    assert_eq!(inst.depots[0].speed, 5.0);
    assert_eq!((inst.depots[1].location.x, inst.depots[1].location.y), (120.2, 30.1));
    let r = &inst.requests[1];
    assert_eq!(r.id, 11);
    assert_eq!((r.source.x, r.source.y, r.target.x, r.target.y), (120.05, 30.0, 120.3, 30.05));

    // a path to one of the files works too
    let again = load_instance(dir.path().join("orders.csv"), Format::CourierCsv).unwrap();
    assert_eq!(again.requests, inst.requests);

    let sol = solve_pd(&inst, PdOptions::default()).unwrap();
    assert!(evaluate(&sol, &inst).feasible);
}

#[test]
fn courier_csv_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_instance(dir.path(), Format::CourierCsv), Err(Error::Io(_) | Error::Parse(_))));
    fs::write(dir.path().join("depots.csv"), "id,lat,lng,speed\n1,0,0,abc\n").unwrap();
    fs::write(dir.path().join("orders.csv"), "id,pickup_lat,pickup_lng,dropoff_lat,dropoff_lng\n").unwrap();
    assert!(matches!(load_instance(dir.path(), Format::CourierCsv), Err(Error::Parse(_))));
    fs::write(dir.path().join("depots.csv"), "id,lat,lng,speed\n1,0,0,-1\n").unwrap();
    assert!(matches!(load_instance(dir.path(), Format::CourierCsv), Err(Error::InvalidParam(_))));
}

#[test]
fn instance_and_solution_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_gmm(40, 4, 2, 3, 6.0, 5.0, 8).unwrap();
    let path = dir.path().join("inst.json");
    inst.save(&path).unwrap();
    let back = load_instance(&path, Format::Json).unwrap();
    assert_eq!(back.depots, inst.depots);
    assert_eq!(back.requests, inst.requests);
    assert_eq!(back.meta, inst.meta);

    let sol = solve_pd(&inst, PdOptions::default()).unwrap();
    let sol_path = dir.path().join("sol.json");
    fs::write(&sol_path, sol.to_json().unwrap()).unwrap();
    let sol_back = Solution::from_json(&fs::read_to_string(&sol_path).unwrap()).unwrap();
    assert_eq!(sol_back, sol);
    assert!(evaluate(&sol_back, &back).feasible);
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"depots\": [}").unwrap();
    assert!(matches!(load_instance(&path, Format::Json), Err(Error::Parse(_))));
    assert!(matches!(PreemptiveSchedule::from_json("[1,2"), Err(Error::Parse(_))));
    assert!(matches!(load_instance(dir.path().join("missing.json"), Format::Json), Err(Error::Io(_))));
}
