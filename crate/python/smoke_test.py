"""Smoke test for the mscd_py extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/mscd_py-*.whl
"""

import json
import math

import mscd_py as m


def main():
    inst = m.Instance.gmm(400, 8, 2, 5, 6.0, seed=3)
    assert (inst.k, inst.m, inst.h) == (8, 400, 2)
    assert inst.depots[0][3] >= inst.depots[-1][3]

    base = m.solve_baseline(inst)
    for tree in m.TREES:
        for router in m.ROUTERS:
            sol, report, times = m.solve_pd_verified(inst, tree=tree, router=router)
            ev = sol.evaluate(inst)
            assert ev["feasible"], ev["violations"]
            assert math.isclose(ev["total_cost"], sol.total_cost, rel_tol=1e-9)
            assert report["failures"] == [], report["failures"]
            assert sol.algorithm == f"pd-{router}" and sol.params["tree"] == tree
            assert times["total_s"] >= 0.0
            print(f"{tree:>10} {router:>7}  cost {sol.total_cost:12.2f}  baseline/pd {base.total_cost / sol.total_cost:.3f}")
    assert inst.lower_bound() <= base.total_cost

    # round trips
    again = m.Instance.from_json(inst.to_json())
    assert again.requests == inst.requests
    sol = m.solve_pd(again)
    assert m.Solution.from_json(sol.to_json()).total_cost == sol.total_cost
    served = sorted(r for route in sol.routes for r in route.order)
    assert served == list(range(400))

    # the slow-depot trap
    wc = m.Instance.worst_case(200)
    assert m.solve_baseline(wc).total_cost > 100 * m.solve_pd(wc).total_cost

    # tiny hand-built instance against the exact optimum
    tiny = m.Instance([(0, 0, 4.0), (10, 0, 1.0)], [((1, 1), (3, 0)), ((9, 1), (8, 3)), ((5, 5), (6, 2))])
    opt = m.brute_force(tiny)
    for router in m.ROUTERS:
        assert opt <= m.solve_pd(tiny, router=router).total_cost + 1e-9

    # a relay: depot 0 carries package 0 half way, depot 1 finishes it
    line = m.Instance([(0, 0, 1.0), (4, 0, 1.0)], [((0, 0), (4, 0))])
    sched = {"drones": [
        {"depot": 0, "triples": [{"package": 0, "u": {"x": 0, "y": 0}, "w": {"x": 2, "y": 0}, "t": 0.0}]},
        {"depot": 1, "triples": [{"package": 0, "u": {"x": 2, "y": 0}, "w": {"x": 4, "y": 0}, "t": 2.0}]},
    ]}
    text = json.dumps(sched)
    plain = m.preemptive_to_nonpreemptive(text, line)
    assert plain.total_cost <= m.preemptive_cost(text, line) + 1e-9

    single = m.Instance([(0, 0, 2.0), (0, 0, 1.0)], [((1, 0), (2, 0)), ((0, 3), (1, 3))])
    assert single.lower_bound() <= m.solve_single_depot(single).total_cost

    for bad in (lambda: m.solve_pd(inst, tree="kruskal"), lambda: m.solve_pd(inst, mst_k=3.0),
                lambda: m.solve_single_depot(inst), lambda: m.Instance([(0, 0, -1.0)], [])):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    print("smoke test ok")


if __name__ == "__main__":
    main()
