"""Acceptance checks, one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import functools
import math
import sys
import time

import numpy as np
import pytest

from axismcf import analysis as A
from axismcf.cli import fuzz_identities, sphere_baseline
from axismcf.curves import Cones, Limacon, Sphere, mean_curvature, sample_initial
from axismcf.linsolve import dense_lu_solve, solve
from axismcf.shrinker import find_profile, shrinker_residual
from axismcf.stepper import DegeneracyError, SchemeParams, SnapshotSchedule, assemble, run, step

JS = (32, 64, 128, 256, 512)
T = 0.125
TABLE1 = {"0h": (3.5744e-02, 2.0034e-02, 1.0690e-02, 5.5352e-03, 2.8185e-03),
          "1h": (1.1225e-01, 6.2934e-02, 3.3582e-02, 1.7389e-02, 8.8546e-03)}
TABLE2 = {"0h": (1.0024e-03, 2.5201e-04, 6.3093e-05, 1.5779e-05, 3.9451e-06),
          "1h": (3.1480e-03, 7.9165e-04, 1.9821e-04, 4.9571e-05, 1.2394e-05)}
EOC1 = (0.84, 0.91, 0.95, 0.97)
EOC2 = (1.99, 2.00, 2.00, 2.00)


@pytest.fixture
def emit(capsys):
    def _emit(ok: bool, name: str, detail: str):
        # bypass output capture so the line lands in the test log
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{name}] {detail}")
        return ok
    return _emit


@functools.lru_cache(maxsize=None)
def sweep(mode: str):
    t0 = time.perf_counter()
    rows, summaries = A.eoc_table(JS, mode, T)
    return rows, summaries, time.perf_counter() - t0


def table_check(mode, reference, eocs, budget):
    rows, _, secs = sweep(mode)
    worst_rel, worst_eoc = 0.0, 0.0
    for i, r in enumerate(rows):
        for norm in ("0h", "1h"):
            worst_rel = max(worst_rel, abs(r.errors[norm] / reference[norm][i] - 1.0))
            if i > 0:
                worst_eoc = max(worst_eoc, abs(r.eoc[norm] - eocs[i - 1]))
    ok = worst_rel <= 1e-3 and worst_eoc <= 0.02 and secs <= budget
    got = ", ".join(f"{r.eoc['0h']:.2f}/{r.eoc['1h']:.2f}" for r in rows[1:])
    return ok, (f"max rel dev {worst_rel:.2e} (tol 1e-3), max EOC dev {worst_eoc:.3f} (tol 0.02), "
                f"EOC 0h/1h {got}, {secs:.1f} s (budget {budget:.0f} s)")


def test_table1_reproduction(emit):
    ok, detail = table_check("h", TABLE1, EOC1, 60.0)
    assert emit(ok, "Table 1, dt = h", detail)


def test_table2_reproduction(emit):
    ok, detail = table_check("h2", TABLE2, EOC2, 600.0)
    assert emit(ok, "Table 2, dt = h^2", detail)


def test_summed_error_bound_slope(emit):
    _, summaries, _ = sweep("h2")
    slope = A.loglog_slope([1 / J for J in JS], [s.summed for s in summaries])
    ok = abs(slope - 4.0) <= 0.2
    assert emit(ok, "Summed error bound", f"log-log slope {slope:.3f} (target 4 +- 0.2)")


def test_consistency_orders(emit):
    sw = A.consistency_sweep(JS, "h2", T)
    ok = abs(sw.interior_slope - 2.0) <= 0.1 and abs(sw.boundary_slope - 3.0) <= 0.15
    assert emit(ok, "Consistency orders",
                f"interior slope {sw.interior_slope:.3f} (2 +- 0.1), "
                f"boundary slope {sw.boundary_slope:.3f} (3 +- 0.15)")


def oracle_agreement():
    worst, count = 0.0, 0
    for spec in (Sphere(), Limacon(), Cones()):
        for J in (4, 8, 16, 32, 64):
            for mode in ("h", "h2", 1e-4):
                p = SchemeParams(J=J, T=1.0, dt_mode=mode)
                c = sample_initial(spec, J)
                for m in range(4):
                    try:
                        sys_ = assemble(c, p)
                    except DegeneracyError:
                        break  # coarse grids with large steps may hit the axis quickly
                    X, _ = solve(sys_)
                    ref = dense_lu_solve(sys_.to_dense(), sys_.rhs).reshape(-1, 2)
                    worst = max(worst, np.abs(X - ref).max() / np.abs(ref).max())
                    count += 1
                    c = step(c, p, m).next
    return worst, count


def test_exact_identities_and_properties(emit):
    fz = fuzz_identities(1000, 4, 64, seed=0)
    worst, count = oracle_agreement()
    ok = fz["max_relative_sbp_defect"] <= 1e-12 and fz["min_slack"] >= -1e-12 and worst <= 1e-10
    assert emit(ok, "Exact identities",
                f"sbp defect {fz['max_relative_sbp_defect']:.1e} (<= 1e-12), min Sobolev slack "
                f"{fz['min_slack']:.1e} (>= -1e-12) over 1000 grids; block-Thomas vs dense LU "
                f"{worst:.1e} (<= 1e-10) over {count} systems")


def test_sphere_area_law(emit):
    J = 256
    p = SchemeParams(J=J, T=T, dt_mode="h2")
    r = run(Sphere(), p)
    t = np.array(r.series["t"])
    dev = np.abs(np.array(r.series["area"]) / (4 * math.pi * (1 - 4 * t)) - 1.0).max()
    ok = r.termination == "final_time" and dev <= 10 * p.h ** 2
    assert emit(ok, "Sphere area law", f"max rel deviation {dev:.3e} (<= 10 h^2 = {10 * p.h ** 2:.3e})")


def test_shrinker_pipeline(emit):
    embedded = find_profile(0, J=512)
    prof = find_profile(3, J=512)
    res, base = shrinker_residual(prof.curve), sphere_baseline(512)
    r = run(prof.curve, SchemeParams(J=512, T=1.2, dt_mode=1e-4), record_every=100,
            track_intersections=True)
    fit = A.area_decay_fit(r.series["t"], r.series["area"])
    checks = {"h0": abs(embedded.h0 - 2.0) <= 1e-6,
              "intersections": prof.intersections == 3,
              "residual": res <= 10 * base,
              "extinction": abs(fit.extinction - 1.0) <= 0.05}
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    assert emit(ok, "Shrinker pipeline",
                f"h0 = {embedded.h0:.12f}; 3-intersection profile residual {res:.3e} vs "
                f"10 x sphere(2) = {10 * base:.3e} (ratio {res / base:.0f}); "
                f"area fit extinction {fit.extinction:.4f} (1 +- 0.05, run ended: {r.termination} "
                f"at t = {r.t_final:.4f})" + (f"; failing: {', '.join(failed)}" if failed else ""))


def apex_curvature(c, width=32):
    H = np.abs(mean_curvature(c))
    return H[:width].max(), H[-width:].max()


def test_singular_data_robustness(emit):
    p = SchemeParams(J=1024, T=0.2, dt_mode=1e-4)
    lim = run(Limacon(1.5), p, record_every=100, track_intersections=True)
    lim_ok = lim.termination == "final_time" and lim.steps_taken == 2000
    pc = SchemeParams(J=512, T=0.01, dt_mode=1e-4)
    cones = run(Cones(45.0), pc, snapshots=SnapshotSchedule(times=(0.0, 0.01)))
    (n0, s0), (n1, s1) = apex_curvature(cones.snapshots[0]), apex_curvature(cones.snapshots[-1])
    cones_ok = cones.termination == "final_time" and n1 < n0 and s1 < s0
    ints = lim.series["self_intersections"]
    assert emit(lim_ok and cones_ok, "Singular-data robustness",
                f"limacon: {lim.steps_taken} steps, {lim.termination}, intersections {ints[0]} -> {ints[-1]}; "
                f"cones max |H| near apexes t=0: {n0:.1f}/{s0:.1f} -> t=0.01: {n1:.2f}/{s1:.2f}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
