import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axismcf.curves import Cones, DiscreteCurve, Limacon, Sphere, sample_initial, sphere_samples
from axismcf.stepper import DegeneracyError, SchemeParams, SnapshotSchedule, assemble, run, step


def scheme_residual(x0, x1, dt):
    """Direct evaluation of the scheme equations at the pair (x0 -> x1), row by row."""
    J = x0.shape[0] - 1
    h = 1 / J
    out = np.zeros((J + 1, 2))
    for j in range(1, J):
        d1o = (x0[j + 1] - x0[j - 1]) / (2 * h)
        a = d1o @ d1o
        d2 = (x1[j + 1] - 2 * x1[j] + x1[j - 1]) / h ** 2
        d1n = (x1[j + 1] - x1[j - 1]) / (2 * h)
        out[j] = (x1[j] - x0[j]) / dt - d2 / a + d1n[1] / (a * x0[j, 0]) * np.array([d1o[1], -d1o[0]])
    dp = (x0[1] - x0[0]) / h
    dm = (x0[J] - x0[J - 1]) / h
    out[0] = [x1[0, 0], (x1[1, 1] - x1[0, 1]) / h - h / 4 * (dp @ dp) * (x1[0, 1] - x0[0, 1]) / dt]
    out[J] = [x1[J, 0], (x1[J, 1] - x1[J - 1, 1]) / h + h / 4 * (dm @ dm) * (x1[J, 1] - x0[J, 1]) / dt]
    return out


@pytest.mark.parametrize("spec", [Sphere(), Limacon(), Cones()])
def test_assembled_rows_match_direct_equations(spec, rng):
    J, dt = 24, 1e-3
    p = SchemeParams(J=J, T=1.0, dt_mode=dt)
    x0 = sample_initial(spec, J).nodes
    x1 = x0 + 1e-2 * rng.normal(size=x0.shape)
    s = assemble(DiscreteCurve.from_nodes(x0), p)
    r = s.matvec(x1) - s.rhs
    ref = scheme_residual(x0, x1, dt)
    np.testing.assert_allclose(r, ref, rtol=1e-10, atol=1e-9)


def test_exact_sphere_residual_is_consistency_error():
    J = 4
    # dt = h would land exactly on the extinction time 1/4
    p = SchemeParams(J=J, T=1.0, dt_mode="h2")
    x0, x1 = sphere_samples(J, 0.0), sphere_samples(J, p.dt)
    s = assemble(DiscreteCurve.from_nodes(x0), p)
    r = s.matvec(x1) - s.rhs
    ref = scheme_residual(x0, x1, p.dt)
    np.testing.assert_allclose(np.abs(r), np.abs(ref), atol=1e-12)
    assert np.abs(r[1:-1]).max() <= 10 * (p.h ** 2 + p.dt)


def test_horizontal_segment_couples_only_e2_equation():
    J = 8
    x = sphere_samples(J, 0.0)
    x[5] = [0.6, x[3, 1]]  # d1 X at node 4 is horizontal
    s = assemble(DiscreteCurve.from_nodes(x), SchemeParams(J=J, T=1.0))
    assert s.lower[4, 0, 1] == 0.0 and s.upper[4, 0, 1] == 0.0
    assert s.lower[4, 1, 1] != s.upper[4, 1, 1]


def test_assembly_is_deterministic():
    c = sample_initial(Limacon(), 64)
    p = SchemeParams(J=64, T=1.0, dt_mode=1e-4)
    a, b = assemble(c, p), assemble(c, p)
    for name in ("lower", "diag", "upper", "rhs"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_one_step_local_error():
    for J in (16, 32, 64):
        p = SchemeParams(J=J, T=1.0, dt_mode="h")
        out = step(sample_initial(Sphere(), J), p, 0)
        err = np.abs(out.next.nodes - sphere_samples(J, p.dt)).max()
        assert err <= 10 * p.dt * (p.h ** 2 + p.dt)
        assert out.next.t == p.dt
        assert out.info.residual <= 1e-10


@given(st.sampled_from([Sphere(), Limacon(), Cones(), Sphere(0.7)]), st.integers(8, 96),
       st.floats(1e-5, 1e-2))
@settings(max_examples=30)
def test_reflection_equivariance(spec, J, dt):
    p = SchemeParams(J=J, T=1.0, dt_mode=dt)
    x = sample_initial(spec, J).nodes
    flip = np.array([1.0, -1.0])
    a = step(DiscreteCurve.from_nodes(x), p, 0).next.nodes
    b = step(DiscreteCurve.from_nodes(x * flip), p, 0).next.nodes
    np.testing.assert_allclose(b, a * flip, atol=1e-12 * max(1.0, np.abs(a).max()))


def test_richardson_two_half_steps():
    J = 64
    c = sample_initial(Sphere(), J)
    diffs = []
    for dt in (2e-3, 1e-3, 5e-4, 2.5e-4):
        p1, p2 = SchemeParams(J=J, T=1.0, dt_mode=dt), SchemeParams(J=J, T=1.0, dt_mode=2 * dt)
        two = step(step(c, p1, 0).next, p1, 1).next.nodes
        one = step(c, p2, 0).next.nodes
        diffs.append(np.abs(two - one).max())
    rates = [math.log2(a / b) for a, b in zip(diffs[:-1], diffs[1:])]
    assert all(1.8 <= r <= 2.2 for r in rates), rates


def test_axis_constraint_exact_every_step():
    p = SchemeParams(J=128, T=0.05, dt_mode=1e-3)
    seen = []
    run(Limacon(), p, observers=[lambda m, c: seen.append((c.nodes[0, 0], c.nodes[-1, 0])) or {}])
    assert len(seen) == p.n_steps + 1
    assert all(a == 0.0 and b == 0.0 for a, b in seen)


def test_sphere_stays_round():
    J = 128
    p = SchemeParams(J=J, T=0.125, dt_mode="h2")
    r = run(Sphere(), p)
    R = np.hypot(*r.final.nodes[1:-1].T)
    assert np.abs(R - math.sqrt(1 - 4 * 0.125)).max() <= 5 * (p.h ** 2 + p.dt)


def test_run_past_extinction_stops_early():
    p = SchemeParams(J=32, T=0.3, dt_mode="h2")
    r = run(Sphere(), p)
    assert r.termination in ("degeneracy", "singular_system")
    assert r.t_final < 0.3
    tail = r.series["min_radius"][-20:]
    assert all(b < a for a, b in zip(tail[:-1], tail[1:]))


def test_run_series_and_snapshots():
    p = SchemeParams(J=32, T=0.1, dt_mode=1e-3)
    sched = SnapshotSchedule(times=(0.0, 0.05, 0.1))
    got = []
    r = run(Sphere(), p, snapshots=sched, record_every=10, on_snapshot=lambda m, c: got.append(m))
    assert r.termination == "final_time" and r.steps_taken == 100
    assert got == [0, 50, 100] and len(r.snapshots) == 3
    assert r.series["m"] == list(range(0, 101, 10))
    assert all(b > a for a, b in zip(r.series["t"][:-1], r.series["t"][1:]))


def test_max_steps():
    r = run(Sphere(), SchemeParams(J=16, T=1.0, dt_mode=1e-3, max_steps=7))
    assert r.termination == "max_steps" and r.steps_taken == 7


def test_degeneracy_reports_node():
    x = sphere_samples(16, 0.0)
    x[5, 0] = 0.0
    with pytest.raises(DegeneracyError) as ei:
        assemble(DiscreteCurve.from_nodes(x), SchemeParams(J=16, T=1.0))
    assert ei.value.node == 5 and ei.value.kind == "axis"
    x = sphere_samples(16, 0.0)
    x[6] = x[8]
    with pytest.raises(DegeneracyError) as ei:
        assemble(DiscreteCurve.from_nodes(x), SchemeParams(J=16, T=1.0))
    assert ei.value.node == 7 and ei.value.kind == "length"


@pytest.mark.parametrize("kw", [dict(J=1, T=1.0), dict(J=8, T=0.0), dict(J=8, T=1.0, dt_mode="h3"),
                                dict(J=8, T=1.0, dt_mode=-1.0), dict(J=8, T=1.0, eps_axis=1e-3),
                                dict(J=8, T=1.0, eps_len=0.0), dict(J=8, T=1.0, max_steps=0)])
def test_param_validation(kw):
    with pytest.raises(ValueError):
        SchemeParams(**kw)


def test_step_counts():
    assert SchemeParams(J=32, T=0.125, dt_mode="h").n_steps == 4
    assert SchemeParams(J=512, T=0.125, dt_mode="h2").n_steps == 32768
    assert SchemeParams(J=8, T=0.1, dt_mode=0.03).n_steps == 4
