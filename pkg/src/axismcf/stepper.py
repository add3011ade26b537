"""Semi-implicit finite difference time stepping for axisymmetric mean curvature flow.

One step maps ``X^m`` to ``X^{m+1}`` by solving, for interior nodes,

    X_j/dt - d2 X_j / |d1 X^m_j|^2
        + (d1 X_j . e2) / (|d1 X^m_j|^2 X^m_j.e1) (d1 X^m_j)^perp = X^m_j/dt

with the axis conditions ``X_0.e1 = X_J.e1 = 0`` and the closures

    d+X_0.e2 = (h/4) |d+X^m_0|^2 (X_0 - X^m_0).e2 / dt
    d-X_J.e2 = -(h/4) |d-X^m_J|^2 (X_J - X^m_J).e2 / dt

All coefficients are frozen at ``X^m`` so each step is one block tridiagonal
solve.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .curves import DiscreteCurve, ExtinctionError, InitialDataSpec, min_radius, sample_initial, self_intersections, surface_area
from .linsolve import BlockTridiagonalSystem, SingularSystemError, SolveInfo, solve


class DegeneracyError(RuntimeError):
    """Assembly precondition failed: a node reached the axis or a difference collapsed."""

    def __init__(self, message, node=None, kind=None):
        super().__init__(message)
        self.node = node
        self.kind = kind


@dataclass(frozen=True)
class SchemeParams:
    """Discretisation parameters.

    ``dt_mode`` is ``"h"`` (dt = h), ``"h2"`` (dt = h^2) or a positive float
    (fixed dt).
    """

    J: int
    T: float
    dt_mode: str | float = "h"
    eps_axis: float = 1e-12
    eps_len: float = 1e-12
    max_steps: int | None = None

    def __post_init__(self):
        if not isinstance(self.J, (int, np.integer)) or self.J < 2:
            raise ValueError(f"J must be an integer >= 2, got {self.J!r}")
        if not self.T > 0.0:
            raise ValueError(f"T must be positive, got {self.T!r}")
        if isinstance(self.dt_mode, str):
            if self.dt_mode not in ("h", "h2"):
                raise ValueError(f"dt_mode must be 'h', 'h2' or a positive number, got {self.dt_mode!r}")
        elif not float(self.dt_mode) > 0.0:
            raise ValueError(f"fixed time step must be positive, got {self.dt_mode!r}")
        for name in ("eps_axis", "eps_len"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-6):
                raise ValueError(f"{name} must lie in (0, 1e-6], got {v!r}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError(f"max_steps must be positive, got {self.max_steps!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.J

    @property
    def dt(self) -> float:
        if self.dt_mode == "h":
            return self.h
        if self.dt_mode == "h2":
            return self.h * self.h
        return float(self.dt_mode)

    @property
    def n_steps(self) -> int:
        """Number of steps ``M`` to reach ``T``; ``T/dt`` rounded when it is an integer."""
        ratio = self.T / self.dt
        M = round(ratio)
        if abs(ratio - M) > 1e-9 * max(ratio, 1.0):
            M = math.ceil(ratio)
        return max(int(M), 1)


@dataclass
class StepOutcome:
    next: DiscreteCurve
    info: SolveInfo


def _check_preconditions(X: np.ndarray, p: SchemeParams):
    J = X.shape[0] - 1
    r = X[1:-1, 0]
    bad = np.flatnonzero(~(r > p.eps_axis))
    if bad.size:
        j = int(bad[0]) + 1
        raise DegeneracyError(f"interior node {j} reached the axis (x.e1 = {X[j, 0]:.3e})",
                              node=j, kind="axis")
    d1 = (X[2:] - X[:-2]) * (0.5 * J)
    n1 = np.hypot(d1[:, 0], d1[:, 1])
    bad = np.flatnonzero(~(n1 > p.eps_len))
    if bad.size:
        j = int(bad[0]) + 1
        raise DegeneracyError(f"central difference collapsed at node {j}", node=j, kind="length")
    for j, k in ((0, 1), (J, J - 1)):
        if not np.hypot(*(X[k] - X[j])) * J > p.eps_len:
            raise DegeneracyError(f"boundary difference collapsed at node {j}", node=j, kind="length")
    if not np.all(np.isfinite(X)):
        raise DegeneracyError("non-finite node positions", kind="nonfinite")


def assemble(Xm: DiscreteCurve, p: SchemeParams, check: bool = True) -> BlockTridiagonalSystem:
    X = Xm.nodes
    J = X.shape[0] - 1
    if J != p.J:
        raise ValueError(f"curve has J = {J} but parameters have J = {p.J}")
    if check:
        _check_preconditions(X, p)
    h = 1.0 / J
    dt = p.dt
    sys = BlockTridiagonalSystem.zeros(J)

    d1 = (X[2:] - X[:-2]) * (0.5 * J)
    a = d1[:, 0] ** 2 + d1[:, 1] ** 2
    r = X[1:-1, 0]
    diff = 1.0 / (h * h * a)
    coup = 1.0 / (2.0 * h * a * r)
    pe1, pe2 = d1[:, 1], -d1[:, 0]  # (d1 X)^perp

    inner = slice(1, J)
    for k in range(2):
        sys.diag[inner, k, k] = 1.0 / dt + 2.0 * diff
        sys.lower[inner, k, k] = -diff
        sys.upper[inner, k, k] = -diff
    # the perp term only sees the e2 component of d1 X^{m+1}
    sys.lower[inner, 0, 1] -= coup * pe1
    sys.lower[inner, 1, 1] -= coup * pe2
    sys.upper[inner, 0, 1] += coup * pe1
    sys.upper[inner, 1, 1] += coup * pe2
    sys.rhs[inner] = X[1:-1] / dt

    dp0 = (X[1] - X[0]) * J
    c0 = 0.25 * h * (dp0 @ dp0)
    sys.diag[0, 0, 0] = 1.0
    sys.diag[0, 1, 1] = -1.0 / h - c0 / dt
    sys.upper[0, 1, 1] = 1.0 / h
    sys.rhs[0] = (0.0, -c0 * X[0, 1] / dt)

    dmJ = (X[J] - X[J - 1]) * J
    cJ = 0.25 * h * (dmJ @ dmJ)
    sys.diag[J, 0, 0] = 1.0
    sys.diag[J, 1, 1] = 1.0 / h + cJ / dt
    sys.lower[J, 1, 1] = -1.0 / h
    sys.rhs[J] = (0.0, cJ * X[J, 1] / dt)
    return sys


def step(Xm: DiscreteCurve, p: SchemeParams, m: int | None = None) -> StepOutcome:
    """Advance one time step; ``m`` (the index of ``Xm``) fixes the new time stamp as ``(m+1) dt``."""
    sys = assemble(Xm, p)
    Xn, info = solve(sys)
    Xn[0, 0] = 0.0
    Xn[-1, 0] = 0.0
    t = (m + 1) * p.dt if m is not None else Xm.t + p.dt
    return StepOutcome(DiscreteCurve.from_nodes(Xn, t, enforce_axis=False), info)


# time loop ---------------------------------------------------------------------

@dataclass
class SnapshotSchedule:
    """Snapshot cadence: every ``every`` steps and/or at the listed ``times``."""

    every: int | None = None
    times: Sequence[float] = ()
    include_initial: bool = True
    include_final: bool = True

    def due_steps(self, p: SchemeParams) -> set[int]:
        steps = set()
        M = p.n_steps if p.max_steps is None else min(p.n_steps, p.max_steps)
        if self.every:
            steps.update(range(0, M + 1, self.every))
        for t in self.times:
            steps.add(int(round(t / p.dt)))
        if self.include_initial:
            steps.add(0)
        if self.include_final:
            steps.add(M)
        return steps


@dataclass
class RunResult:
    """Outcome of :func:`run` before it is turned into a report."""

    params: SchemeParams
    termination: str
    message: str
    steps_taken: int
    t_final: float
    series: dict[str, list]
    snapshots: list[DiscreteCurve]
    final: DiscreteCurve
    wall_time: float
    min_pivot_ratio: float = float("inf")
    max_residual: float = 0.0
    extra: dict = field(default_factory=dict)


Observer = Callable[[int, DiscreteCurve], Mapping[str, float]]


def run(initial: InitialDataSpec | DiscreteCurve, p: SchemeParams,
        observers: Sequence[Observer] = (),
        snapshots: SnapshotSchedule | None = None,
        record_every: int = 1,
        track_intersections: bool = False,
        on_snapshot: Callable[[int, DiscreteCurve], None] | None = None) -> RunResult:
    """Advance until ``T``, ``max_steps`` or a degeneracy / singular-system event.

    An observer raising :class:`ExtinctionError` (its reference solution no
    longer exists) ends the run with termination ``"extinction"``.

    Observers are called as ``obs(m, curve)`` at every recorded step and return
    a mapping of extra series values.  Snapshots are kept in memory and also
    passed to ``on_snapshot`` as they are produced.
    """
    t0 = time.perf_counter()
    curve = initial if isinstance(initial, DiscreteCurve) else sample_initial(initial, p.J)
    if curve.J != p.J:
        raise ValueError(f"initial curve has J = {curve.J}, parameters have J = {p.J}")
    curve = DiscreteCurve.from_nodes(curve.nodes, 0.0)
    M = p.n_steps
    limit = M if p.max_steps is None else min(M, p.max_steps)
    due = snapshots.due_steps(p) if snapshots is not None else set()

    series: dict[str, list] = {"m": [], "t": [], "area": [], "min_radius": []}
    if track_intersections:
        series["self_intersections"] = []
    snaps: list[DiscreteCurve] = []

    def record(m, c, force=False):
        if not force and m % record_every and m != limit:
            return True
        # observers run first so a failing one leaves the series rectangular
        extra = {}
        for obs in observers:
            extra.update(obs(m, c))
        series["m"].append(m)
        series["t"].append(c.t)
        series["area"].append(surface_area(c))
        series["min_radius"].append(min_radius(c))
        if track_intersections:
            series["self_intersections"].append(self_intersections(c))
        for k, v in extra.items():
            series.setdefault(k, []).append(v)
        return True

    def snapshot(m, c):
        if m in due:
            snaps.append(c)
            if on_snapshot is not None:
                on_snapshot(m, c)

    record(0, curve, force=True)
    snapshot(0, curve)
    termination, message = "final_time", ""
    min_ratio, max_res = float("inf"), 0.0
    m = 0
    while m < limit:
        try:
            out = step(curve, p, m)
        except DegeneracyError as exc:
            termination, message = "degeneracy", str(exc)
            break
        except SingularSystemError as exc:
            termination, message = "singular_system", str(exc)
            break
        if not np.all(np.isfinite(out.next.nodes)):
            termination, message = "singular_system", "non-finite solution"
            break
        min_ratio = min(min_ratio, out.info.min_pivot_ratio)
        max_res = max(max_res, out.info.residual)
        try:
            record(m + 1, out.next)
        except ExtinctionError as exc:
            # an observer's reference solution ceased to exist
            termination, message = "extinction", str(exc)
            break
        m += 1
        curve = out.next
        snapshot(m, curve)
    else:
        if limit < M:
            termination = "max_steps"
    if series["m"][-1] != m:
        record(m, curve, force=True)
    if termination != "final_time" and termination != "max_steps" and (not snaps or snaps[-1] is not curve):
        snaps.append(curve)
        if on_snapshot is not None:
            on_snapshot(m, curve)

    return RunResult(params=p, termination=termination, message=message, steps_taken=m,
                     t_final=curve.t, series=series, snapshots=snaps, final=curve,
                     wall_time=time.perf_counter() - t0, min_pivot_ratio=min_ratio,
                     max_residual=max_res)
