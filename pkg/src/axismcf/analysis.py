"""Error norms against the shrinking sphere, EOC tables, consistency residuals,
boundary diagnostics and area-decay fits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .curves import DiscreteCurve, ExtinctionError, Sphere, perp, sphere_exact, sphere_samples
from .grid_ops import max_norm, norm_0h, seminorm_1h, seminorm_2h
from .stepper import RunResult, SchemeParams, run


class NoExactSolutionError(ValueError):
    """Error norms were requested for initial data without a closed-form solution."""


@dataclass(frozen=True)
class ErrorRecord:
    m: int
    t: float
    e0: float    # |E|_{0,h}
    e1: float    # |E|_{1,h} (seminorm)
    e2: float    # |E|_{2,h}
    emax: float  # max_j |E_j|
    ed: float    # |(E^m - E^{m-1}) / dt|_{0,h}; zero at m = 0


def error_record(m: int, t: float, E: np.ndarray, E_prev: np.ndarray | None, dt: float) -> ErrorRecord:
    ed = 0.0 if E_prev is None else norm_0h((E - E_prev) / dt)
    return ErrorRecord(m, t, norm_0h(E), seminorm_1h(E), seminorm_2h(E), max_norm(E), ed)


class SphereErrorObserver:
    """Run observer accumulating :class:`ErrorRecord` values against the exact sphere.

    The observer must see every step (``record_every=1``) for the time-difference
    norm to be meaningful.
    """

    def __init__(self, p: SchemeParams, radius: float = 1.0):
        self.p = p
        self.radius = radius
        self.records: list[ErrorRecord] = []
        self._prev = None

    def __call__(self, m: int, c: DiscreteCurve):
        E = sphere_samples(c.J, m * self.p.dt, self.radius) - c.nodes
        rec = error_record(m, m * self.p.dt, E, self._prev, self.p.dt)
        self._prev = E
        self.records.append(rec)
        return {"e0": rec.e0, "e1": rec.e1, "e2": rec.e2, "emax": rec.emax, "ed": rec.ed}


def errors_of(curves: Sequence[DiscreteCurve], dt: float, radius: float = 1.0) -> list[ErrorRecord]:
    """Error records of a sequence ``X^0, X^1, ...`` of discrete curves at ``t_m = m dt``."""
    out, prev = [], None
    for m, c in enumerate(curves):
        E = sphere_samples(c.J, m * dt, radius) - c.nodes
        out.append(error_record(m, m * dt, E, prev, dt))
        prev = E
    return out


@dataclass
class ErrorSummary:
    J: int
    dt: float
    steps: int
    max_e0: float
    max_e1: float
    max_emax: float
    max_norm1: float
    summed: float  # dt * sum_{m>=1} (|E^m|_{2,h}^2 + |(E^m - E^{m-1})/dt|_{0,h}^2)
    termination: str
    records: list[ErrorRecord] = field(default_factory=list, repr=False)


def summarize(records: Sequence[ErrorRecord], J: int, dt: float, termination: str = "final_time") -> ErrorSummary:
    later = [r for r in records if r.m >= 1]
    return ErrorSummary(
        J=J, dt=dt, steps=len(later),
        max_e0=max(r.e0 for r in records),
        max_e1=max(r.e1 for r in records),
        max_emax=max(r.emax for r in records),
        max_norm1=max(math.hypot(r.e0, r.e1) for r in records),
        summed=dt * sum(r.e2 ** 2 + r.ed ** 2 for r in later),
        termination=termination,
        records=list(records),
    )


def error_series(p: SchemeParams, initial=None) -> tuple[ErrorSummary, RunResult]:
    """Run the scheme from sphere data and collect per-step error records."""
    initial = Sphere() if initial is None else initial
    if not isinstance(initial, Sphere):
        raise NoExactSolutionError(f"no exact solution is known for {type(initial).__name__} data")
    obs = SphereErrorObserver(p, initial.radius)
    res = run(initial, p, observers=[obs])
    return summarize(obs.records, p.J, p.dt, res.termination), res


# EOC ---------------------------------------------------------------------------

def eoc(coarse: float, fine: float, ratio: float = 2.0) -> float | None:
    if coarse > 0.0 and fine > 0.0:
        return math.log(coarse / fine) / math.log(ratio)
    return None


@dataclass
class EocRow:
    J: int
    errors: dict[str, float]
    eoc: dict[str, float | None]


NORMS: dict[str, Callable[[ErrorSummary], float]] = {
    "0h": lambda s: s.max_e0,
    "1h": lambda s: s.max_e1,
    "max": lambda s: s.max_emax,
    "summed": lambda s: s.summed,
}


def eoc_rows(Js: Sequence[int], values: dict[str, Sequence[float]]) -> list[EocRow]:
    Js = list(Js)
    for a, b in zip(Js[:-1], Js[1:]):
        if b != 2 * a:
            raise ValueError(f"J list must be strictly doubling, got {Js}")
    rows = []
    for i, J in enumerate(Js):
        errs = {k: float(v[i]) for k, v in values.items()}
        rates = {k: (eoc(v[i - 1], v[i]) if i > 0 else None) for k, v in values.items()}
        rows.append(EocRow(J, errs, rates))
    return rows


def eoc_table(Js: Sequence[int], dt_mode, T: float, norms: Sequence[str] = ("0h", "1h"),
              runner=None) -> tuple[list[EocRow], list[ErrorSummary]]:
    """Convergence sweep from unit sphere data.  ``runner`` maps a list of params to summaries."""
    params = [SchemeParams(J=J, T=T, dt_mode=dt_mode) for J in Js]
    if runner is None:
        summaries = [error_series(p)[0] for p in params]
    else:
        summaries = list(runner(params))
    for s in summaries:
        if s.termination != "final_time":
            raise RuntimeError(f"sweep member J={s.J} terminated early: {s.termination}")
    values = {n: [NORMS[n](s) for s in summaries] for n in norms}
    return eoc_rows(Js, values), summaries


def loglog_slope(h: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log(values)`` against ``log(h)``."""
    return float(np.polyfit(np.log(np.asarray(h, float)), np.log(np.asarray(values, float)), 1)[0])


# consistency ------------------------------------------------------------------

def consistency_residuals(h: float, dt: float, t_m: float) -> tuple[float, float]:
    """Scheme residuals of the exact sphere between ``t_m`` and ``t_m + dt``.

    Returns ``(max_j |R_j|, |R_0| + |R_J|)``.
    """
    if not t_m + dt < 0.25:
        raise ExtinctionError(f"t_m + dt = {t_m + dt:g} is not before the extinction time 1/4")
    J = round(1.0 / h)
    x0 = sphere_samples(J, t_m)
    x1 = sphere_samples(J, t_m + dt)
    h = 1.0 / J
    d1_old = (x0[2:] - x0[:-2]) / (2.0 * h)
    a = np.einsum("ij,ij->i", d1_old, d1_old)
    d2_new = (x1[2:] - 2.0 * x1[1:-1] + x1[:-2]) / (h * h)
    d1_new = (x1[2:] - x1[:-2]) / (2.0 * h)
    R = ((x1[1:-1] - x0[1:-1]) / dt - d2_new / a[:, None]
         + (d1_new[:, 1] / (a * x0[1:-1, 0]))[:, None] * perp(d1_old))
    dp0 = (x0[1] - x0[0]) / h
    dmJ = (x0[-1] - x0[-2]) / h
    R0 = (x1[1, 1] - x1[0, 1]) / h - 0.25 * h * (dp0 @ dp0) * (x1[0, 1] - x0[0, 1]) / dt
    RJ = (x1[-1, 1] - x1[-2, 1]) / h + 0.25 * h * (dmJ @ dmJ) * (x1[-1, 1] - x0[-1, 1]) / dt
    return float(np.max(np.hypot(R[:, 0], R[:, 1]))), float(abs(R0) + abs(RJ))


@dataclass
class ConsistencySweep:
    Js: list[int]
    interior: list[float]
    boundary: list[float]
    interior_slope: float
    boundary_slope: float


def consistency_sweep(Js: Sequence[int], dt_mode="h2", T: float = 0.125) -> ConsistencySweep:
    """Residuals at the last step before ``T`` for each ``J``, with log-log slopes in ``h``."""
    interior, boundary = [], []
    for J in Js:
        p = SchemeParams(J=J, T=T, dt_mode=dt_mode)
        t_m = (p.n_steps - 1) * p.dt
        i, b = consistency_residuals(p.h, p.dt, t_m)
        interior.append(i)
        boundary.append(b)
    h = [1.0 / J for J in Js]
    return ConsistencySweep(list(Js), interior, boundary,
                            loglog_slope(h, interior), loglog_slope(h, boundary))


# boundary behaviour of the exact solution ---------------------------------------------

def _one_sided(f: Callable, rho0: float, sign: float, h: float, t: float):
    """Derivatives at ``rho0`` from nodes ``rho0 + sign*k*h``, k = 0..3 (derivatives w.r.t. rho)."""
    f0, f1, f2, f3 = (np.asarray(f(rho0 + sign * k * h, t), float) for k in range(4))
    d1 = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h) * sign
    d2 = (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h)
    d3 = (-f0 + 3.0 * f1 - 3.0 * f2 + f3) / h ** 3 * sign
    return f0, d1, d2, d3


def boundary_diagnostics(t: float = 0.0, h: float = 1e-2, dt: float | None = None,
                         field: Callable = sphere_exact) -> dict:
    """Finite-difference defects of the axis relations of a smooth exact solution.

    At ``rho in {0, 1}`` estimates ``x_rr.e1``, ``x_rr.x_r``, ``x_rrr.e2`` and the
    defect of ``x_t = 2 (x_rr.e2) / |x_r|^2 e2``.  The first and second
    derivatives use second-order one-sided stencils, the third derivative a
    first-order four-point stencil, and ``x_t`` a central difference with step
    ``dt`` (default ``h``).
    """
    dt = h if dt is None else dt
    out = {"t": t, "h": h, "dt": dt}
    for rho0, sign in ((0.0, 1.0), (1.0, -1.0)):
        _, x_r, x_rr, x_rrr = _one_sided(field, rho0, sign, h, t)
        if t - dt >= 0.0:
            x_t = (np.asarray(field(rho0, t + dt)) - np.asarray(field(rho0, t - dt))) / (2.0 * dt)
        else:
            x_t = (-3.0 * np.asarray(field(rho0, t)) + 4.0 * np.asarray(field(rho0, t + dt))
                   - np.asarray(field(rho0, t + 2.0 * dt))) / (2.0 * dt)
        speed = 2.0 * x_rr[1] / float(x_r @ x_r) * np.array([0.0, 1.0])
        out[f"rho={rho0:g}"] = {
            "x_rr.e1": float(x_rr[0]),
            "x_rr.x_r": float(x_rr @ x_r),
            "x_rrr.e2": float(x_rrr[1]),
            "speed_defect": float(np.hypot(*(x_t - speed))),
        }
    rho = np.linspace(0.0, 1.0, int(round(1.0 / h)) + 1)[1:-1]
    x = np.asarray(field(rho, t))
    out["min_x1_over_rho(1-rho)"] = float(np.min(x[:, 0] / (rho * (1.0 - rho))))
    out["max_x1_over_rho(1-rho)"] = float(np.max(x[:, 0] / (rho * (1.0 - rho))))
    return out


def boundary_orders(t: float = 0.0, hs: Sequence[float] = (4e-2, 2e-2, 1e-2, 5e-3)) -> dict:
    """Observed convergence orders of the boundary defects as ``h`` (and ``dt = h``) decrease."""
    reports = [boundary_diagnostics(t, h) for h in hs]
    orders = {}
    for end in ("rho=0", "rho=1"):
        for key in ("x_rr.e1", "x_rr.x_r", "x_rrr.e2", "speed_defect"):
            vals = [abs(r[end][key]) for r in reports]
            if min(vals) > 1e-13:
                orders[f"{end}:{key}"] = loglog_slope(hs, vals)
            else:
                orders[f"{end}:{key}"] = None  # vanishes to rounding
    return {"h": list(hs), "reports": reports, "orders": orders}


# area decay -------------------------------------------------------------------

@dataclass(frozen=True)
class AreaFit:
    slope: float       # dA/dt of the fitted line
    extinction: float  # time at which the fitted line reaches zero
    residual: float    # rms misfit relative to max |A|


def area_decay_fit(t: Sequence[float], area: Sequence[float], min_samples: int = 10) -> AreaFit:
    """Least-squares line ``A(t) = slope (t - extinction)``."""
    t = np.asarray(t, float)
    A = np.asarray(area, float)
    if t.size < min_samples:
        raise ValueError(f"area series needs at least {min_samples} samples, got {t.size}")
    if np.ptp(A) == 0.0 or np.ptp(t) == 0.0:
        raise ValueError("degenerate area series (constant)")
    slope, icpt = np.polyfit(t, A, 1)
    if slope == 0.0:
        raise ValueError("area series has no decay")
    resid = A - (slope * t + icpt)
    return AreaFit(float(slope), float(-icpt / slope),
                   float(np.sqrt(np.mean(resid ** 2)) / np.max(np.abs(A))))


def as_dict(obj):
    return asdict(obj)
