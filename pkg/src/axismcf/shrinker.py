"""Axisymmetric self-shrinker profiles by shooting.

A self-shrinker evolves as ``S(t) = sqrt(1 - t) S(0)``, so its profile curve
satisfies ``kappa - nu.e1 / x.e1 + (x.nu)/2 = 0``.  With arclength ``s``,
tangent ``(cos th, sin th)`` and ``nu = (sin th, -cos th)`` (so ``kappa = -th'``)
this becomes

    x1' = cos th,   x2' = sin th,
    th' = -( sin th / x1 - (x1 sin th - x2 cos th) / 2 ).

Shots start on the axis at ``(0, h0)`` heading in the ``+e1`` direction.  The
quotient ``sin th / x1`` is removable there and gives ``th'(0) = -h0/4``.  The
radius-2 sphere corresponds to ``h0 = 2``.

Closed profiles are found among shots that are mirror symmetric about the
plane ``x.e2 = 0``: if the shot meets that plane with a vertical tangent, the
reflected half closes the curve on the axis with a right angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .curves import DiscreteCurve, mean_curvature, normals, self_intersections

HIT_AXIS, MAX_LENGTH, BLOW_UP = "hit-axis", "max-length", "blow-up"
_TERMINATION = {0: MAX_LENGTH, 1: HIT_AXIS, 2: BLOW_UP}

DEFAULT_DS = 1e-4
DEFAULT_BRACKET = (0.1, 4.0)


class ProfileSearchError(RuntimeError):
    """No admissible shot was found inside the search bracket."""


@numba.njit(cache=True)
def _rhs(x1, x2, th):
    s = math.sin(th)
    c = math.cos(th)
    return c, s, -(s / x1 - 0.5 * (x1 * s - x2 * c))


@numba.njit(cache=True)
def _integrate(h0, ds, max_length, max_curvature):
    n = int(max_length / ds) + 2
    out = np.empty((n, 3))
    k0 = -0.25 * h0
    out[0, 0], out[0, 1], out[0, 2] = 0.0, h0, 0.0
    # series expansion across the axis singularity for the first step
    x1 = ds - k0 * k0 * ds ** 3 / 6.0
    x2 = h0 + 0.5 * k0 * ds * ds
    th = k0 * ds
    out[1, 0], out[1, 1], out[1, 2] = x1, x2, th
    i = 1
    h2 = 0.5 * ds
    while i < n - 1:
        a1, a2, a3 = _rhs(x1, x2, th)
        b1, b2, b3 = _rhs(x1 + h2 * a1, x2 + h2 * a2, th + h2 * a3)
        c1, c2, c3 = _rhs(x1 + h2 * b1, x2 + h2 * b2, th + h2 * b3)
        d1, d2, d3 = _rhs(x1 + ds * c1, x2 + ds * c2, th + ds * c3)
        y1 = x1 + ds / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        y2 = x2 + ds / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        y3 = th + ds / 6.0 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
        i += 1
        if y1 <= 0.0:
            # linear interpolation onto the axis
            f = x1 / (x1 - y1)
            out[i, 0] = 0.0
            out[i, 1] = x2 + f * (y2 - x2)
            out[i, 2] = th + f * (y3 - th)
            return out[:i + 1], 1
        if not (abs(a3) < max_curvature and math.isfinite(y3)):
            out[i, 0], out[i, 1], out[i, 2] = y1, y2, y3
            return out[:i + 1], 2
        out[i, 0], out[i, 1], out[i, 2] = y1, y2, y3
        x1, x2, th = y1, y2, y3
    return out[:i + 1], 0


@dataclass
class ShrinkerShot:
    h0: float
    ds: float
    trace: np.ndarray  # columns x1, x2, theta; row i at arclength i*ds (last row may be shorter)
    termination: str

    @property
    def points(self) -> np.ndarray:
        return self.trace[:, :2]

    @property
    def theta_end(self) -> float:
        return float(self.trace[-1, 2])

    @property
    def length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.points, axis=0).T)))

    def equator_crossings(self):
        """Crossings of ``x.e2 = 0`` as ``(index, fraction, x1, theta)`` tuples."""
        x2 = self.trace[:, 1]
        idx = np.flatnonzero((x2[:-1] > 0) & (x2[1:] <= 0) | (x2[:-1] < 0) & (x2[1:] >= 0))
        out = []
        for i in idx:
            f = x2[i] / (x2[i] - x2[i + 1])
            a, b = self.trace[i], self.trace[i + 1]
            out.append((int(i), float(f), float(a[0] + f * (b[0] - a[0])),
                        float(a[2] + f * (b[2] - a[2]))))
        return out


def shoot(h0: float, ds: float = DEFAULT_DS, max_length: float = 40.0,
          max_curvature: float = 1e8) -> ShrinkerShot:
    if not h0 > 0.0:
        raise ValueError(f"h0 must be positive, got {h0}")
    if not ds > 0.0:
        raise ValueError(f"ds must be positive, got {ds}")
    trace, code = _integrate(float(h0), float(ds), float(max_length), float(max_curvature))
    return ShrinkerShot(float(h0), float(ds), trace, _TERMINATION[int(code)])


def shot_curvature(shot: ShrinkerShot) -> np.ndarray:
    """``th'`` along the trace, evaluated from the ODE right-hand side."""
    x1, x2, th = shot.trace[1:-1].T
    return -(np.sin(th) / x1 - 0.5 * (x1 * np.sin(th) - x2 * np.cos(th)))


def equator_defect(h0: float, crossing: int, ds: float = DEFAULT_DS,
                   max_length: float = 25.0) -> float:
    """``cos th`` at the ``crossing``-th passage through ``x.e2 = 0`` (nan if absent)."""
    shot = shoot(h0, ds, max_length)
    cr = shot.equator_crossings()
    if len(cr) < crossing:
        return float("nan")
    return math.cos(cr[crossing - 1][3])


def mirrored_profile(h0: float, crossing: int, ds: float = DEFAULT_DS,
                     max_length: float = 25.0) -> np.ndarray:
    """Dense points of the closed profile: the shot up to the crossing plus its mirror image."""
    shot = shoot(h0, ds, max_length)
    cr = shot.equator_crossings()
    if len(cr) < crossing:
        raise ProfileSearchError(f"shot h0={h0} has only {len(cr)} equator crossings")
    i, f, x1c, _ = cr[crossing - 1]
    half = np.vstack([shot.points[:i + 1], [[x1c, 0.0]]])
    if f == 0.0:
        half = half[:-1]
    tail = half[-2::-1] * np.array([1.0, -1.0])
    full = np.vstack([half, tail])
    full[0, 0] = full[-1, 0] = 0.0
    return full


def _resample_uniform(points: np.ndarray, J: int) -> np.ndarray:
    seg = np.hypot(*np.diff(points, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.linspace(0.0, s[-1], J + 1)
    out = np.column_stack([np.interp(target, s, points[:, 0]), np.interp(target, s, points[:, 1])])
    out[0], out[-1] = points[0], points[-1]
    out[0, 0] = out[-1, 0] = 0.0
    # exact mirror symmetry of the closed profile
    half = out[::-1] * np.array([1.0, -1.0])
    return 0.5 * (out + half)


@dataclass
class Profile:
    h0: float
    crossing: int
    intersections: int
    curve: DiscreteCurve

    @property
    def nodes(self) -> np.ndarray:
        return self.curve.nodes


def _bisect(f, a, b, fa, tol, maxiter=200):
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = f(m)
        if not math.isfinite(fm):
            return None
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a < tol:
            break
    return 0.5 * (a + b)


def find_profile(target_intersections: int, bracket: tuple[float, float] = DEFAULT_BRACKET,
                 J: int = 512, ds: float = DEFAULT_DS, scan_points: int = 79,
                 max_crossing: int = 4, tol: float = 1e-12) -> Profile:
    """Closed shrinker profile with the requested number of self-intersections.

    The bracket is scanned on a uniform grid of ``h0`` values; every sign change
    of :func:`equator_defect` (for crossing indices up to ``max_crossing``) is
    bisected and the resulting closed profile, resampled to ``J + 1`` nodes,
    is accepted once its intersection count equals the target.
    """
    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise ProfileSearchError(f"empty or invalid bracket {bracket}")
    grid = np.linspace(lo, hi, scan_points)
    for k in range(1, max_crossing + 1):
        vals = np.array([equator_defect(h, k, ds) for h in grid])
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if not (math.isfinite(fa) and math.isfinite(fb)) or (fa > 0) == (fb > 0):
                continue
            root = _bisect(lambda h: equator_defect(h, k, ds), a, b, fa, tol)
            if root is None:
                continue
            pts = mirrored_profile(root, k, ds)
            nodes = _resample_uniform(pts, J)
            n = self_intersections(nodes)
            if n == target_intersections:
                return Profile(root, k, n, DiscreteCurve.from_nodes(nodes))
    raise ProfileSearchError(f"no profile with {target_intersections} self-intersections "
                             f"for h0 in {bracket}")


def shrinker_residual(c) -> float:
    """Max over interior nodes of ``|kappa - nu.e1/x.e1 + (x.nu)/2|``."""
    x = c.nodes if isinstance(c, DiscreteCurve) else np.asarray(c, dtype=float)
    H = mean_curvature(x)
    xnu = np.einsum("ij,ij->i", x[1:-1], normals(x))
    return float(np.max(np.abs(H + 0.5 * xnu)))
