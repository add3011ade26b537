"""Generating curves, the exact shrinking sphere, initial data and observables.

The generating curve lives in the half plane ``x.e1 >= 0`` and is rotated
about the e2-axis.  Both endpoints lie on the axis.  Orientation follows the
scheme: the unit normal is ``nu = tau^perp`` with ``(a, b)^perp = (b, -a)``,
so a curve running clockwise from the north pole has inward pointing normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.optimize

from .grid_ops import GridFunction, d_minus, d_one, d_two, grid_points


class ExtinctionError(ValueError):
    """Raised when the exact sphere is requested at or after its extinction time."""


@dataclass(frozen=True)
class DiscreteCurve:
    """Polyline of ``J + 1`` nodes at time ``t``; endpoints on the rotation axis."""

    x: GridFunction
    t: float = 0.0

    def __post_init__(self):
        if not isinstance(self.x, GridFunction):
            object.__setattr__(self, "x", GridFunction(self.x))

    @classmethod
    def from_nodes(cls, nodes, t: float = 0.0, enforce_axis: bool = True) -> "DiscreteCurve":
        v = np.array(nodes, dtype=float)
        if enforce_axis:
            v[0, 0] = 0.0
            v[-1, 0] = 0.0
        return cls(GridFunction(v), float(t))

    @property
    def nodes(self) -> np.ndarray:
        return self.x.values

    @property
    def J(self) -> int:
        return self.x.J

    @property
    def h(self) -> float:
        return self.x.h

    def on_axis(self) -> bool:
        return self.nodes[0, 0] == 0.0 and self.nodes[-1, 0] == 0.0

    def validate(self):
        if not self.on_axis():
            raise ValueError("curve endpoints must satisfy x.e1 = 0")
        interior = self.nodes[1:-1, 0]
        bad = np.flatnonzero(interior < 0.0)
        if bad.size:
            raise ValueError(f"curve leaves the half plane x.e1 >= 0 at node {bad[0] + 1}")
        return self


# exact solution ---------------------------------------------------------------

def sphere_radius(t: float, radius: float = 1.0) -> float:
    """Radius ``sqrt(radius^2 - 4t)`` of the shrinking sphere."""
    if radius * radius - 4.0 * t <= 0.0:
        raise ExtinctionError(f"sphere of radius {radius} is extinct at t = {radius**2 / 4}, "
                              f"requested t = {t}")
    return math.sqrt(radius * radius - 4.0 * t)


def sphere_exact(rho, t: float, radius: float = 1.0) -> np.ndarray:
    """Exact shrinking sphere, ``sqrt(1 - 4t) (sin pi rho, cos pi rho)`` for unit radius.

    ``rho`` may be a scalar (returns shape ``(2,)``) or an array (shape ``(n, 2)``).
    """
    r = sphere_radius(t, radius)
    rho = np.asarray(rho, dtype=float)
    out = r * np.stack([np.sin(np.pi * rho), np.cos(np.pi * rho)], axis=-1)
    if out.ndim == 2:
        out[rho == 0.0, 0] = 0.0
        out[rho == 1.0, 0] = 0.0
    elif rho in (0.0, 1.0):
        out[0] = 0.0
    return out


def sphere_samples(J: int, t: float, radius: float = 1.0) -> np.ndarray:
    """Nodal samples of the exact sphere; endpoints exactly on the axis."""
    return sphere_exact(grid_points(J), t, radius)


# initial data families --------------------------------------------------------

@dataclass(frozen=True)
class Sphere:
    radius: float = 1.0
    family: str = field(default="sphere", init=False)


@dataclass(frozen=True)
class Limacon:
    """Sphere with an inscribed equatorial loop (torus inside the sphere).

    Polar angle ``phi = pi/2 + (u - a sin u)/2`` with ``u = 2 pi (rho - 1/2)``.
    For ``a > 1`` the angle runs backwards near the equator; the two branches
    meet again at ``u = +-u1`` where ``u1 = a sin u1``.  The radius
    ``r = (1 - depth (cos u - cos u1)) / (1 + depth (1 + cos u1))`` pulls the
    backward branch inwards so the curve crosses itself on the plane
    ``x.e2 = 0``, and puts both poles at distance 1 from the origin.
    """

    a: float = 1.5
    depth: float = 0.3
    family: str = field(default="limacon", init=False)


@dataclass(frozen=True)
class Cones:
    """Outward cone at the north pole, inward cone at the south pole.

    Straight segments meeting the axis at ``angle_deg`` joined by a semicircle
    of radius ``radius``.  ``top`` is the height of the north apex and
    ``slant`` the length of the upper straight segment.
    """

    angle_deg: float = 45.0
    top: float = 1.0
    radius: float = 0.8
    slant: float = 1.9
    family: str = field(default="cones", init=False)


@dataclass(frozen=True)
class ShrinkerProfile:
    """Self-shrinker profile, read from ``path`` or computed by the shrinker search."""

    path: str | None = None
    intersections: int = 3
    family: str = field(default="shrinker_profile", init=False)


@dataclass(frozen=True)
class Custom:
    nodes: tuple | None = None
    path: str | None = None
    family: str = field(default="custom", init=False)


InitialDataSpec = Union[Sphere, Limacon, Cones, ShrinkerProfile, Custom]

FAMILIES = {"sphere": Sphere, "limacon": Limacon, "cones": Cones,
            "shrinker_profile": ShrinkerProfile, "custom": Custom}


def limacon_crossing(a: float) -> float:
    """Positive root ``u1`` of ``u = a sin u`` (requires ``a > 1``)."""
    if not a > 1.0:
        raise ValueError(f"limacon loop needs a > 1, got {a}")
    return float(scipy.optimize.brentq(lambda v: v - a * math.sin(v), 1e-9, math.pi))


def limacon_nodes(J: int, a: float = 1.5, depth: float = 0.3) -> np.ndarray:
    u1 = limacon_crossing(a)
    u = 2.0 * np.pi * (grid_points(J) - 0.5)
    phi = 0.5 * np.pi + 0.5 * (u - a * np.sin(u))
    r = (1.0 - depth * (np.cos(u) - math.cos(u1))) / (1.0 + depth * (1.0 + math.cos(u1)))
    if np.any(r <= 0.0):
        raise ValueError(f"limacon depth {depth} is too large: radius becomes non-positive")
    nodes = np.column_stack([r * np.sin(phi), r * np.cos(phi)])
    nodes[0] = (0.0, 1.0)
    nodes[-1] = (0.0, -1.0)
    return nodes


def cones_geometry(angle_deg=45.0, top=1.0, radius=0.8, slant=1.9):
    """Break points of the cone profile: apex, arc start, arc centre, arc end, apex."""
    alpha = math.radians(angle_deg)
    if not (0.0 < alpha < 0.5 * math.pi):
        raise ValueError(f"cone angle must lie in (0, 90) degrees, got {angle_deg}")
    d = np.array([math.sin(alpha), -math.cos(alpha)])
    n = np.array([d[1], -d[0]])
    a0 = np.array([0.0, top])
    p1 = a0 + slant * d
    centre = p1 + radius * n
    p2 = p1 + 2.0 * radius * n
    if p2[0] <= 0.0:
        raise ValueError("cone parameters put the lower segment on the wrong side of the axis "
                         "(need slant*sin(angle) > 2*radius*cos(angle))")
    low = p2[0] / math.sin(alpha)
    a1 = p2 - low * d
    a1[0] = 0.0
    return a0, p1, centre, p2, a1, low


def cones_nodes(J: int, angle_deg=45.0, top=1.0, radius=0.8, slant=1.9) -> np.ndarray:
    a0, p1, centre, p2, a1, low = cones_geometry(angle_deg, top, radius, slant)
    alpha = math.radians(angle_deg)
    d = np.array([math.sin(alpha), -math.cos(alpha)])
    arc = math.pi * radius
    total = slant + arc + low
    s = grid_points(J) * total
    nodes = np.empty((J + 1, 2))
    seg1 = s <= slant
    seg3 = s >= slant + arc
    seg2 = ~seg1 & ~seg3
    nodes[seg1] = a0 + s[seg1, None] * d
    # clockwise rotation about the centre, starting at p1
    start = p1 - centre
    psi = -(s[seg2] - slant) / radius
    c, sn = np.cos(psi), np.sin(psi)
    nodes[seg2] = centre + np.column_stack([c * start[0] - sn * start[1],
                                            sn * start[0] + c * start[1]])
    nodes[seg3] = p2 - (s[seg3, None] - slant - arc) * d
    nodes[0] = a0
    nodes[-1] = a1
    return nodes


def resample_arclength(points: np.ndarray, J: int) -> np.ndarray:
    """Piecewise-linear resampling to ``J + 1`` nodes equidistant in arclength."""
    points = np.asarray(points, dtype=float)
    seg = np.hypot(*np.diff(points, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = grid_points(J) * s[-1]
    out = np.column_stack([np.interp(target, s, points[:, 0]),
                           np.interp(target, s, points[:, 1])])
    out[0] = points[0]
    out[-1] = points[-1]
    out[0, 0] = out[-1, 0] = 0.0
    return out


def sample_initial(spec: InitialDataSpec, J: int) -> DiscreteCurve:
    if J < 2:
        raise ValueError(f"J must be >= 2, got {J}")
    if isinstance(spec, Sphere):
        if spec.radius <= 0.0:
            raise ValueError("sphere radius must be positive")
        nodes = sphere_samples(J, 0.0, spec.radius)
    elif isinstance(spec, Limacon):
        nodes = limacon_nodes(J, spec.a, spec.depth)
    elif isinstance(spec, Cones):
        nodes = cones_nodes(J, spec.angle_deg, spec.top, spec.radius, spec.slant)
    elif isinstance(spec, ShrinkerProfile):
        if spec.path is not None:
            from .io import read_curve_csv
            nodes = read_curve_csv(spec.path)
        else:
            from .shrinker import find_profile
            nodes = find_profile(spec.intersections, J=J).nodes
        if nodes.shape[0] != J + 1:
            nodes = resample_arclength(nodes, J)
    elif isinstance(spec, Custom):
        if spec.path is not None:
            from .io import read_curve_csv
            nodes = read_curve_csv(spec.path)
        elif spec.nodes is not None:
            nodes = np.asarray(spec.nodes, dtype=float)
        else:
            raise ValueError("custom initial data needs 'nodes' or 'path'")
        if nodes.shape[0] != J + 1:
            nodes = resample_arclength(nodes, J)
    else:
        raise TypeError(f"unknown initial data specification {spec!r}")
    return DiscreteCurve.from_nodes(nodes).validate()


# observables --------------------------------------------------------------------

def _nodes(c) -> np.ndarray:
    if isinstance(c, DiscreteCurve):
        return c.nodes
    if isinstance(c, GridFunction):
        return c.values
    return np.asarray(c, dtype=float)


def surface_area(c) -> float:
    """Area of the surface of revolution, ``2 pi h sum_{j=1..J} x_j.e1 |d-x_j|``."""
    x = _nodes(c)
    J = x.shape[0] - 1
    dm = d_minus(x)
    return float(2.0 * np.pi / J * np.sum(x[1:, 0] * np.hypot(dm[:, 0], dm[:, 1])))


def min_radius(c) -> float:
    return float(np.min(_nodes(c)[1:-1, 0]))


def _orient(p, q, r):
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) \
        - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])


def self_intersections(c, tol: float = 1e-12) -> int:
    """Number of transversal crossings among non-adjacent polyline segments."""
    x = _nodes(c)
    n = x.shape[0] - 1
    count = 0
    for i in range(n - 2):
        a, b = x[i], x[i + 1]
        c0, c1 = x[i + 2:n], x[i + 3:n + 1]
        o1, o2 = _orient(a, b, c0), _orient(a, b, c1)
        o3, o4 = _orient(c0, c1, a), _orient(c0, c1, b)
        hit = ((o1 > tol) & (o2 < -tol) | (o1 < -tol) & (o2 > tol)) \
            & ((o3 > tol) & (o4 < -tol) | (o3 < -tol) & (o4 > tol))
        count += int(np.count_nonzero(hit))
    return count


def perp(v: np.ndarray) -> np.ndarray:
    """Clockwise quarter rotation ``(a, b) -> (b, -a)``."""
    v = np.asarray(v)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def normals(c) -> np.ndarray:
    """Unit normals ``(d1 x)^perp / |d1 x|`` at interior nodes."""
    d1 = d_one(_nodes(c))
    return perp(d1) / np.hypot(d1[:, 0], d1[:, 1])[:, None]


def curvature(c) -> np.ndarray:
    """Discrete curvature ``d2 x . nu / |d1 x|^2`` at interior nodes."""
    x = _nodes(c)
    d1 = d_one(x)
    nu = normals(x)
    return np.einsum("ij,ij->i", d_two(x), nu) / np.einsum("ij,ij->i", d1, d1)


def mean_curvature(c) -> np.ndarray:
    """Sum of principal curvatures ``kappa - nu.e1 / x.e1`` at interior nodes."""
    x = _nodes(c)
    if np.any(x[1:-1, 0] == 0.0):
        raise ValueError("mean curvature needs interior nodes off the axis")
    return curvature(x) - normals(x)[:, 0] / x[1:-1, 0]
