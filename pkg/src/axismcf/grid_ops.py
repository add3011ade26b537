"""Grid functions on the uniform grid of [0, 1] and their difference operators.

A grid function holds ``J + 1`` planar vectors ``v_0 .. v_J`` at the nodes
``q_j = j h`` with ``h = 1 / J``.  The whole-grid operators return arrays whose
first entry corresponds to the first admissible index:

=============  ==============  ==================================
operator       indices         formula
=============  ==============  ==================================
``d_minus``    ``1 .. J``      ``(v_j - v_{j-1}) / h``
``d_plus``     ``0 .. J-1``    ``(v_{j+1} - v_j) / h``
``d_one``      ``1 .. J-1``    ``(v_{j+1} - v_{j-1}) / (2 h)``
``d_two``      ``1 .. J-1``    ``(v_{j+1} - 2 v_j + v_{j-1}) / h^2``
=============  ==============  ==================================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridFunction:
    """``J + 1`` planar vectors on the uniform grid ``q_j = j / J``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = np.column_stack([v, np.zeros_like(v)])
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError(f"grid function values must have shape (J+1, 2), got {v.shape}")
        if v.shape[0] < 3:
            raise ValueError(f"grid function needs J >= 2, got J = {v.shape[0] - 1}")
        object.__setattr__(self, "values", v)

    @property
    def J(self) -> int:
        return self.values.shape[0] - 1

    @property
    def h(self) -> float:
        return 1.0 / self.J

    @property
    def q(self) -> np.ndarray:
        return np.arange(self.J + 1) * self.h

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, j):
        return self.values[j]


def as_values(v) -> np.ndarray:
    if isinstance(v, GridFunction):
        return v.values
    return GridFunction(v).values


def grid_points(J: int) -> np.ndarray:
    return np.arange(J + 1) / J


# whole-grid operators -------------------------------------------------------

def d_minus(v) -> np.ndarray:
    x = as_values(v)
    J = x.shape[0] - 1
    return (x[1:] - x[:-1]) * J


def d_plus(v) -> np.ndarray:
    # same numbers as d_minus, shifted one index to the left
    return d_minus(v)


def d_one(v) -> np.ndarray:
    x = as_values(v)
    J = x.shape[0] - 1
    return (x[2:] - x[:-2]) * (0.5 * J)


def d_two(v) -> np.ndarray:
    x = as_values(v)
    J = x.shape[0] - 1
    return (x[2:] - 2.0 * x[1:-1] + x[:-2]) * (J * J)


# pointwise operators ---------------------------------------------------------

def _check_index(j, lo, hi, name):
    if not (lo <= j <= hi):
        raise IndexError(f"{name} is defined for {lo} <= j <= {hi}, got j = {j}")


def delta_minus(v, j: int) -> np.ndarray:
    x = as_values(v)
    J = x.shape[0] - 1
    _check_index(j, 1, J, "delta_minus")
    return (x[j] - x[j - 1]) * J


def delta_plus(v, j: int) -> np.ndarray:
    x = as_values(v)
    J = x.shape[0] - 1
    _check_index(j, 0, J - 1, "delta_plus")
    return (x[j + 1] - x[j]) * J


def delta_one(v, j: int) -> np.ndarray:
    x = as_values(v)
    J = x.shape[0] - 1
    _check_index(j, 1, J - 1, "delta_one")
    return (x[j + 1] - x[j - 1]) * (0.5 * J)


def delta_two(v, j: int) -> np.ndarray:
    x = as_values(v)
    J = x.shape[0] - 1
    _check_index(j, 1, J - 1, "delta_two")
    return (x[j + 1] - 2.0 * x[j] + x[j - 1]) * (J * J)


# norms -----------------------------------------------------------------------

def norm_0h(v) -> float:
    """Trapezoidal discrete L2 norm."""
    x = as_values(v)
    h = 1.0 / (x.shape[0] - 1)
    sq = np.einsum("ij,ij->i", x, x)
    return float(np.sqrt(h * (0.5 * sq[0] + sq[1:-1].sum() + 0.5 * sq[-1])))


def seminorm_1h(v) -> float:
    dm = d_minus(v)
    h = 1.0 / dm.shape[0]
    return float(np.sqrt(h * np.sum(dm * dm)))


def norm_1h(v) -> float:
    return float(np.hypot(norm_0h(v), seminorm_1h(v)))


def seminorm_2h(v) -> float:
    d2 = d_two(v)
    h = 1.0 / (d2.shape[0] + 1)
    return float(np.sqrt(h * np.sum(d2 * d2)))


def max_norm(v) -> float:
    x = as_values(v)
    return float(np.max(np.hypot(x[:, 0], x[:, 1])))


# identities and inequalities ------------------------------------------------

def check_sbp(v, w) -> float:
    """Defect of the summation-by-parts identity; zero up to rounding.

    Returns ``h sum_{1..J} d-v.d-w + h sum_{1..J-1} v.d2w - v_J.d-w_J + v_0.d+w_0``.
    """
    x, y = as_values(v), as_values(w)
    if x.shape != y.shape:
        raise ValueError(f"grid functions differ in J: {x.shape[0] - 1} vs {y.shape[0] - 1}")
    J = x.shape[0] - 1
    h = 1.0 / J
    dmv, dmw = d_minus(x), d_minus(y)
    d2w = d_two(y)
    return float(
        h * np.sum(dmv * dmw)
        + h * np.sum(x[1:-1] * d2w)
        - x[J] @ dmw[J - 1]
        + x[0] @ dmw[0]
    )


def sbp_scale(v, w) -> float:
    """Magnitude of the terms entering :func:`check_sbp`, for relative tolerances."""
    x, y = as_values(v), as_values(w)
    J = x.shape[0] - 1
    h = 1.0 / J
    dmv, dmw = d_minus(x), d_minus(y)
    return float(
        h * np.sum(np.abs(dmv * dmw))
        + h * np.sum(np.abs(x[1:-1] * d_two(y)))
        + abs(x[J] @ dmw[J - 1])
        + abs(x[0] @ dmw[0])
    )


@dataclass(frozen=True)
class SobolevSlacks:
    """Non-negative slacks (rhs - lhs) of the four discrete Sobolev-type bounds.

    ``axis`` is the minimum over j of the slack of
    ``|v_j.e1| <= 2 q_j (1 - q_j) max_k |d-v_k|``; it is ``None`` when the
    endpoints are not on the axis.
    """

    inverse: float
    sup: float
    sup_derivative: float
    axis: float | None

    def as_dict(self):
        return {"inverse": self.inverse, "sup": self.sup,
                "sup_derivative": self.sup_derivative, "axis": self.axis}

    def min(self) -> float:
        vals = [self.inverse, self.sup, self.sup_derivative]
        if self.axis is not None:
            vals.append(self.axis)
        return min(vals)


def check_discrete_sobolev(v, require_axis: bool = False) -> SobolevSlacks:
    x = as_values(v)
    J = x.shape[0] - 1
    h = 1.0 / J
    n0, n1, n2 = norm_0h(x), seminorm_1h(x), seminorm_2h(x)
    dm = d_minus(x)
    dm_abs = np.hypot(dm[:, 0], dm[:, 1])
    max_dm = float(dm_abs.max())
    max_v2 = float(np.max(np.einsum("ij,ij->i", x, x)))

    inverse = h ** -0.5 * n1 - max_dm
    sup = n0 * n0 + 2.0 * n0 * n1 - max_v2
    sup_derivative = n1 * n1 + 2.0 * n1 * n2 - max_dm * max_dm

    on_axis = x[0, 0] == 0.0 and x[J, 0] == 0.0
    if not on_axis:
        if require_axis:
            raise ValueError("axis bound needs v_0.e1 = v_J.e1 = 0")
        axis = None
    else:
        q = grid_points(J)
        axis = float(np.min(2.0 * q * (1.0 - q) * max_dm - np.abs(x[:, 0])))
    return SobolevSlacks(float(inverse), float(sup), float(sup_derivative), axis)
