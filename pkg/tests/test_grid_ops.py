import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from axismcf.grid_ops import (GridFunction, check_discrete_sobolev, check_sbp, d_minus, d_one, d_plus,
                              d_two, delta_minus, delta_one, delta_plus, delta_two, grid_points,
                              max_norm, norm_0h, norm_1h, sbp_scale, seminorm_1h, seminorm_2h)

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
# magnitudes whose squares stay clear of the subnormal range
scaled = st.floats(-1.0, 1.0).filter(lambda x: x == 0 or abs(x) > 1e-100)


@st.composite
def grid_fn(draw, J_min=2, J_max=64):
    J = draw(st.integers(J_min, J_max))
    return draw(arrays(np.float64, (J + 1, 2), elements=finite))


def quad(J):
    q = grid_points(J)
    return np.column_stack([q ** 2, np.zeros_like(q)])


# pointwise stencils against hand values ------------------------------------------

def test_quadratic_stencils_J4():
    v = quad(4)
    assert delta_minus(v, 1)[0] == pytest.approx(0.25)
    assert delta_one(v, 1)[0] == pytest.approx(0.5)
    assert delta_two(v, 1)[0] == pytest.approx(2.0)


def test_random_delta_minus_matches_formula(rng):
    v = rng.uniform(-1, 1, (9, 2))
    np.testing.assert_allclose(delta_minus(v, 3), (v[3] - v[2]) * 8)


def test_constant_has_zero_differences():
    v = np.tile([0.3, -1.2], (11, 1))
    for op in (d_minus, d_plus, d_one, d_two):
        assert np.abs(op(v)).max() == 0.0


@pytest.mark.parametrize("op,lo,hi", [(delta_minus, 1, 8), (delta_plus, 0, 7),
                                      (delta_one, 1, 7), (delta_two, 1, 7)])
def test_index_range(op, lo, hi):
    v = np.zeros((9, 2))
    op(v, lo)
    op(v, hi)
    with pytest.raises(IndexError):
        op(v, lo - 1)
    with pytest.raises(IndexError):
        op(v, hi + 1)


@given(grid_fn(J_min=3))
def test_whole_grid_matches_pointwise(v):
    J = v.shape[0] - 1
    for j in range(1, J):
        np.testing.assert_array_equal(d_one(v)[j - 1], delta_one(v, j))
        np.testing.assert_array_equal(d_two(v)[j - 1], delta_two(v, j))
        np.testing.assert_allclose(delta_one(v, j), 0.5 * (delta_plus(v, j) + delta_minus(v, j)),
                                   atol=1e-12 * J)


@given(st.integers(2, 64), finite, finite, finite, finite)
def test_affine_kernel_and_exactness(J, a0, a1, b0, b1):
    q = grid_points(J)
    v = np.column_stack([a0 + a1 * q, b0 + b1 * q])
    assert np.abs(d_two(v)).max() <= 1e-9 * J * J
    np.testing.assert_allclose(d_one(v), np.tile([a1, b1], (J - 1, 1)), atol=1e-10 * J)


def test_second_difference_exact_on_quadratics():
    np.testing.assert_allclose(d_two(quad(16))[:, 0], 2.0, rtol=1e-10)


# norms ------------------------------------------------------------------------------

def test_norm_values():
    one = np.tile([1.0, 0.0], (9, 1))
    assert norm_0h(one) == pytest.approx(1.0)
    assert seminorm_1h(one) == 0.0
    z = np.zeros((9, 2))
    assert norm_0h(z) == seminorm_1h(z) == norm_1h(z) == seminorm_2h(z) == max_norm(z) == 0.0
    q = grid_points(4)
    assert seminorm_1h(np.column_stack([q, 0 * q])) == pytest.approx(1.0)


def test_norm_definitions_direct(rng):
    J = 12
    v = rng.normal(size=(J + 1, 2))
    h = 1 / J
    sq = (v ** 2).sum(1)
    assert norm_0h(v) ** 2 == pytest.approx(h / 2 * sq[0] + h * sq[1:-1].sum() + h / 2 * sq[-1])
    assert seminorm_1h(v) ** 2 == pytest.approx(h * ((np.diff(v, axis=0) / h) ** 2).sum())
    d2 = (v[2:] - 2 * v[1:-1] + v[:-2]) / h ** 2
    assert seminorm_2h(v) ** 2 == pytest.approx(h * (d2 ** 2).sum())
    assert norm_1h(v) ** 2 == pytest.approx(norm_0h(v) ** 2 + seminorm_1h(v) ** 2)


@given(st.integers(2, 64).flatmap(lambda J: arrays(np.float64, (J + 1, 2), elements=scaled)),
       st.floats(-50, 50).filter(lambda c: c == 0 or abs(c) > 1e-50))
def test_norms_homogeneous(v, c):
    for n in (norm_0h, seminorm_1h, norm_1h, seminorm_2h, max_norm):
        assert n(c * v) == pytest.approx(abs(c) * n(v), rel=1e-12, abs=1e-300)


# summation by parts and Sobolev-type bounds --------------------------------------------

@given(grid_fn(), st.data())
def test_sbp_identity(v, data):
    w = data.draw(arrays(np.float64, v.shape, elements=finite))
    assert abs(check_sbp(v, w)) <= 1e-12 * max(sbp_scale(v, w), 1.0)


def test_sbp_known_cases(rng):
    assert check_sbp(np.zeros((5, 2)), np.zeros((5, 2))) == 0.0
    q = grid_points(16)
    v = np.column_stack([q, 0 * q])
    w = np.column_stack([q ** 2, 0 * q])
    assert abs(check_sbp(v, w)) <= 1e-12
    a, b = rng.uniform(-1, 1, (2, 17, 2))
    assert abs(check_sbp(a, b)) <= 1e-12


def test_sbp_mismatched_J():
    with pytest.raises(ValueError):
        check_sbp(np.zeros((5, 2)), np.zeros((6, 2)))


@given(grid_fn(J_min=4))
def test_sobolev_slacks_nonnegative(v):
    v = v.copy()
    v[0, 0] = v[-1, 0] = 0.0
    s = check_discrete_sobolev(v, require_axis=True)
    assert s.min() >= -1e-12


def test_sobolev_zero_and_axis_example():
    s = check_discrete_sobolev(np.zeros((9, 2)), require_axis=True)
    assert s.as_dict() == {"inverse": 0.0, "sup": 0.0, "sup_derivative": 0.0, "axis": 0.0}
    q = grid_points(32)
    v = np.column_stack([np.sin(np.pi * q), 0 * q])
    v[[0, -1], 0] = 0.0  # sin(pi) is not exactly zero in floating point
    s = check_discrete_sobolev(v, require_axis=True)
    assert s.axis >= 0.0


def test_axis_bound_requires_axis_endpoints():
    v = np.ones((9, 2))
    assert check_discrete_sobolev(v).axis is None
    with pytest.raises(ValueError):
        check_discrete_sobolev(v, require_axis=True)


def test_gridfunction_validation():
    g = GridFunction(np.zeros((5, 2)))
    assert g.J == 4 and g.h == 0.25
    np.testing.assert_allclose(g.q, [0, 0.25, 0.5, 0.75, 1])
    with pytest.raises(ValueError):
        GridFunction(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        GridFunction(np.zeros((5, 3)))
