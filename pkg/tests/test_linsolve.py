import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from axismcf.curves import Cones, Limacon, Sphere, sample_initial
from axismcf.linsolve import (BlockTridiagonalSystem, SingularSystemError, banded_lu, block_thomas,
                              dense_lu_solve, solve)
from axismcf.stepper import SchemeParams, assemble, step


def random_system(rng, J, dominance=4.0):
    s = BlockTridiagonalSystem.zeros(J)
    s.lower[1:] = rng.uniform(-1, 1, (J, 2, 2))
    s.upper[:-1] = rng.uniform(-1, 1, (J, 2, 2))
    s.diag[:] = rng.uniform(-1, 1, (J + 1, 2, 2)) + dominance * np.eye(2)
    s.rhs[:] = rng.uniform(-1, 1, (J + 1, 2))
    return s


def rel(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


def test_dense_oracle_against_numpy(rng):
    A = rng.normal(size=(12, 12))
    b = rng.normal(size=12)
    np.testing.assert_allclose(dense_lu_solve(A, b), np.linalg.solve(A, b), rtol=1e-10)


def test_identity_blocks():
    s = BlockTridiagonalSystem.zeros(6)
    s.diag[:] = np.eye(2)
    s.rhs[:] = np.arange(14.0).reshape(7, 2)
    X, info = solve(s)
    np.testing.assert_array_equal(X, s.rhs)
    assert info.method == "block-thomas"


def test_dense_and_banded_layouts_agree(rng):
    s = random_system(rng, 7)
    x = rng.normal(size=(8, 2))
    np.testing.assert_allclose(s.to_dense() @ x.reshape(-1), s.matvec(x).reshape(-1), atol=1e-13)
    np.testing.assert_allclose(banded_lu(s), dense_lu_solve(s.to_dense(), s.rhs).reshape(-1, 2), rtol=1e-12)


@given(st.integers(1, 64), st.integers(0, 2 ** 31))
def test_random_systems_match_oracle(J, seed):
    s = random_system(np.random.default_rng(seed), J)
    X, info = solve(s)
    ref = dense_lu_solve(s.to_dense(), s.rhs).reshape(-1, 2)
    assert rel(X, ref) <= 1e-10
    assert info.residual <= 1e-10


def test_small_pivot_falls_back_to_banded(rng):
    # first pivot block singular, but the whole system is not
    s = random_system(rng, 5)
    s.diag[0] = [[1.0, 1.0], [1.0, 1.0]]
    X, info = solve(s)
    assert info.method == "banded-lu"
    np.testing.assert_allclose(X, dense_lu_solve(s.to_dense(), s.rhs).reshape(-1, 2), rtol=1e-10)
    assert block_thomas(s)[1] == 0


def test_singular_system_raises():
    s = BlockTridiagonalSystem.zeros(3)
    s.diag[:] = np.eye(2)
    s.diag[2] = 0.0
    with pytest.raises(SingularSystemError):
        solve(s)


@pytest.mark.parametrize("spec", [Sphere(), Limacon(), Cones()])
@pytest.mark.parametrize("J", [4, 8, 16, 32, 64])
def test_assembled_systems_match_oracle(spec, J):
    p = SchemeParams(J=J, T=0.05, dt_mode=1e-3)
    c = sample_initial(spec, J)
    for m in range(5):
        s = assemble(c, p)
        X, _ = solve(s)
        ref = dense_lu_solve(s.to_dense(), s.rhs).reshape(-1, 2)
        assert rel(X, ref) <= 1e-10
        c = step(c, p, m).next
