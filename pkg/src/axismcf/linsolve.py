"""Block tridiagonal systems with 2x2 blocks.

Row ``j`` of the system reads ``L_j X_{j-1} + D_j X_j + U_j X_{j+1} = b_j`` with
``L_0 = U_J = 0``.  The primary solver is block-Thomas elimination; when a pivot
block is nearly singular we fall back to banded LU with partial pivoting on the
interleaved ``2 (J + 1)`` unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg

PIVOT_TOL = 1e-14
RESIDUAL_TOL = 1e-10


class SingularSystemError(RuntimeError):
    """The per-step linear system could not be solved reliably."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


@dataclass
class BlockTridiagonalSystem:
    lower: np.ndarray  # (J+1, 2, 2), lower[0] == 0
    diag: np.ndarray   # (J+1, 2, 2)
    upper: np.ndarray  # (J+1, 2, 2), upper[J] == 0
    rhs: np.ndarray    # (J+1, 2)

    @property
    def J(self) -> int:
        return self.diag.shape[0] - 1

    @classmethod
    def zeros(cls, J: int) -> "BlockTridiagonalSystem":
        return cls(np.zeros((J + 1, 2, 2)), np.zeros((J + 1, 2, 2)),
                   np.zeros((J + 1, 2, 2)), np.zeros((J + 1, 2)))

    def matvec(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.einsum("jab,jb->ja", self.diag, X)
        out[1:] += np.einsum("jab,jb->ja", self.lower[1:], X[:-1])
        out[:-1] += np.einsum("jab,jb->ja", self.upper[:-1], X[1:])
        return out

    def norm_inf(self) -> float:
        rows = (np.abs(self.lower).sum(axis=2) + np.abs(self.diag).sum(axis=2)
                + np.abs(self.upper).sum(axis=2))
        return float(rows.max())

    def relative_residual(self, X: np.ndarray) -> float:
        r = self.matvec(X) - self.rhs
        denom = self.norm_inf() * np.abs(X).max() + np.abs(self.rhs).max()
        if denom == 0.0:
            return 0.0
        return float(np.abs(r).max() / denom)

    def to_dense(self) -> np.ndarray:
        n = 2 * (self.J + 1)
        A = np.zeros((n, n))
        for j in range(self.J + 1):
            r = slice(2 * j, 2 * j + 2)
            A[r, r] = self.diag[j]
            if j > 0:
                A[r, 2 * j - 2:2 * j] = self.lower[j]
            if j < self.J:
                A[r, 2 * j + 2:2 * j + 4] = self.upper[j]
        return A

    def to_banded(self) -> np.ndarray:
        """LAPACK band storage with three sub- and three super-diagonals."""
        n = 2 * (self.J + 1)
        ab = np.zeros((7, n))
        for k in range(2):
            for l in range(2):
                # diagonal blocks
                rows = 2 * np.arange(self.J + 1) + k
                cols = 2 * np.arange(self.J + 1) + l
                ab[3 + rows - cols, cols] = self.diag[:, k, l]
                rows_l = rows[1:]
                cols_l = cols[:-1]
                ab[3 + rows_l - cols_l, cols_l] = self.lower[1:, k, l]
                rows_u = rows[:-1]
                cols_u = cols[1:]
                ab[3 + rows_u - cols_u, cols_u] = self.upper[:-1, k, l]
        return ab


@numba.njit(cache=True)
def _block_thomas(lower, diag, upper, rhs, tol):
    n = diag.shape[0]
    Dp = np.empty((n, 2, 2))
    y = np.empty((n, 2))
    X = np.empty((n, 2))
    min_ratio = np.inf

    a, b, c, d = diag[0, 0, 0], diag[0, 0, 1], diag[0, 1, 0], diag[0, 1, 1]
    Dp[0, 0, 0], Dp[0, 0, 1], Dp[0, 1, 0], Dp[0, 1, 1] = a, b, c, d
    y[0, 0], y[0, 1] = rhs[0, 0], rhs[0, 1]
    for j in range(n):
        if j > 0:
            # W = L_j Dp_{j-1}^{-1}, using the stored inverse from the previous row
            ia, ib, ic, id_ = Dp[j - 1, 0, 0], Dp[j - 1, 0, 1], Dp[j - 1, 1, 0], Dp[j - 1, 1, 1]
            l00, l01, l10, l11 = lower[j, 0, 0], lower[j, 0, 1], lower[j, 1, 0], lower[j, 1, 1]
            w00 = l00 * ia + l01 * ic
            w01 = l00 * ib + l01 * id_
            w10 = l10 * ia + l11 * ic
            w11 = l10 * ib + l11 * id_
            u00, u01, u10, u11 = (upper[j - 1, 0, 0], upper[j - 1, 0, 1],
                                  upper[j - 1, 1, 0], upper[j - 1, 1, 1])
            a = diag[j, 0, 0] - (w00 * u00 + w01 * u10)
            b = diag[j, 0, 1] - (w00 * u01 + w01 * u11)
            c = diag[j, 1, 0] - (w10 * u00 + w11 * u10)
            d = diag[j, 1, 1] - (w10 * u01 + w11 * u11)
            y[j, 0] = rhs[j, 0] - (w00 * y[j - 1, 0] + w01 * y[j - 1, 1])
            y[j, 1] = rhs[j, 1] - (w10 * y[j - 1, 0] + w11 * y[j - 1, 1])
        det = a * d - b * c
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale == 0.0:
            return X, j, 0.0
        ratio = abs(det) / (scale * scale)
        if ratio < min_ratio:
            min_ratio = ratio
        if ratio < tol:
            return X, j, ratio
        # store the inverse of the reduced pivot block
        Dp[j, 0, 0] = d / det
        Dp[j, 0, 1] = -b / det
        Dp[j, 1, 0] = -c / det
        Dp[j, 1, 1] = a / det

    j = n - 1
    X[j, 0] = Dp[j, 0, 0] * y[j, 0] + Dp[j, 0, 1] * y[j, 1]
    X[j, 1] = Dp[j, 1, 0] * y[j, 0] + Dp[j, 1, 1] * y[j, 1]
    for j in range(n - 2, -1, -1):
        r0 = y[j, 0] - (upper[j, 0, 0] * X[j + 1, 0] + upper[j, 0, 1] * X[j + 1, 1])
        r1 = y[j, 1] - (upper[j, 1, 0] * X[j + 1, 0] + upper[j, 1, 1] * X[j + 1, 1])
        X[j, 0] = Dp[j, 0, 0] * r0 + Dp[j, 0, 1] * r1
        X[j, 1] = Dp[j, 1, 0] * r0 + Dp[j, 1, 1] * r1
    return X, -1, min_ratio


@dataclass
class SolveInfo:
    method: str
    min_pivot_ratio: float
    residual: float


def block_thomas(sys: BlockTridiagonalSystem, tol: float = PIVOT_TOL):
    """Plain block-Thomas sweep.

    Returns ``(X, bad_row, min_pivot_ratio)``; ``bad_row`` is -1 on success and
    otherwise the row whose reduced pivot has ``|det| < tol * max|entry|^2``.
    """
    return _block_thomas(sys.lower, sys.diag, sys.upper, sys.rhs, tol)


def banded_lu(sys: BlockTridiagonalSystem) -> np.ndarray:
    ab = sys.to_banded()
    x = scipy.linalg.solve_banded((3, 3), ab, sys.rhs.reshape(-1), check_finite=True)
    return x.reshape(-1, 2)


def solve(sys: BlockTridiagonalSystem, check: bool = True) -> tuple[np.ndarray, SolveInfo]:
    X, bad, ratio = block_thomas(sys)
    method = "block-thomas"
    if bad >= 0:
        try:
            X = banded_lu(sys)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystemError(f"pivot block {bad} is singular ({exc})", row=int(bad)) from exc
        method = "banded-lu"
    if not np.all(np.isfinite(X)):
        raise SingularSystemError("non-finite solution", row=int(bad) if bad >= 0 else None)
    res = sys.relative_residual(X) if check else float("nan")
    if check and res > RESIDUAL_TOL:
        raise SingularSystemError(f"relative residual {res:.3e} exceeds {RESIDUAL_TOL:g}",
                                  row=int(bad) if bad >= 0 else None)
    return X, SolveInfo(method, float(ratio), res)


def dense_lu_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting on a dense matrix (test oracle)."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float).reshape(-1)
    n = A.shape[0]
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0.0:
            raise np.linalg.LinAlgError("singular matrix")
        if p != k:
            A[[k, p]] = A[[p, k]]
            b[[k, p]] = b[[p, k]]
        f = A[k + 1:, k] / A[k, k]
        A[k + 1:, k:] -= np.outer(f, A[k, k:])
        b[k + 1:] -= f * b[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - A[k, k + 1:] @ x[k + 1:]) / A[k, k]
    return x
