"""Dense linear algebra over exact rationals, floats, or power series.

Matrices are numpy arrays.  Float matrices (``dtype=float64``) go through
LAPACK's LU with partial pivoting.  Anything else is an ``object`` array of
field elements (``Fraction``, or :class:`~parrondo_ensemble.series.Series`)
and goes through a pure-Python Gaussian elimination that is exact whenever the
element arithmetic is.
"""

from __future__ import annotations

import warnings
from fractions import Fraction

import numpy as np
import scipy.linalg

from .scalar import EXACT, FLOAT, check_mode

PIVOT_TOL = 1e-12


class SingularMatrixError(ArithmeticError):
    """The matrix has no inverse (to within the pivot tolerance in float mode)."""


def is_float(A) -> bool:
    return np.asarray(A).dtype.kind == "f"


def mode_of(A) -> str:
    return FLOAT if is_float(A) else EXACT


def matrix(rows, mode: str = EXACT) -> np.ndarray:
    """Build a matrix of the given mode from nested sequences."""
    check_mode(mode)
    if mode == FLOAT:
        return np.array(rows, dtype=float)
    arr = np.array(rows, dtype=object)
    return _fractionize(arr)


def _fractionize(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = Fraction(v) if isinstance(v, (int, Fraction)) else v
    return out


def zeros(shape, mode: str = EXACT) -> np.ndarray:
    if mode == FLOAT:
        return np.zeros(shape, dtype=float)
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def identity(n: int, mode: str = EXACT) -> np.ndarray:
    if mode == FLOAT:
        return np.eye(n)
    out = zeros((n, n), mode)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def like(A, value):
    """``value`` as a scalar of the same kind as the entries of ``A``."""
    return float(value) if is_float(A) else value


def to_float(A) -> np.ndarray:
    return np.asarray(A, dtype=float)


def mat_pow(A: np.ndarray, k: int) -> np.ndarray:
    """``A**k`` by repeated squaring (``k >= 0``)."""
    if k < 0:
        raise ValueError("negative matrix power")
    result = None
    base = A
    while True:
        if k & 1:
            result = base if result is None else result @ base
        k >>= 1
        if not k:
            break
        base = base @ base
    if result is None:
        n = A.shape[0]
        result = np.eye(n) if is_float(A) else _identity_like(A)
    return result


def _identity_like(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    one = A[0, 0] * 0 + 1
    zero_ = A[0, 0] * 0
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = one if i == j else zero_
    return out


def _default_key(x):
    return abs(x)


class LU:
    """LU factorization with row pivoting, reusable for many right-hand sides.

    ``pivot_key`` ranks candidate pivots in exact mode (largest wins); the
    default is ``abs``.  Power series use their own magnitude ordering.
    """

    def __init__(self, A, pivot_key=None, tol: float = PIVOT_TOL):
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"LU needs a square matrix, got shape {A.shape}")
        self.n = A.shape[0]
        self.float = is_float(A)
        if self.float:
            with warnings.catch_warnings():
                # singularity is reported below with our own error
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                self._lu, self._piv = scipy.linalg.lu_factor(A, check_finite=True)
            scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
            d = np.abs(np.diag(self._lu))
            if d.size and d.min() <= tol * scale:
                raise SingularMatrixError(
                    f"pivot {d.min():.3g} below tolerance {tol:g} (relative to {scale:.3g})"
                )
        else:
            self._factor_exact(A, pivot_key or _default_key)

    def _factor_exact(self, A, key):
        n = self.n
        M = A.copy()
        perm = list(range(n))
        for k in range(n):
            best, best_key = -1, None
            for i in range(k, n):
                a = M[i, k]
                if a != 0:
                    kk = key(a)
                    if best < 0 or kk > best_key:
                        best, best_key = i, kk
            if best < 0:
                raise SingularMatrixError(f"no nonzero pivot in column {k}")
            if best != k:
                M[[k, best]] = M[[best, k]]
                perm[k], perm[best] = perm[best], perm[k]
            inv = 1 / M[k, k]
            # only the pivot row's nonzero columns change the rows below
            cols = [j for j in range(k + 1, n) if M[k, j] != 0]
            tail = [M[k, j] for j in cols]
            for i in range(k + 1, n):
                a = M[i, k]
                if a != 0:
                    f = a * inv
                    M[i, k] = f
                    for j, v in zip(cols, tail):
                        M[i, j] = M[i, j] - f * v
        self._M = M
        self._perm = perm

    def solve(self, b):
        """Solve ``A x = b`` for a vector or a matrix of right-hand sides."""
        b = np.asarray(b)
        if self.float:
            return scipy.linalg.lu_solve((self._lu, self._piv), b.astype(float))
        M, n = self._M, self.n
        x = b[self._perm].copy()
        if x.dtype != object:
            x = x.astype(object)
        for i in range(1, n):
            row = M[i, :i]
            x[i] = x[i] - _dot(row, x[:i])
        for i in range(n - 1, -1, -1):
            if i + 1 < n:
                x[i] = x[i] - _dot(M[i, i + 1:], x[i + 1:])
            x[i] = x[i] / M[i, i]
        return x


def _dot(row, block):
    """``row @ block`` for object arrays, block being a vector or a matrix."""
    acc = None
    for a, v in zip(row, block):
        if a != 0:
            t = a * v
            acc = t if acc is None else acc + t
    if acc is None:
        return block[0] * 0
    return acc


def solve(A, b, pivot_key=None):
    return LU(A, pivot_key).solve(b)


def solve_left(A, b, pivot_key=None):
    """Solve the row-vector system ``x A = b``."""
    At = np.ascontiguousarray(np.asarray(A).T)
    return LU(At, pivot_key).solve(b)


def inverse(A, pivot_key=None) -> np.ndarray:
    A = np.asarray(A)
    n = A.shape[0]
    if is_float(A):
        return LU(A).solve(np.eye(n))
    return LU(A, pivot_key).solve(_identity_like(A))


def row_sums(A) -> np.ndarray:
    return np.asarray(A).sum(axis=1)


def ones(n: int, like_matrix) -> np.ndarray:
    if is_float(like_matrix):
        return np.ones(n)
    one = like_matrix.flat[0] * 0 + 1
    out = np.empty(n, dtype=object)
    out.fill(one)
    return out
