from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parrondo_ensemble import linalg
from parrondo_ensemble.series import PrecisionLost, Series, precision, valuation_key

small = st.integers(min_value=-9, max_value=9)


@st.composite
def rational_systems(draw, n_max=6):
    n = draw(st.integers(2, n_max))
    rows = [[F(draw(small), draw(st.integers(1, 7))) for _ in range(n)] for _ in range(n)]
    b = [F(draw(small), draw(st.integers(1, 5))) for _ in range(n)]
    return linalg.matrix(rows), np.array(b, dtype=object)


@settings(max_examples=60, deadline=None)
@given(rational_systems())
def test_exact_solve_matches_numpy(system):
    A, b = system
    Af = A.astype(float)
    if np.linalg.matrix_rank(Af) < A.shape[0]:
        with pytest.raises(linalg.SingularMatrixError):
            linalg.solve(A, b)
        return
    x = linalg.solve(A, b)
    assert all(isinstance(v, F) for v in x)
    assert np.all(A @ x == b)
    if np.linalg.cond(Af) < 1e6:
        np.testing.assert_allclose(x.astype(float), np.linalg.solve(Af, b.astype(float)), rtol=1e-8, atol=1e-10)
    y = linalg.solve_left(A, b)
    assert np.all(y @ A == b)


def test_float_lu_and_singular():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(linalg.inverse(A) @ A, np.eye(2), atol=1e-14)
    with pytest.raises(linalg.SingularMatrixError):
        linalg.LU(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(linalg.SingularMatrixError):
        linalg.LU(linalg.matrix([[1, 2], [2, 4]]))


def test_exact_inverse_and_powers():
    A = linalg.matrix([[F(1, 2), F(1, 2)], [F(1, 3), F(2, 3)]])
    Ai = linalg.inverse(A)
    assert np.all(A @ Ai == linalg.identity(2))
    assert np.all(linalg.mat_pow(A, 3) == A @ A @ A)
    assert np.all(linalg.mat_pow(A, 0) == linalg.identity(2))
    assert list(linalg.ones(2, A)) == [1, 1]
    assert linalg.to_float(A).dtype == float


def test_series_arithmetic():
    e = Series.eps()
    x = 1 + 2 * e
    assert (x * x).coeffs == [1, 4, 4]
    with precision(6):
        inv = 1 / (1 - e)
    assert [inv.coefficient(k) for k in range(6)] == [1] * 6
    with pytest.raises(PrecisionLost):
        inv.coefficient(6)
    assert (x - x).is_zero()
    assert (e.shift(-1)).coefficient(0) == 1
    g = Series.geometric(4)
    assert (g * (1 - e)).coefficient(0) == 1 and (g * (1 - e)).coefficient(3) == 0
    assert valuation_key(e) < valuation_key(Series.const(3))


def test_series_lu_solve():
    # (I + eps J) x = 1 has solution 1/(1 + eps) per coordinate when J has unit row sums
    e = Series([1], 1, 8)
    one = Series.const(1)
    half = Series.const(F(1, 2))
    A = np.array([[one + e * half, e * half], [e * half, one + e * half]], dtype=object)
    b = np.array([one, one], dtype=object)
    x = linalg.solve(A, b, valuation_key)
    for k in range(7):
        assert x[0].coefficient(k) == (-1) ** k
