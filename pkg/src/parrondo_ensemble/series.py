"""Truncated Laurent series in a small parameter, with exact coefficients.

Used to take exact ``N -> oo`` limits: every lumped transition matrix is a
polynomial (or rational function) in ``eps = 1/N``, so running the Markov
machinery over ``Q((eps))`` and reading off the ``eps^0`` coefficient gives
the limit without evaluating at any finite ``N``.

A :class:`Series` is ``sum_k c_k eps^k + O(eps^prec)``.  Absolute precision is
tracked through every operation (as for p-adic numbers), so a result whose
needed coefficient is not determined is detected instead of silently wrong.
Exact polynomials carry ``prec = inf``.
"""

from __future__ import annotations

import contextlib
import math
from fractions import Fraction
from numbers import Rational

INF = math.inf

_default_precision = 12


@contextlib.contextmanager
def precision(k: int):
    """Temporarily set the relative precision used when inverting exact non-monomials."""
    global _default_precision
    old = _default_precision
    _default_precision = k
    try:
        yield
    finally:
        _default_precision = old


class PrecisionLost(ArithmeticError):
    """A requested coefficient lies beyond the known precision."""


class Series:
    __slots__ = ("start", "coeffs", "prec")

    def __init__(self, coeffs=(), start: int = 0, prec=INF):
        cs = [c if type(c) is Fraction else Fraction(c) for c in coeffs]
        if prec != INF:
            cs = cs[: max(0, prec - start)]
        i = 0
        while i < len(cs) and cs[i] == 0:
            i += 1
        cs = cs[i:]
        start += i
        if prec == INF:
            while cs and cs[-1] == 0:
                cs.pop()
        if not cs:
            start = prec
        self.start = start
        self.coeffs = cs
        self.prec = prec

    # -- constructors -------------------------------------------------------

    @classmethod
    def const(cls, c) -> "Series":
        return cls([c], 0, INF)

    @classmethod
    def eps(cls) -> "Series":
        return cls([1], 1, INF)

    @classmethod
    def geometric(cls, prec: int) -> "Series":
        """``1/(1 - eps)`` to absolute precision ``prec``."""
        return cls([1] * prec, 0, prec)

    # -- inspection ---------------------------------------------------------

    @property
    def val(self):
        """Valuation: index of the lowest known nonzero coefficient (``prec`` if none)."""
        return self.start

    @property
    def end(self):
        return self.start + len(self.coeffs) if self.coeffs else self.start

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int) -> Fraction:
        if k >= self.prec:
            raise PrecisionLost(f"coefficient of eps^{k} unknown (precision O(eps^{self.prec}))")
        if not self.coeffs or k < self.start or k >= self.end:
            return Fraction(0)
        return self.coeffs[k - self.start]

    def _c(self, k):
        if not self.coeffs or k < self.start or k >= self.end:
            return 0
        return self.coeffs[k - self.start]

    def leading(self) -> Fraction:
        if not self.coeffs:
            raise PrecisionLost("series is zero to known precision")
        return self.coeffs[0]

    def is_negative(self) -> bool:
        return bool(self.coeffs) and self.coeffs[0] < 0

    def shift(self, k: int) -> "Series":
        """Multiply by ``eps^k``."""
        return Series(self.coeffs, self.start + k, self.prec + k)

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _lift(x):
        if isinstance(x, Series):
            return x
        if isinstance(x, Rational):
            return Series([x], 0, INF) if x != 0 else Series((), 0, INF)
        return None

    def __add__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        a = self
        # adding a zero known at least as precisely changes nothing
        if not b.coeffs and b.prec >= a.prec:
            return a
        if not a.coeffs and a.prec >= b.prec:
            return b
        prec = min(a.prec, b.prec)
        lo = min(a.start, b.start)
        if lo == INF:
            return Series((), 0, prec)
        hi = prec if prec != INF else max(x.end for x in (a, b) if x.coeffs)
        if lo >= hi:
            return Series((), 0, prec)
        return Series([a._c(k) + b._c(k) for k in range(lo, hi)], lo, prec)

    __radd__ = __add__

    def __neg__(self):
        return Series([-c for c in self.coeffs], self.start, self.prec)

    def __pos__(self):
        return self

    def __sub__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        return self + (-b)

    def __rsub__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        return b + (-self)

    def __mul__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        a = self
        prec = min(a.start + b.prec, b.start + a.prec)
        if not a.coeffs or not b.coeffs:
            return Series((), 0, prec)
        lo = a.start + b.start
        hi = prec if prec != INF else a.end + b.end - 1
        n = hi - lo
        if n <= 0:
            return Series((), 0, prec)
        out = [0] * n
        bc = b.coeffs
        for i, ca in enumerate(a.coeffs):
            if i >= n:
                break
            if ca == 0:
                continue
            lim = min(len(bc), n - i)
            for j in range(lim):
                out[i + j] += ca * bc[j]
        return Series(out, lo, prec)

    __rmul__ = __mul__

    def inverse(self) -> "Series":
        if not self.coeffs:
            raise ZeroDivisionError("division by a series that is zero to known precision")
        v = self.start
        a = self.coeffs
        if self.prec == INF and len(a) == 1:
            return Series([1 / a[0]], -v, INF)
        rel = (self.prec - v) if self.prec != INF else _default_precision
        inv0 = 1 / a[0]
        b = [inv0]
        for k in range(1, rel):
            acc = 0
            for j in range(1, min(k, len(a) - 1) + 1):
                acc += a[j] * b[k - j]
            b.append(-inv0 * acc)
        return Series(b, -v, -v + rel)

    def __truediv__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        return self * b.inverse()

    def __rtruediv__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        return b * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Series.const(1)
        for _ in range(k):
            out = out * self
        return out

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        return (self - b).is_zero()

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None

    def __repr__(self):
        terms = [f"({c})*e^{self.start + i}" for i, c in enumerate(self.coeffs) if c != 0]
        tail = "" if self.prec == INF else f" + O(e^{self.prec})"
        return "Series(" + (" + ".join(terms) or "0") + tail + ")"


def valuation_key(x) -> float:
    """Pivot ranking for series: lower valuation means larger as ``eps -> 0``."""
    if isinstance(x, Series):
        return -x.val if x.coeffs else -INF
    return 0.0 if x != 0 else -INF
