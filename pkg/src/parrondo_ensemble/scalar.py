"""Dual-mode scalars: exact rationals (``Fraction``) or binary floats.

Every computation in the package runs in one of two modes.  In ``"exact"``
mode all arithmetic is over :class:`fractions.Fraction`; in ``"float"`` mode
it is over IEEE doubles.  The mode is usually inferred from the inputs: ints
and Fractions mean exact, anything else means float.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)


def infer_mode(*values) -> str:
    """Return ``"exact"`` if every value is rational, else ``"float"``."""
    for v in values:
        if v is None:
            continue
        if isinstance(v, bool) or not isinstance(v, Rational):
            return FLOAT
    return EXACT


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def to_mode(x, mode: str) -> Scalar:
    """Convert ``x`` to the scalar type of ``mode``.

    Converting a float to exact mode is refused: a binary float is almost
    never the rational the caller meant.
    """
    if mode == EXACT:
        if isinstance(x, Rational):
            return Fraction(x)
        if isinstance(x, str):
            return parse_scalar(x, EXACT)
        raise TypeError(f"cannot use {x!r} in exact mode; pass a Fraction or 'a/b' string")
    if isinstance(x, str):
        return parse_scalar(x, FLOAT)
    return float(x)


def parse_scalar(text: str, mode: str | None = None) -> Scalar:
    """Parse ``"a/b"``, an integer, or a decimal literal.

    Without an explicit ``mode``, fractions and integers parse exactly and
    decimal literals parse as floats.  In exact mode decimals are read as the
    rational they spell (``"0.1"`` -> 1/10).
    """
    s = text.strip()
    if not s:
        raise ValueError("empty number")
    looks_exact = "/" in s or s.lstrip("+-").isdigit()
    if mode is None:
        mode = EXACT if looks_exact else FLOAT
    if mode == EXACT:
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {text!r}") from exc
    if "/" in s:
        num, den = s.split("/", 1)
        return float(num) / float(den)
    return float(s)


def format_scalar(x) -> str:
    """Serialize: rationals as ``"num/den"``, floats with 17 significant digits."""
    if isinstance(x, Rational):
        f = Fraction(x)
        return f"{f.numerator}/{f.denominator}"
    return format(float(x), ".17g")


def json_scalar(x):
    """JSON-friendly form: rationals become strings, floats stay numbers."""
    if isinstance(x, Rational):
        return format_scalar(x)
    x = float(x)
    if math.isfinite(x):
        return float(format(x, ".17g"))
    return str(x)


def zero(mode: str) -> Scalar:
    return Fraction(0) if mode == EXACT else 0.0


def one(mode: str) -> Scalar:
    return Fraction(1) if mode == EXACT else 1.0
