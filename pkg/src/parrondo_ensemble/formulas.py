"""Closed-form evaluators, used as independent checks of the matrix engine.

Every function evaluates one published closed form at numeric arguments.
Rational inputs (``Fraction`` or ``int``) give exact results wherever the
formula is rational; the pattern-mean evaluator based on eigenvalues is
irrational in ``rho`` and is evaluated in floating point.

Each formula has a stable id in :data:`FORMULAS` so it can be called by name
from the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .scalar import json_scalar


def _poly(x, coeffs):
    """``sum c_k x^k`` by Horner's rule (coefficients in ascending order)."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _q(x):
    """Promote ints to ``Fraction`` so that ratios stay exact."""
    return Fraction(x) if isinstance(x, int) and not isinstance(x, bool) else x


# recurring polynomials in rho
def _s2(rho):
    return 1 + rho + rho * rho


def _k4(rho):
    return _poly(rho, (10, 20, 21, 20, 10))


# -- random mixtures ------------------------------------------------------------


def mu_mixture(gamma, rho):
    """Mean profit per turn of the ``(gamma, 1 - gamma)`` mixture; independent of ``N``."""
    gamma, rho = _q(gamma), _q(rho)
    num = 3 * gamma * (1 - gamma) * (1 - rho) ** 3 * (1 + rho)
    den = (2 * _s2(rho) ** 2 + gamma * _poly(rho, (5, 10, 6, 10, 5))
           + 2 * gamma ** 2 * _s2(rho) ** 2)
    return num / den


def mu_coincidence(rho):
    """Common value of the half mixture mean and several pattern means."""
    rho = _q(rho)
    return 3 * (1 - rho) ** 3 * (1 + rho) / (2 * _k4(rho))


def mu_mixture_biased_half(rho, eps):
    """Half-mixture mean with bias ``eps`` restored."""
    rho, eps = _q(rho), _q(eps)
    a = (1 - rho) ** 3 * (1 + rho)
    b = (1 + rho) ** 2 * (1 + rho * rho)
    num = 3 * (2 * a - eps * _poly(rho, (13, 26, 30, 26, 13)) + eps ** 2 * a - 2 * eps ** 3 * b)
    den = 2 * (2 * _k4(rho) - eps * a + 3 * eps ** 2 * b)
    return num / den


def sigma2_B(rho):
    """Variance per turn of game B alone (any ``N``)."""
    rho = _q(rho)
    return (3 * rho / _s2(rho)) ** 2


def pi_B_one(rho):
    """Stationary law of the one-player game B, as ``(pi0, pi1, pi2)``."""
    rho = _q(rho)
    d = 2 * _s2(rho)
    return ((1 + rho * rho) / d, rho * (1 + rho) / d, (1 + rho) / d)


_MIX13_NUM = (-36821493886409, 71724260647553, -46282959184439, 9902542819695)
_MIX13_DEN = (-269171, 524347, -338381, 72405)


def sigma2_mixture_half_rho13(N):
    """Ensemble variance per turn of the half mixture at ``rho = 1/3``, rational in ``N``."""
    N = _q(N)
    return 27 * _poly(N, _MIX13_NUM) / (8331019058 * _poly(N, _MIX13_DEN))


def sigma2_mixture_half_rho13_limit():
    return Fraction(27 * _MIX13_NUM[-1], 8331019058 * _MIX13_DEN[-1])


def pi_mixture_half_N2(rho) -> dict:
    """Stationary law of the two-player half mixture, keyed by state ``(x1, x2)``."""
    rho = _q(rho)
    r = rho
    d = 2 * _poly(r, (13, -2, 13)) * _k4(r)
    a01 = 2 * (1 + r) * (1 + r * r) * _poly(r, (11, 15, 9, 19)) / d
    a02 = 2 * (1 + r) * (1 + r * r) * _poly(r, (19, 9, 15, 11)) / d
    a12 = 6 * (1 + r) ** 2 * (1 + r * r) * _poly(r, (4, 1, 4)) / d
    return {
        (0, 0): (1 + r * r) * _poly(r, (31, 47, 60, 47, 31)) / d,
        (0, 1): a01, (1, 0): a01,
        (0, 2): a02, (2, 0): a02,
        (1, 1): (1 + r) * _poly(r, (19, 21, 48, 59, 27, 42)) / d,
        (1, 2): a12, (2, 1): a12,
        (2, 2): (1 + r) * _poly(r, (42, 27, 59, 48, 21, 19)) / d,
    }


def sigma2_one_player_asymptotic(gamma, rho):
    """``lim N * sigma2_one`` for the mixture: the per-player variance's ``1/N`` coefficient."""
    g, r = _q(gamma), _q(rho)
    s2 = _s2(r)
    num = 9 * (
        8 * (1 + g ** 7) * r ** 2 * s2 ** 4
        + 4 * (g + g ** 6) * s2 ** 2 * _poly(r, (1, 2, 1, 2, 1)) * _poly(r, (1, 2, 12, 2, 1))
        + 6 * (g ** 2 + g ** 5) * s2 ** 2 * _poly(r, (3, 20, 30, 40, 66, 40, 30, 20, 3))
        + (g ** 3 + g ** 4) * _poly(r, (59, 306, 864, 1738, 2781, 3636, 3912, 3636, 2781,
                                         1738, 864, 306, 59))
    )
    den = (2 * (1 + g ** 2) * s2 ** 2 + g * _poly(r, (5, 10, 6, 10, 5))) ** 3
    return num / den


def sample_variance_slope_mixture_half_asymptotic(rho):
    """``lim N * (sigma2_one - sigma12)`` for the half mixture."""
    r = _q(rho)
    num = 27 * _poly(r, (97, 606, 1926, 4262, 7284, 9894, 10911, 9894, 7284, 4262, 1926, 606, 97))
    return num / (2 * _k4(r) ** 3)


SLOPE_KINDS = ("A'", "B", "mixture-half")


def sample_variance_slope(kind: str, rho, N):
    """Per-turn growth of the expected sample variance of the players' capitals.

    ``mixture-half`` returns the large-``N`` asymptote.
    """
    N = _q(N)
    if N < 2:
        raise ValueError("N must be at least 2")
    if kind == "A'":
        return 2 / (N - 1)
    if kind == "B":
        return sigma2_B(rho) / N
    if kind == "mixture-half":
        return sample_variance_slope_mixture_half_asymptotic(rho) / N
    raise ValueError(f"kind must be one of {SLOPE_KINDS}, got {kind!r}")


# -- patterns -------------------------------------------------------------------


def eigen_S(rho) -> float:
    rho = float(rho)
    return math.sqrt((1 + rho * rho) * (1 + 4 * rho + rho * rho))


def eigenvalues_B(rho) -> tuple:
    """Nonunit eigenvalues ``(e1, e2)`` of the one-player game B matrix."""
    rho = float(rho)
    x = (1 - rho) * eigen_S(rho) / (2 * (1 + rho) * (1 + rho * rho))
    return -0.5 + x, -0.5 - x


def _pattern_ED(r, s, rho, a, e1, e2):
    rho = float(rho)
    S = eigen_S(rho)
    e1s, e2s = e1 ** s, e2 ** s
    E = 3 * a * (
        (2 + (3 * a - 1) * (e1s + e2s - 2 * e1s * e2s) - (e1s + e2s)) * (1 - rho) * (1 + rho) * S
        + a * (e2s - e1s) * (5 * (1 + rho) ** 2 * (1 + rho * rho) - 4 * rho * rho)
    ) * (1 - rho) ** 2
    D = 4 * (r + s) * (1 + (3 * a - 1) * e1s) * (1 + (3 * a - 1) * e2s) * (1 + rho + rho * rho) ** 2 * S
    return E, D


def pattern_ED(r: int, s: int, N: int, rho) -> tuple:
    """``(E_rs, D_rs)`` for the lumped ``N``-player chains (``N = 1``: original games)."""
    if N == 1:
        a = (1 - (-0.5) ** r) / 3
        e1, e2 = eigenvalues_B(rho)
    else:
        a = (1 - (1 - 3 / N) ** r) / 3
        e1o, e2o = eigenvalues_B(rho)
        e1, e2 = 1 - (1 - e1o) / N, 1 - (1 - e2o) / N
    return _pattern_ED(r, s, rho, a, e1, e2)


def pattern_mean_closed(r: int, s: int, N: int, rho, exact: bool = False):
    """Ensemble mean per turn of the pattern ``[r, s]`` with ``N`` players.

    The general route goes through the eigenvalues of game B and is evaluated
    in floating point.  ``exact=True`` uses the explicit rational displays,
    available for ``[1, 1]`` and ``[1, 2]``.
    """
    if exact:
        if (r, s) == (1, 1):
            return mu_pattern11(N, rho)
        if (r, s) == (1, 2):
            return mu_pattern12(N, rho)
        raise ValueError(f"no rational display for [{r},{s}]")
    E, D = pattern_ED(r, s, N, rho)
    return N * E / D if N != 1 else E / D


def mu_pattern11(N, rho):
    N, r = _q(N), _q(rho)
    num = 3 * N * (2 * N - 3) * (1 - r) ** 3 * (1 + r)
    den = 2 * (18 * _s2(r) ** 2 - 3 * N * _poly(r, (13, 26, 30, 26, 13)) + 2 * N ** 2 * _k4(r))
    return num / den


def mu_pattern12(N, rho):
    N, r = _q(N), _q(rho)
    b = (1 + r) ** 2 * (1 + r * r)
    num = 2 * N * (1 - r) ** 3 * (1 + r) * (-3 * _s2(r) ** 2 + N * _k4(r) - 9 * N ** 2 * b + 3 * N ** 3 * b)
    den = (36 * _s2(r) ** 4
           - 12 * N * _s2(r) ** 2 * _poly(r, (11, 22, 24, 22, 11))
           + N ** 2 * _poly(r, (193, 772, 1660, 2548, 2938, 2548, 1660, 772, 193))
           - 3 * N ** 3 * (1 + r) ** 2 * _poly(r, (43, 86, 145, 172, 145, 86, 43))
           + N ** 4 * (1 + r) ** 2 * _poly(r, (35, 70, 113, 140, 113, 70, 35)))
    return num / den


def pattern_mean_limit(r: int, s: int, rho):
    """``lim_N`` of the ensemble pattern mean."""
    rho = _q(rho)
    b = 9 * (1 + rho) ** 2 * (1 + rho * rho)
    return 3 * r * s * (1 - rho) ** 3 * (1 + rho) / (b * r * r + b * r * s + 2 * s * s * _s2(rho) ** 2)


_P11_NUM = (615639408424560, -6408926620214040, 29541545957894139, -80214814200037491,
            143582273075781927, -179192557802543130, 160434481099881996, -104152159483211664,
            48799091685478468, -16137521956595246, 3584898779152593, -481633399018397,
            29679648590925)
_P11_Q = (1521, -3174, 1609)
_P11_R = (3285360, -9816120, 12525387, -8725589, 3501928, -768851, 72405)


def _p11_den_coeffs():
    q3 = _polymul(_polymul(_P11_Q, _P11_Q), _P11_Q)
    return [2 * c for c in _polymul(q3, _P11_R)]


def sigma2_pattern11_rho13(N):
    """Ensemble variance per turn of ``[1, 1]`` at ``rho = 1/3``, rational in ``N``."""
    N = _q(N)
    return 9 * _poly(N, _P11_NUM) / (2 * _poly(N, _P11_Q) ** 3 * _poly(N, _P11_R))


def sigma2_pattern11_rho13_limit():
    den = _p11_den_coeffs()
    if len(den) != len(_P11_NUM):
        raise ArithmeticError("numerator and denominator degrees differ")
    return Fraction(9 * _P11_NUM[-1], den[-1])


def sigma2_pattern11_N2(rho):
    """Ensemble variance per turn of ``[1, 1]`` with two players, rational in ``rho``."""
    r = _q(rho)
    num = 9 * _poly(r, (466, 2680, 7621, 16310, 29018, 41582, 51471, 55998, 51471, 41582,
                        29018, 16310, 7621, 2680, 466))
    return num / (4 * _poly(r, (2, -1, 2)) * _k4(r) ** 3)


# paper-table limits at rho = 1/3, keyed by r/(r+s)
PATTERN_SIGMA2_LIMITS_RHO13 = {
    Fraction(1, 2): Fraction(5935929718185, 13404609664322),
    Fraction(2, 3): Fraction(1891312136577, 6060711605323),
    Fraction(1, 3): Fraction(136286243910, 252688187761),
}


def power_gap_ratio(a, b, c, n: int):
    """``(c^n - b^n) / (b^n - a^n)``; increasing in ``n`` when ``0 < a < b < c``."""
    return (c ** n - b ** n) / (b ** n - a ** n)


# -- registry -------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormValue:
    value: object
    formula_id: str
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"formula_id": self.formula_id, "value": json_scalar(self.value),
                "inputs": {k: json_scalar(v) for k, v in self.inputs.items()}}


FORMULAS: dict[str, tuple[Callable, tuple]] = {
    "mu.mixture": (mu_mixture, ("gamma", "rho")),
    "mu.mixture.half.biased": (mu_mixture_biased_half, ("rho", "eps")),
    "mu.coincidence": (mu_coincidence, ("rho",)),
    "sigma2.B": (sigma2_B, ("rho",)),
    "pi.B.one": (pi_B_one, ("rho",)),
    "pi.mixture.half.N2": (pi_mixture_half_N2, ("rho",)),
    "sigma2.mixture.half.rho13": (sigma2_mixture_half_rho13, ("N",)),
    "sigma2.mixture.half.rho13.limit": (sigma2_mixture_half_rho13_limit, ()),
    "sigma2.one.asymptotic": (sigma2_one_player_asymptotic, ("gamma", "rho")),
    "slope.sample_variance": (sample_variance_slope, ("kind", "rho", "N")),
    "mu.pattern": (pattern_mean_closed, ("r", "s", "N", "rho")),
    "mu.pattern11": (mu_pattern11, ("N", "rho")),
    "mu.pattern12": (mu_pattern12, ("N", "rho")),
    "mu.pattern.limit": (pattern_mean_limit, ("r", "s", "rho")),
    "sigma2.pattern11.rho13": (sigma2_pattern11_rho13, ("N",)),
    "sigma2.pattern11.rho13.limit": (sigma2_pattern11_rho13_limit, ()),
    "sigma2.pattern11.N2": (sigma2_pattern11_N2, ("rho",)),
}


def evaluate(formula_id: str, **inputs) -> ClosedFormValue:
    try:
        fn, names = FORMULAS[formula_id]
    except KeyError:
        raise KeyError(f"unknown formula id {formula_id!r}") from None
    missing = [n for n in names if n not in inputs]
    if missing:
        raise TypeError(f"{formula_id} needs {', '.join(missing)}")
    args = [inputs[n] for n in names]
    return ClosedFormValue(fn(*args), formula_id, {n: inputs[n] for n in names})
