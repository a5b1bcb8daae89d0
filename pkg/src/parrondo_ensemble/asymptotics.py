"""Exact ``N -> oo`` limits of ensemble parameters.

Every lumped matrix is rational in ``eps = 1/N``, so the whole analysis is run
over truncated Laurent series in ``eps`` and the ``eps^0`` coefficient of the
ensemble quantity is read off.  To keep every elimination pivot of valuation
zero, the one-period matrix is written ``P = I + eps G`` and

    pi G = 0,  pi 1 = 1,        (Z - Pi) = ((Pi - G)^-1 - Pi) / eps,

both of which are well conditioned in ``eps`` because the leading part of
``G`` is an irreducible generator.  If the working precision turns out to be
too small the computation is repeated with more terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from . import series as ser
from .chains import APRIME, GAME_B, build_mixture, lumped_one_from, lumped_pair_from
from .markov import EnsembleStats, ReducibleChainError, is_irreducible
from .params import CoinProbs, PatternSpec
from .scalar import EXACT
from .series import PrecisionLost, Series, valuation_key

PRECISIONS = (5, 8, 16, 32)


class GeneratorSolver:
    """Stationary law and ``(Z - Pi) v`` for ``P = I + eps G`` over series."""

    def __init__(self, P):
        n = P.shape[0]
        G = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                d = P[i, j] - (1 if i == j else 0)
                if not isinstance(d, Series):
                    d = Series.const(d)
                if d.coeffs and d.val < 1:
                    raise ValueError("one-period matrix is not of the form I + O(eps)")
                G[i, j] = d.shift(-1)
        one = Series.const(1)
        zero = Series((), 0)
        M = G.copy()
        M[:, -1] = one
        rhs = np.array([zero] * (n - 1) + [one], dtype=object)
        try:
            self.pi = linalg.solve_left(M, rhs, valuation_key)
            self.Pi = np.tile(self.pi, (n, 1))
            self._lu = linalg.LU(self.Pi - G, valuation_key)
        except linalg.SingularMatrixError as exc:
            # a zero pivot is either a reducible leading generator or too few terms
            G0 = np.array([[g.coefficient(0) for g in row] for row in G], dtype=object)
            if not is_irreducible(G0 - np.diag(np.diag(G0))):
                raise ReducibleChainError(f"limiting generator is reducible ({exc})") from exc
            raise PrecisionLost(f"pivot vanished to known precision ({exc})") from exc

    def apply_D(self, v):
        w = self._lu.solve(v) - self.Pi @ v
        return np.array([x.shift(-1) for x in w], dtype=object)


def _eps(K: int):
    """``eps`` known to absolute precision ``O(eps^K)``, which truncates all products."""
    return Series([1], 1, K)


def _one_player_chains(coins: CoinProbs, K: int):
    e = _eps(K)
    return lumped_one_from(APRIME, coins, 2 * e, "A'(1,oo)"), lumped_one_from(GAME_B, coins, e, "B(1,oo)")


def _pair_chains(coins: CoinProbs, K: int):
    e = _eps(K)
    geo = Series.geometric(K)  # N / (N - 1)
    coeffs = (2 * e * e * geo, 4 * e * (1 - 2 * e) * geo, (1 - 2 * e) * (1 - 3 * e) * geo)
    return lumped_pair_from(APRIME, coins, coeffs, "A'(2,oo)"), lumped_pair_from(GAME_B, coins, (2 * e,), "B(2,oo)")


def _require_exact(coins: CoinProbs):
    if coins.mode != EXACT:
        raise ValueError("exact limits need exact (rational) coin probabilities")


def _coefficient0(x: Series) -> Fraction:
    for k in range(x.start, 0):
        if x.coefficient(k) != 0:
            raise ArithmeticError("quantity diverges as N -> oo")
    return x.coefficient(0)


def _ensemble_limit(one_steps, pair_steps, K: int, need_var: bool = True):
    from .patterns import period_matrix, period_moments

    one = period_moments(one_steps, GeneratorSolver(period_matrix(one_steps)), players=False)
    e = _eps(K)
    mu_ens = one.mu.shift(-1)
    mu = _coefficient0(mu_ens)
    if not need_var:
        return mu, None, None
    pair = period_moments(pair_steps, GeneratorSolver(period_matrix(pair_steps)), players=True,
                          variance=False)
    sigma2_ens = one.sigma2.shift(-1) + pair.sigma12.shift(-2) * (1 - e)
    return mu, _coefficient0(sigma2_ens), (one, pair)


def _with_retries(fn):
    last = None
    for K in PRECISIONS:
        try:
            with ser.precision(K):
                return fn(K)
        except PrecisionLost as exc:
            last = exc
    raise PrecisionLost(f"insufficient precision even with {PRECISIONS[-1]} terms: {last}")


def _limit_stats(mu, sigma2, comps, mode=EXACT, **extra):
    one, pair = comps
    # per-player quantities vanish in the limit; report their leading behaviour scaled by N
    return dict(N="inf", mu=mu, sigma2=sigma2,
                mu_one=_coefficient0(one.mu.shift(-1)),
                sigma2_one=_coefficient0(one.sigma2.shift(-1)),
                sigma12=_coefficient0(pair.sigma12.shift(-2)), mode=mode, **extra)


@dataclass(frozen=True)
class LimitStats(EnsembleStats):
    """Ensemble limits; ``mu_one``, ``sigma2_one`` are ``N`` times the per-player
    values and ``sigma12`` is ``N^2`` times the pair covariance, all as ``N -> oo``."""

    r: int = 0
    s: int = 0


def mixture_limit(gamma, coins: CoinProbs) -> LimitStats:
    """Exact ``N -> oo`` mean and variance per turn of the random mixture."""
    _require_exact(coins)
    gamma = Fraction(gamma)

    def run(K):
        a1, b1 = _one_player_chains(coins, K)
        a2, b2 = _pair_chains(coins, K)
        one = build_mixture(a1, b1, gamma)
        pair = build_mixture(a2, b2, gamma)
        mu, s2, comps = _ensemble_limit([one], [pair], K)
        return LimitStats(**_limit_stats(mu, s2, comps))

    return _with_retries(run)


def pattern_limit(r: int, s: int, coins: CoinProbs) -> LimitStats:
    """Exact ``N -> oo`` mean and variance per turn of the pattern ``[r, s]``."""
    PatternSpec(r, s)
    _require_exact(coins)

    def run(K):
        a1, b1 = _one_player_chains(coins, K)
        a2, b2 = _pair_chains(coins, K)
        mu, s2, comps = _ensemble_limit([a1] * r + [b1] * s, [a2] * r + [b2] * s, K)
        return LimitStats(**_limit_stats(mu, s2, comps, r=r, s=s))

    return _with_retries(run)


def pattern_mean_limit_series(r: int, s: int, coins: CoinProbs) -> Fraction:
    """``lim_N mu_[r,s]`` from the one-player chain alone."""
    PatternSpec(r, s)
    _require_exact(coins)

    def run(K):
        a1, b1 = _one_player_chains(coins, K)
        mu, _, _ = _ensemble_limit([a1] * r + [b1] * s, None, K, need_var=False)
        return mu

    return _with_retries(run)
