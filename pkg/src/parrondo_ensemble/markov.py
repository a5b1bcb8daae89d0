"""Stationary distributions, fundamental matrices and CLT parameters of finite chains.

For an irreducible chain with transition matrix ``P``, stationary law ``pi``
and fundamental matrix ``Z = (I - (P - Pi))^-1``, the profit process driven by
a payoff matrix ``W`` has per-step mean and variance

    mu     = pi Pd 1
    sigma2 = pi Pdd 1 - mu^2 + 2 pi Pd (Z - Pi) Pd 1

with ``Pd = P*W`` and ``Pdd = P*W*W`` (entrywise).  Two payoff processes
``W1``, ``W2`` on the same chain have per-step covariance

    sigma12 = pi P12 1 - (pi P1 1)(pi P2 1)
              + pi P1 (Z - Pi) P2 1 + pi P2 (Z - Pi) P1 1.

All routines work on exact (``Fraction``) or float matrices.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import linalg
from .chains import (
    APRIME,
    GAME_B,
    GameChain,
    StateIndexFull,
    build_lumped_one,
    build_lumped_pair,
    build_mixture,
)
from .linalg import SingularMatrixError
from .params import CoinProbs
from .scalar import EXACT, FLOAT, json_scalar

FLOAT_TOL = 1e-12


class ReducibleChainError(ArithmeticError):
    """The stationary equations are singular: the chain is not irreducible."""


class MissingPayoffError(ValueError):
    """A computation needs per-player payoff matrices the chain does not carry."""


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    pi: np.ndarray

    @property
    def Pi(self) -> np.ndarray:
        """Square matrix each of whose rows is ``pi``."""
        return np.tile(self.pi, (len(self.pi), 1))

    def __len__(self):
        return len(self.pi)

    def __getitem__(self, i):
        return self.pi[i]


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    mu: object
    sigma2: object
    sigma12: Optional[object] = None
    mode: str = EXACT
    extra: dict = field(default_factory=dict)

    @property
    def sigma2_positive(self) -> bool:
        return self.sigma2 > 0

    def to_dict(self) -> dict:
        out = {"mu": json_scalar(self.mu), "sigma2": json_scalar(self.sigma2)}
        if self.sigma12 is not None:
            out["sigma12"] = json_scalar(self.sigma12)
        out["mode"] = self.mode
        for k, v in self.extra.items():
            out[k] = json_scalar(v) if not isinstance(v, (str, dict, list)) else v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# -- stationary distribution --------------------------------------------------


def stationary(P) -> StationaryDistribution:
    """Solve ``pi P = pi``, ``pi 1 = 1`` directly (no iteration).

    One balance equation is replaced by the normalization.  The caller asserts
    irreducibility; a singular system is reported as
    :class:`ReducibleChainError`.
    """
    P = np.asarray(P)
    n = P.shape[0]
    A = linalg.identity(n, linalg.mode_of(P)) - P
    A[:, -1] = linalg.like(P, 1) if linalg.is_float(P) else Fraction(1)
    rhs = linalg.zeros(n, linalg.mode_of(P))
    rhs[-1] = linalg.like(P, 1) if linalg.is_float(P) else Fraction(1)
    try:
        pi = linalg.solve_left(A, rhs)
    except SingularMatrixError as exc:
        raise ReducibleChainError(f"stationary equations are singular ({exc})") from exc
    return StationaryDistribution(pi)


def is_irreducible(P) -> bool:
    """Reachability check on the support of ``P`` (verification paths only)."""
    P = np.asarray(P)
    n = P.shape[0]
    adj = [[j for j in range(n) if P[i, j] != 0] for i in range(n)]
    radj = [[i for i in range(n) if P[i, j] != 0] for j in range(n)]
    for graph in (adj, radj):
        seen = {0}
        todo = deque([0])
        while todo:
            i = todo.popleft()
            for j in graph[i]:
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        if len(seen) != n:
            return False
    return True


# -- fundamental matrix -------------------------------------------------------


class FundamentalMatrix:
    """``Z = (I - (P - Pi))^-1`` held as an LU factorization.

    ``Z`` itself is formed only on request; the CLT formulas need ``Z`` applied
    to a handful of vectors, which :meth:`apply_D` does by back-substitution.
    """

    def __init__(self, P, pi: StationaryDistribution):
        self.P = np.asarray(P)
        self.stat = pi
        self.Pi = pi.Pi
        n = self.P.shape[0]
        M = linalg.identity(n, linalg.mode_of(self.P)) - (self.P - self.Pi)
        try:
            self._lu = linalg.LU(M)
        except SingularMatrixError as exc:
            raise ReducibleChainError(f"I - (P - Pi) is singular ({exc})") from exc
        self._Z = None

    @property
    def pi(self):
        return self.stat.pi

    @property
    def Z(self) -> np.ndarray:
        if self._Z is None:
            n = self.P.shape[0]
            self._Z = self._lu.solve(linalg.identity(n, linalg.mode_of(self.P)))
        return self._Z

    def apply(self, v):
        """``Z v`` for a vector (or matrix) ``v``."""
        return self._lu.solve(v)

    def apply_D(self, v):
        """``(Z - Pi) v``."""
        return self._lu.solve(v) - self.Pi @ v

    def verify(self) -> bool:
        """Check ``Pi Z = Pi`` and ``Z Pi = Pi``."""
        Z, Pi = self.Z, self.Pi
        if linalg.is_float(Z):
            return bool(np.allclose(Pi @ Z, Pi, atol=1e-10) and np.allclose(Z @ Pi, Pi, atol=1e-10))
        return bool(np.all(Pi @ Z == Pi) and np.all(Z @ Pi == Pi))


def fundamental(P, pi: StationaryDistribution | None = None, check: bool = True) -> FundamentalMatrix:
    """Fundamental matrix of ``P``; ``Z`` is formed and ``Pi Z = Z Pi = Pi`` checked."""
    if pi is None:
        pi = stationary(P)
    F = FundamentalMatrix(P, pi)
    if check and not F.verify():
        raise ArithmeticError("fundamental matrix fails Pi Z = Z Pi = Pi")
    return F


# -- CLT parameters -----------------------------------------------------------


def _prepare(chain: GameChain, pi, fund):
    if pi is None:
        pi = fund.stat if fund is not None else stationary(chain.P)
    if fund is None:
        fund = FundamentalMatrix(chain.P, pi)
    return pi, fund


def mean_variance(chain: GameChain, pi: StationaryDistribution | None = None,
                  fund: FundamentalMatrix | None = None) -> AnalysisResult:
    """Per-step mean and variance of the chain's tracked profit."""
    if chain.Pd is None or chain.Pdd is None:
        raise MissingPayoffError(f"chain {chain.label!r} has no payoff matrix")
    pi, fund = _prepare(chain, pi, fund)
    p = pi.pi
    one = linalg.ones(chain.n, chain.P)
    h = chain.Pd @ one
    mu = p @ h
    sigma2 = p @ (chain.Pdd @ one) - mu * mu + 2 * (p @ (chain.Pd @ fund.apply_D(h)))
    return AnalysisResult(mu, sigma2, mode=chain.mode)


def covariance_param(chain: GameChain, pi: StationaryDistribution | None = None,
                     fund: FundamentalMatrix | None = None):
    """Per-step covariance of the two tracked players' profits."""
    if not chain.has_players:
        raise MissingPayoffError(f"chain {chain.label!r} has no per-player payoff matrices")
    pi, fund = _prepare(chain, pi, fund)
    p = pi.pi
    one = linalg.ones(chain.n, chain.P)
    h1 = chain.P1 @ one
    h2 = chain.P2 @ one
    return (p @ (chain.P12 @ one) - (p @ h1) * (p @ h2)
            + p @ (chain.P1 @ fund.apply_D(h2)) + p @ (chain.P2 @ fund.apply_D(h1)))


def analyze(chain: GameChain) -> AnalysisResult:
    """Mean, variance and (when tracked) covariance, sharing one factorization."""
    pi = stationary(chain.P)
    fund = FundamentalMatrix(chain.P, pi)
    res = mean_variance(chain, pi, fund)
    if chain.has_players:
        return AnalysisResult(res.mu, res.sigma2, covariance_param(chain, pi, fund), res.mode)
    return res


# -- ensemble assembly from lumped chains -------------------------------------


@dataclass(frozen=True)
class EnsembleStats:
    """Ensemble-level parameters assembled from one- and two-player chains."""

    N: object
    mu: object
    sigma2: object
    mu_one: object
    sigma2_one: object
    sigma12: object
    mode: str

    @property
    def sample_variance_slope(self):
        """Per-turn growth of the expected (unbiased) sample variance of capitals."""
        return self.sigma2_one - self.sigma12

    def to_dict(self) -> dict:
        return {
            "N": self.N if isinstance(self.N, int) else str(self.N),
            "mu": json_scalar(self.mu),
            "sigma2": json_scalar(self.sigma2),
            "mu_one": json_scalar(self.mu_one),
            "sigma2_one": json_scalar(self.sigma2_one),
            "sigma12": json_scalar(self.sigma12),
            "sample_variance_slope": json_scalar(self.sample_variance_slope),
            "mode": self.mode,
        }


def mixture_lumped_chains(N: int, gamma, coins: CoinProbs):
    one = build_mixture(build_lumped_one(N, coins, APRIME), build_lumped_one(N, coins, GAME_B), gamma)
    pair = build_mixture(build_lumped_pair(N, coins, APRIME), build_lumped_pair(N, coins, GAME_B), gamma)
    return one, pair


def mixture_ensemble_stats(N: int, gamma, coins: CoinProbs) -> EnsembleStats:
    """``sigma2 = N sigma2_one + N (N - 1) sigma12`` for the random mixture."""
    one, pair = mixture_lumped_chains(N, gamma, coins)
    r1 = mean_variance(one)
    cov = covariance_param(pair)
    return EnsembleStats(N, N * r1.mu, N * r1.sigma2 + N * (N - 1) * cov,
                         r1.mu, r1.sigma2, cov, coins.mode)


def ensemble_variance_mixture(N, gamma, coins: CoinProbs):
    """Ensemble variance per turn of the ``(gamma, 1 - gamma)`` mixture.

    ``N = math.inf`` returns the exact limit (exact coins required).
    """
    if N == float("inf"):
        from .asymptotics import mixture_limit

        return mixture_limit(gamma, coins).sigma2
    return mixture_ensemble_stats(N, gamma, coins).sigma2


# -- exchangeability ----------------------------------------------------------


@dataclass(frozen=True)
class ExchangeabilityReport:
    exchangeable: bool
    max_deviation: float
    checked: int

    def __bool__(self):
        return self.exchangeable


def _permuted_index(idx: StateIndexFull, perms):
    states = idx.states()
    return [[idx.index(tuple(x[k] for k in sigma)) for x in states] for sigma in perms]


def check_permutation_symmetry(P, N: int) -> ExchangeabilityReport:
    """``P(x_sigma, y_sigma) == P(x, y)`` for every permutation of the players."""
    if N > 3:
        raise ValueError("permutation enumeration is limited to N <= 3")
    P = np.asarray(P)
    idx = StateIndexFull(N)
    if P.shape != (idx.size, idx.size):
        raise ValueError(f"matrix shape {P.shape} does not match 3^{N} states")
    exact = not linalg.is_float(P)
    worst, count, ok = 0.0, 0, True
    for perm in _permuted_index(idx, itertools.permutations(range(N))):
        Q = P[np.ix_(perm, perm)]
        worst = max(worst, float(np.max(np.abs(linalg.to_float(Q - P)))))
        count += P.size
        if exact and not np.all(Q == P):
            ok = False
    if not exact:
        ok = worst <= FLOAT_TOL
    return ExchangeabilityReport(ok, worst, count)


def check_exchangeability(P, N: int, pi: StationaryDistribution | None = None) -> ExchangeabilityReport:
    """``pi(x_sigma) == pi(x)`` for every permutation of the players (``N <= 3``)."""
    if N > 3:
        raise ValueError("permutation enumeration is limited to N <= 3")
    if pi is None:
        pi = stationary(P)
    p = pi.pi
    idx = StateIndexFull(N)
    exact = not linalg.is_float(np.asarray(P))
    worst, count, ok = 0.0, 0, True
    for perm in _permuted_index(idx, itertools.permutations(range(N))):
        for a, b in enumerate(perm):
            count += 1
            if exact:
                if p[a] != p[b]:
                    ok = False
                    worst = max(worst, abs(float(p[a] - p[b])))
            else:
                d = abs(p[a] - p[b])
                worst = max(worst, d)
                if d > FLOAT_TOL:
                    ok = False
    return ExchangeabilityReport(ok, worst, count)


def lazy_chain(P, N):
    """``(1/N) P + (1 - 1/N) I``: the chain slowed down by a factor ``N``."""
    P = np.asarray(P)
    n = P.shape[0]
    if linalg.is_float(P):
        return P / N + (1 - 1 / N) * np.eye(n)
    N = Fraction(N)
    return P / N + (1 - 1 / N) * linalg.identity(n)
