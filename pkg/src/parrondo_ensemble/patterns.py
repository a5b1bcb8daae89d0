"""Mean, variance and covariance parameters for periodic patterns ``(A')^r B^s``.

Three computational routes, all returning per-turn values:

``cycle``
    The one-period sums written out term by term with explicit matrix
    powers, ``pi`` stationary for ``P_A^r P_B^s`` and ``Z`` its fundamental
    matrix.  Slow but transparent.
``phase``
    A homogeneous chain on (phase, state) pairs with ``(r+s)`` times as many
    states, analysed with the ordinary one-step formulas of
    :mod:`parrondo_ensemble.markov`.  Independent of the sums above.
``engine``
    A factorized evaluation of the same sums using forward and backward
    vector recursions (no matrix powers, one factorization).  It is generic
    in the scalar type and also drives the exact ``N -> oo`` limits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .chains import (
    APRIME,
    GAME_A,
    GAME_B,
    GameChain,
    build_lumped_one,
    build_lumped_pair,
    build_one_player_original,
)
from .markov import (
    EnsembleStats,
    FundamentalMatrix,
    MissingPayoffError,
    ReducibleChainError,
    analyze,
    fundamental,
    stationary,
)
from .params import CoinProbs, PatternSpec, coins_from
from .scalar import EXACT, json_scalar

METHODS = ("engine", "cycle", "phase")


@dataclass(frozen=True, eq=False)
class PatternResult:
    """Per-turn parameters of one payoff process under a periodic schedule."""

    mu: object
    sigma2: object
    sigma12: Optional[object] = None
    method: str = "engine"
    mode: str = EXACT

    def to_dict(self) -> dict:
        out = {"mu": json_scalar(self.mu), "sigma2": json_scalar(self.sigma2)}
        if self.sigma12 is not None:
            out["sigma12"] = json_scalar(self.sigma12)
        out["method"] = self.method
        out["mode"] = self.mode
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class PatternEnsembleStats(EnsembleStats):
    r: int = 1
    s: int = 1
    method: str = "engine"

    @property
    def gamma_equiv(self) -> Fraction:
        return Fraction(self.r, self.r + self.s)

    def to_dict(self) -> dict:
        out = super().to_dict()
        out.update({"r": self.r, "s": self.s, "method": self.method})
        return out


def _check_rs(r, s):
    PatternSpec(r, s)


def _check_pair(chainA: GameChain, chainB: GameChain):
    if chainA.n != chainB.n:
        raise ValueError(f"chains have different state counts ({chainA.n} vs {chainB.n})")


def _schedule(r: int, s: int, chainA: GameChain, chainB: GameChain) -> list:
    return [chainA] * r + [chainB] * s


def period_matrix(steps: Sequence[GameChain]):
    P = steps[0].P
    for c in steps[1:]:
        P = P @ c.P
    return P


# -- literal one-period sums ----------------------------------------------------


def _cycle_covariance(r, s, A, B, A1, A2, A12, B1, B2, B12, pi, Pi, ZmPi, one):
    """The one-period covariance sums, transcribed term by term.

    ``A1, A2`` (``B1, B2``) are the payoff-weighted matrices of game A (B) for
    the two processes and ``A12``/``B12`` their joint second-moment matrices.
    With ``A1 = A2`` and ``A12 = Pdd`` the result is the variance sum.
    """
    Ap = [linalg.mat_pow(A, k) for k in range(r + 1)]
    Bp = [linalg.mat_pow(B, k) for k in range(s + 1)]
    piAr = pi @ Ap[r]
    PiAp = [Pi @ M for M in Ap]
    PiArBp = [PiAp[r] @ M for M in Bp]
    total = 0

    for u in range(r):
        x = pi @ Ap[u]
        total += x @ A12 @ one - (x @ A1 @ one) * (x @ A2 @ one)
    for v in range(s):
        x = piAr @ Bp[v]
        total += x @ B12 @ one - (x @ B1 @ one) * (x @ B2 @ one)

    for X, Y in ((A1, A2), (A2, A1)):
        for u in range(r):
            for v in range(u + 1, r):
                total += pi @ Ap[u] @ X @ (Ap[v - u - 1] - PiAp[v]) @ Y @ one
    for (XA, YB) in ((A1, B2), (A2, B1)):
        for u in range(r):
            for v in range(s):
                total += pi @ Ap[u] @ XA @ (Ap[r - u - 1] - PiAp[r]) @ Bp[v] @ YB @ one
    for X, Y in ((B1, B2), (B2, B1)):
        for u in range(s):
            for v in range(u + 1, s):
                total += piAr @ Bp[u] @ X @ (Bp[v - u - 1] - PiArBp[v]) @ Y @ one

    for XA, YA, XB, YB in ((A1, A2, B1, B2), (A2, A1, B2, B1)):
        for u in range(r):
            left = pi @ Ap[u] @ XA @ Ap[r - u - 1] @ Bp[s] @ ZmPi
            for v in range(r):
                total += left @ Ap[v] @ YA @ one
            for v in range(s):
                total += left @ Ap[r] @ Bp[v] @ YB @ one
        for u in range(s):
            left = piAr @ Bp[u] @ XB @ Bp[s - u - 1] @ ZmPi
            for v in range(r):
                total += left @ Ap[v] @ YA @ one
            for v in range(s):
                total += left @ Ap[r] @ Bp[v] @ YB @ one
    return total / (r + s)


def pattern_stats_cycle(r: int, s: int, chainA: GameChain, chainB: GameChain) -> PatternResult:
    """Pattern parameters from the one-period sums with explicit matrix powers.

    ``pi`` is stationary for ``P_A^r P_B^s`` (the A block first) and ``Z`` is
    that product's fundamental matrix.
    """
    _check_rs(r, s)
    _check_pair(chainA, chainB)
    if chainA.Pd is None or chainB.Pd is None:
        raise MissingPayoffError("pattern analysis needs payoff matrices")
    A, B = chainA.P, chainB.P
    P = linalg.mat_pow(A, r) @ linalg.mat_pow(B, s)
    try:
        F = fundamental(P)
    except ReducibleChainError as exc:
        raise ReducibleChainError(f"one-period chain of [{r},{s}] is reducible ({exc})") from exc
    pi, Pi = F.pi, F.Pi
    ZmPi = F.Z - Pi
    one = linalg.ones(chainA.n, A)

    mu = 0
    for u in range(r):
        mu += pi @ linalg.mat_pow(A, u) @ chainA.Pd @ one
    piAr = pi @ linalg.mat_pow(A, r)
    for v in range(s):
        mu += piAr @ linalg.mat_pow(B, v) @ chainB.Pd @ one
    mu = mu / (r + s)

    sigma2 = _cycle_covariance(r, s, A, B, chainA.Pd, chainA.Pd, chainA.Pdd,
                               chainB.Pd, chainB.Pd, chainB.Pdd, pi, Pi, ZmPi, one)
    sigma12 = None
    if chainA.has_players and chainB.has_players:
        sigma12 = _cycle_covariance(r, s, A, B, chainA.P1, chainA.P2, chainA.P12,
                                    chainB.P1, chainB.P2, chainB.P12, pi, Pi, ZmPi, one)
    return PatternResult(mu, sigma2, sigma12, "cycle", chainA.mode)


# -- phase-augmented chain ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class PhaseChain:
    """Homogeneous chain on (phase, state); index ``phase * m + state``."""

    chain: GameChain
    m: int
    T: int

    def index(self, phase: int, state: int) -> int:
        return phase * self.m + state


def build_phase_chain(steps: Sequence[GameChain]) -> PhaseChain:
    """Phase ``t`` moves by ``steps[t]`` and advances to ``t + 1 mod T``."""
    T = len(steps)
    m = steps[0].n
    mode = steps[0].mode
    names = ("P", "Pd", "Pdd", "P1", "P2", "P12")
    has = {k: all(getattr(c, k) is not None for c in steps) for k in names}
    out = {k: (linalg.zeros((m * T, m * T), mode) if has[k] else None) for k in names}
    for t, c in enumerate(steps):
        nxt = (t + 1) % T
        rows = slice(t * m, (t + 1) * m)
        cols = slice(nxt * m, (nxt + 1) * m)
        for k in names:
            if has[k]:
                out[k][rows, cols] = getattr(c, k)
    chain = GameChain(out["P"], out["Pd"], out["Pdd"], out["P1"], out["P2"], out["P12"],
                      label=f"phase({T})", states=tuple((t, x) for t in range(T) for x in range(m)))
    return PhaseChain(chain, m, T)


def pattern_stats_phase(r: int, s: int, chainA: GameChain, chainB: GameChain) -> PatternResult:
    """Pattern parameters from the phase-augmented chain and the one-step formulas.

    The augmented chain is periodic but irreducible, which is all the one-step
    formulas need.
    """
    _check_rs(r, s)
    _check_pair(chainA, chainB)
    ph = build_phase_chain(_schedule(r, s, chainA, chainB))
    res = analyze(ph.chain)
    return PatternResult(res.mu, res.sigma2, res.sigma12, "phase", chainA.mode)


# -- factorized engine --------------------------------------------------------


class ChainSolver:
    """Stationary law and ``(Z - Pi) v`` products for an exact or float matrix."""

    def __init__(self, P):
        self.stat = stationary(P)
        self.pi = self.stat.pi
        self._F = FundamentalMatrix(P, self.stat)

    def apply_D(self, v):
        return self._F.apply_D(v)


def _forward(steps, pi):
    alpha = [pi]
    for c in steps[:-1]:
        alpha.append(alpha[-1] @ c.P)
    return alpha


def _period_cov(steps, alpha, solver, one, ka, kb, kab):
    """Per-turn covariance of the processes whose weighted matrices are ``ka`` and ``kb``."""
    T = len(steps)
    Pa = [getattr(c, ka) for c in steps]
    Pb = [getattr(c, kb) for c in steps]
    ha = [M @ one for M in Pa]
    hb = [M @ one for M in Pb]
    ma = [alpha[t] @ ha[t] for t in range(T)]
    mb = [alpha[t] @ hb[t] for t in range(T)]

    total = 0
    for t, c in enumerate(steps):
        total += alpha[t] @ (getattr(c, kab) @ one) - ma[t] * mb[t]

    def within(Px, mx, hy, my):
        # sum_{u<v} alpha_u Px_u P_{u+1}..P_{v-1} hy_v - mx_u my_v
        acc = 0
        c = one * 0
        tail = 0
        for u in range(T - 1, -1, -1):
            acc += alpha[u] @ (Px[u] @ c) - mx[u] * tail
            c = hy[u] + steps[u].P @ c
            tail += my[u]
        return acc

    total += within(Pa, ma, hb, mb) + within(Pb, mb, ha, ma)

    def f_end(Px):
        f = alpha[0] * 0
        for t in range(T):
            f = f @ steps[t].P + alpha[t] @ Px[t]
        return f

    def g_start(hy):
        g = one * 0
        for t in range(T - 1, -1, -1):
            g = hy[t] + steps[t].P @ g
        return g

    total += f_end(Pa) @ solver.apply_D(g_start(hb)) + f_end(Pb) @ solver.apply_D(g_start(ha))
    return total / T


def period_moments(steps: Sequence[GameChain], solver=None, players: bool | None = None,
                   variance: bool = True) -> PatternResult:
    """Per-turn mean, variance and covariance of a periodic schedule of chains.

    ``steps[t]`` drives turn ``t`` of each period.  ``solver`` supplies the
    stationary law ``pi`` of the one-period product and ``(Z - Pi) v``
    products; by default it is built from the product matrix.  A single step
    gives the ordinary one-step parameters.  ``variance=False`` skips the
    ensemble variance when only the pair covariance is needed.
    """
    steps = list(steps)
    if solver is None:
        try:
            solver = ChainSolver(period_matrix(steps))
        except ReducibleChainError as exc:
            raise ReducibleChainError(f"one-period chain is reducible ({exc})") from exc
    if players is None:
        players = all(c.has_players for c in steps)
    one = linalg.ones(steps[0].n, steps[0].P)
    alpha = _forward(steps, solver.pi)
    T = len(steps)
    mu = sum((alpha[t] @ (steps[t].Pd @ one) for t in range(1, T)), alpha[0] @ (steps[0].Pd @ one)) / T
    sigma2 = _period_cov(steps, alpha, solver, one, "Pd", "Pd", "Pdd") if variance else None
    sigma12 = _period_cov(steps, alpha, solver, one, "P1", "P2", "P12") if players else None
    return PatternResult(mu, sigma2, sigma12, "engine", steps[0].mode)


def pattern_stats_engine(r: int, s: int, chainA: GameChain, chainB: GameChain) -> PatternResult:
    _check_rs(r, s)
    _check_pair(chainA, chainB)
    return period_moments(_schedule(r, s, chainA, chainB))


_DISPATCH = {
    "engine": pattern_stats_engine,
    "cycle": pattern_stats_cycle,
    "phase": pattern_stats_phase,
}


def pattern_stats(r: int, s: int, chainA: GameChain, chainB: GameChain, method: str = "engine") -> PatternResult:
    try:
        fn = _DISPATCH[method]
    except KeyError:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}") from None
    return fn(r, s, chainA, chainB)


# -- ensemble assembly --------------------------------------------------------


def pattern_ensemble_stats(r: int, s: int, N, coins: CoinProbs, method: str = "engine") -> PatternEnsembleStats:
    """Ensemble parameters of ``[r, s]`` from lumped one-player and pair patterns.

    ``sigma2 = N sigma2_one + N (N - 1) sigma12``; ``N = math.inf`` gives the
    exact limit (exact coins required).
    """
    _check_rs(r, s)
    if N == float("inf"):
        from .asymptotics import pattern_limit

        return pattern_limit(r, s, coins)
    one = pattern_stats(r, s, build_lumped_one(N, coins, APRIME), build_lumped_one(N, coins, GAME_B), method)
    pair = pattern_stats(r, s, build_lumped_pair(N, coins, APRIME), build_lumped_pair(N, coins, GAME_B), method)
    return PatternEnsembleStats(N, N * one.mu, N * one.sigma2 + N * (N - 1) * pair.sigma12,
                                one.mu, one.sigma2, pair.sigma12, coins.mode, r, s, method)


def pattern_mean(r: int, s: int, N: int, coins: CoinProbs):
    """Ensemble mean per turn ``N * mu_one`` (one-player chain only).

    ``N = 1`` uses the original one-player games A and B.
    """
    _check_rs(r, s)
    if N == 1:
        A = build_one_player_original(GAME_A, coins, coins.mode)
        B = build_one_player_original(GAME_B, coins)
    else:
        A = build_lumped_one(N, coins, APRIME)
        B = build_lumped_one(N, coins, GAME_B)
    steps = _schedule(r, s, A, B)
    solver = ChainSolver(period_matrix(steps))
    one = linalg.ones(A.n, A.P)
    alpha = _forward(steps, solver.pi)
    mu = sum(alpha[t] @ (steps[t].Pd @ one) for t in range(len(steps))) / (r + s)
    return N * mu


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def pattern_sign(r: int, s: int, N: int, rho) -> int:
    """Sign of the pattern mean, computed exactly when ``rho`` is rational."""
    coins = coins_from(rho)
    if coins.mode != EXACT:
        from .formulas import pattern_mean_closed

        v = pattern_mean_closed(r, s, N, rho)
        return 0 if abs(v) < 1e-13 else _sign(v)
    return _sign(pattern_mean(r, s, N, coins))


# -- mixture / pattern relation -------------------------------------------------


@dataclass(frozen=True)
class RelationReport:
    r: int
    s: int
    rho: object
    mixture: object
    pattern_limit: object
    exact_residual: object
    richardson: float
    richardson_residual: float
    tol: float
    Ns: tuple = ()
    series_limit: Optional[object] = None

    @property
    def ok(self) -> bool:
        exact_ok = self.exact_residual == 0 if not isinstance(self.exact_residual, float) \
            else abs(self.exact_residual) <= self.tol
        return bool(exact_ok and self.richardson_residual <= self.tol)

    def to_dict(self) -> dict:
        return {
            "r": self.r, "s": self.s, "rho": json_scalar(self.rho),
            "mixture": json_scalar(self.mixture),
            "pattern_limit": json_scalar(self.pattern_limit),
            "exact_residual": json_scalar(self.exact_residual),
            "richardson": self.richardson,
            "richardson_residual": self.richardson_residual,
            "Ns": list(self.Ns), "tol": self.tol, "ok": self.ok,
        }


def richardson(values: Sequence, ratio: int = 2) -> object:
    """Eliminate the ``1/N`` and ``1/N^2`` terms from values at ``N, 2N, 4N``."""
    a, b, c = values
    r1 = ratio * b - a
    r2 = ratio * c - b
    return (ratio * ratio * r2 - r1) / (ratio * ratio - 1)


def mixture_pattern_relation(r: int, s: int, rho, tol: float = 1e-6, N0: int = 64,
                             with_series: bool = False) -> RelationReport:
    """Compare the mixture mean at ``gamma = r/(r+s)`` with the pattern-mean limit.

    The two closed forms are compared exactly; the matrix engine's pattern
    mean at ``N0, 2 N0, 4 N0`` is Richardson-extrapolated and compared within
    ``tol``.
    """
    from .formulas import mu_mixture, pattern_mean_limit

    _check_rs(r, s)
    mix = mu_mixture(Fraction(r, r + s) if not isinstance(rho, float) else r / (r + s), rho)
    lim = pattern_mean_limit(r, s, rho)
    coins = coins_from(rho)
    Ns = (N0, 2 * N0, 4 * N0)
    vals = [pattern_mean(r, s, n, coins) for n in Ns]
    extrap = richardson(vals)
    series = None
    if with_series and coins.mode == EXACT:
        from .asymptotics import pattern_mean_limit_series

        series = pattern_mean_limit_series(r, s, coins)
    return RelationReport(r, s, rho, mix, lim, mix - lim, float(extrap), abs(float(extrap - mix)),
                          tol, Ns, series)
