"""Seeded Monte Carlo simulation of the N-player games.

Each replication evolves integer capitals from 0.  Every turn the schedule
picks game A' or B.  Under A' an ordered pair ``(i, j)``, ``i != j``, is drawn
uniformly and one unit moves from ``i`` to ``j``; under B a uniformly chosen
player tosses the coin selected by its capital mod 3.

Randomness comes from numpy's Philox counter-based generator, one stream per
replication keyed by ``(master seed, replication index)``, so results do not
depend on how replications are spread over threads.  The turn loop is
compiled with numba.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np
import scipy.stats

from .params import MixtureSpec, ModelParams, ParameterError, PatternSpec, float_coins

RNG_ID = "numpy.random.Philox(SeedSequence(entropy=seed, spawn_key=(replication,)))"
CHUNK = 1 << 16

PURE_APRIME = "A'"
PURE_B = "B"

# schedule codes for the kernel
_MIX, _PATTERN = 0, 1


def default_threads() -> int:
    env = os.environ.get("PARRONDO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"PARRONDO_THREADS must be an integer, got {env!r}") from None
    return 1


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``schedule`` is a :class:`MixtureSpec`, a :class:`PatternSpec`, or one of
    the strings ``"A'"`` / ``"B"`` for a pure game.  ``trace_points`` lists turn
    numbers at which ``S_t`` and the sample variance are recorded.
    """

    params: ModelParams
    schedule: object
    n: int
    R: int
    seed: int = 0
    trace_points: tuple = ()

    def __post_init__(self):
        if self.n < 1 or self.R < 1:
            raise ParameterError("n and R must be at least 1")
        if self.params.N < 2:
            raise ParameterError("simulation needs N >= 2")
        if not isinstance(self.schedule, (MixtureSpec, PatternSpec)) and self.schedule not in (PURE_APRIME, PURE_B):
            raise ParameterError(f"unknown schedule {self.schedule!r}")
        pts = tuple(sorted({int(t) for t in self.trace_points}))
        if pts and (pts[0] < 1 or pts[-1] > self.n):
            raise ParameterError("trace points must lie in [1, n]")
        object.__setattr__(self, "trace_points", pts)

    def kernel_args(self):
        """``(code, gamma, r, T)``: A' is played when ``u < gamma`` (mixture) or ``t mod T < r``."""
        sch = self.schedule
        if isinstance(sch, MixtureSpec):
            return _MIX, float(sch.gamma), 0, 1
        if isinstance(sch, PatternSpec):
            return _PATTERN, 0.0, sch.r, sch.period
        if sch == PURE_APRIME:
            return _PATTERN, 0.0, 1, 1
        return _PATTERN, 0.0, 0, 1

    def describe(self) -> dict:
        sch = self.schedule
        if isinstance(sch, MixtureSpec):
            s = {"type": "mixture", "gamma": str(sch.gamma)}
        elif isinstance(sch, PatternSpec):
            s = {"type": "pattern", "r": sch.r, "s": sch.s}
        else:
            s = {"type": "pure", "game": sch}
        return {"rho": str(self.params.rho), "eps": str(self.params.eps), "N": self.params.N,
                "schedule": s, "n": self.n, "R": self.R, "seed": self.seed}


@numba.njit(nogil=True, cache=True)
def _advance(cap, t0, steps, N, code, gamma, r, T, p, uni, trace_at, trace_S, trace_V, trace_pos):
    """Play ``steps`` turns starting at turn index ``t0``; returns the new trace position."""
    pairs = N * (N - 1)
    per = 3 if code == 0 else 2
    for k in range(steps):
        t = t0 + k
        base = k * per
        if code == 0:
            play_a = uni[base + 2] < gamma
        else:
            play_a = (t % T) < r
        x = uni[base] * pairs
        idx = int(x)
        if idx >= pairs:
            idx = pairs - 1
        if play_a:
            i = idx // (N - 1)
            j = idx % (N - 1)
            if j >= i:
                j += 1
            cap[i] -= 1
            cap[j] += 1
        else:
            i = idx // (N - 1)
            m = cap[i] % 3
            if uni[base + 1] < p[m]:
                cap[i] += 1
            else:
                cap[i] -= 1
        if trace_pos < trace_at.shape[0] and trace_at[trace_pos] == t + 1:
            S = 0
            Q = 0.0
            for q in range(N):
                S += cap[q]
                Q += cap[q] * cap[q]
            trace_S[trace_pos] = S
            trace_V[trace_pos] = (Q - S * S / N) / (N - 1)
            trace_pos += 1
    return trace_pos


def _stream(seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(rep,))))


def _replicate(cfg: SimConfig, rep: int, kargs, p):
    N = cfg.params.N
    code, gamma, r, T = kargs
    per = 3 if code == _MIX else 2
    gen = _stream(cfg.seed, rep)
    cap = np.zeros(N, dtype=np.int64)
    trace_at = np.asarray(cfg.trace_points, dtype=np.int64)
    trace_S = np.zeros(len(trace_at), dtype=np.int64)
    trace_V = np.zeros(len(trace_at), dtype=np.float64)
    pos = 0
    t = 0
    while t < cfg.n:
        steps = min(CHUNK, cfg.n - t)
        uni = gen.random(steps * per)
        pos = _advance(cap, t, steps, N, code, gamma, r, T, p, uni, trace_at, trace_S, trace_V, pos)
        t += steps
    return cap, trace_S, trace_V


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.se

    def to_dict(self) -> dict:
        return {"value": self.value, "se": self.se}


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Across-replication estimates; ``capitals`` has shape ``(R, N)``."""

    config: SimConfig
    capitals: np.ndarray
    trace_S: np.ndarray
    trace_V: np.ndarray

    @property
    def S(self) -> np.ndarray:
        return self.capitals.sum(axis=1)

    @property
    def R(self) -> int:
        return self.capitals.shape[0]

    def mean_slope(self) -> Estimate:
        x = self.S / self.config.n
        se = x.std(ddof=1) / math.sqrt(self.R) if self.R > 1 else math.inf
        return Estimate(float(x.mean()), float(se))

    def variance_slope(self) -> Estimate:
        """``Var(S_n) / n`` with a moment-based standard error."""
        S = self.S.astype(float)
        R, n = self.R, self.config.n
        if R < 4:
            return Estimate(float(S.var(ddof=1) / n) if R > 1 else math.nan, math.inf)
        d = S - S.mean()
        s2 = d @ d / (R - 1)
        m4 = float(np.mean(d ** 4))
        var_s2 = max(m4 - s2 * s2 * (R - 3) / (R - 1), 0.0) / R
        return Estimate(float(s2 / n), float(math.sqrt(var_s2) / n))

    def sample_variances(self) -> np.ndarray:
        """Unbiased sample variance of the players' capitals, per replication."""
        return self.capitals.astype(float).var(axis=1, ddof=1)

    def sample_variance_slope(self) -> Estimate:
        x = self.sample_variances() / self.config.n
        se = x.std(ddof=1) / math.sqrt(self.R) if self.R > 1 else math.inf
        return Estimate(float(x.mean()), float(se))

    def residue_frequencies(self) -> np.ndarray:
        """Empirical law of capital mod 3 for each player, shape ``(N, 3)``."""
        m = np.mod(self.capitals, 3)
        return np.stack([(m == k).mean(axis=0) for k in range(3)], axis=1)

    def to_dict(self) -> dict:
        return {
            "config": self.config.describe(),
            "rng": RNG_ID,
            "mean_slope": self.mean_slope().to_dict(),
            "variance_slope": self.variance_slope().to_dict(),
            "sample_variance_slope": self.sample_variance_slope().to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def trace_csv(self) -> str:
        """Replication-averaged trace: ``turn,S_n,sample_variance``."""
        lines = ["turn,S_n,sample_variance"]
        if len(self.config.trace_points):
            S = self.trace_S.mean(axis=0)
            V = self.trace_V.mean(axis=0)
            for t, a, b in zip(self.config.trace_points, S, V):
                lines.append(f"{t},{a:.17g},{b:.17g}")
        return "\n".join(lines) + "\n"


def simulate(config: SimConfig, threads: Optional[int] = None) -> SimulationResult:
    """Run all replications; the result is independent of ``threads``."""
    coins = float_coins(config.params.coins)
    p = np.array(coins.p, dtype=np.float64)
    kargs = config.kernel_args()
    threads = threads or default_threads()
    reps = range(config.R)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            out = list(ex.map(lambda k: _replicate(config, k, kargs, p), reps))
    else:
        out = [_replicate(config, k, kargs, p) for k in reps]
    caps = np.stack([o[0] for o in out])
    tS = np.stack([o[1] for o in out])
    tV = np.stack([o[2] for o in out])
    return SimulationResult(config, caps, tS, tV)


def estimate_sample_variance_slope(config: SimConfig, threads: Optional[int] = None) -> Estimate:
    """Average of ``sample variance / n`` at the horizon, across replications."""
    return simulate(config, threads).sample_variance_slope()


@dataclass(frozen=True)
class CLTDiagnostic:
    R: int
    mean: float
    variance: float
    ks_distance: float
    ks_pvalue: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean) <= 3 / math.sqrt(self.R)

    @property
    def variance_ok(self) -> bool:
        return abs(self.variance - 1) <= 5 / math.sqrt(self.R)

    def to_dict(self) -> dict:
        return {"R": self.R, "mean": self.mean, "variance": self.variance,
                "ks_distance": self.ks_distance, "ks_pvalue": self.ks_pvalue,
                "mean_ok": self.mean_ok, "variance_ok": self.variance_ok}


def standardize(result: SimulationResult, mu, sigma2) -> np.ndarray:
    n = result.config.n
    return (result.S - n * float(mu)) / math.sqrt(n * float(sigma2))


def clt_check(config: SimConfig, mu, sigma2, threads: Optional[int] = None,
              result: SimulationResult | None = None) -> CLTDiagnostic:
    """Standardize ``S_n`` with the analytic parameters and compare with N(0, 1)."""
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")
    if result is None:
        result = simulate(config, threads)
    z = standardize(result, mu, sigma2)
    ks = scipy.stats.kstest(z, "norm")
    return CLTDiagnostic(len(z), float(z.mean()), float(z.var(ddof=1)), float(ks.statistic), float(ks.pvalue))
