"""Registry of verification cases: published values and structural properties.

Each case is a function returning a :class:`CheckResult`.  The command-line
``verify`` subcommand and the acceptance tests both run cases from here.
Cases whose id starts with ``mc.`` are Monte Carlo runs marked slow; plain
``verify`` skips them and ``verify --all`` includes them.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import formulas as fm
from . import linalg
from .asymptotics import mixture_limit, pattern_limit, pattern_mean_limit_series
from .chains import (
    APRIME,
    GAME_A,
    GAME_B,
    StateIndexFull,
    build_full_mixture,
    build_lumped_one,
    build_lumped_pair,
    build_mixture,
    build_one_player_original,
    build_reduced,
)
from .markov import (
    analyze,
    check_exchangeability,
    covariance_param,
    fundamental,
    is_irreducible,
    lazy_chain,
    mean_variance,
    mixture_ensemble_stats,
    stationary,
)
from .params import MixtureSpec, ModelParams, PatternSpec, coins_from
from .patterns import mixture_pattern_relation, pattern_ensemble_stats, pattern_mean, pattern_stats
from .scalar import format_scalar

F = Fraction
RHO13 = F(1, 3)


@dataclass
class CheckResult:
    case_id: str
    passed: bool
    expected: object = None
    computed: object = None
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{status} {self.case_id}"]
        if self.expected is not None or self.computed is not None:
            parts.append(f"expected={_fmt(self.expected)} computed={_fmt(self.computed)}")
        if self.detail:
            parts.append(self.detail)
        parts.append(f"({self.seconds:.2f}s)")
        return "  ".join(parts)

    def to_dict(self) -> dict:
        return {"case": self.case_id, "passed": self.passed, "expected": _fmt(self.expected),
                "computed": _fmt(self.computed), "detail": self.detail, "seconds": self.seconds}


def _fmt(x):
    if x is None:
        return None
    if isinstance(x, (Fraction, int, float)):
        return format_scalar(x)
    return str(x)


@dataclass(frozen=True)
class Case:
    case_id: str
    fn: Callable
    description: str
    slow: bool = False


REGISTRY: dict[str, Case] = {}


def case(case_id: str, description: str, slow: bool = False):
    def deco(fn):
        REGISTRY[case_id] = Case(case_id, fn, description, slow)
        return fn
    return deco


def run_case(case_id: str) -> CheckResult:
    try:
        c = REGISTRY[case_id]
    except KeyError:
        raise KeyError(f"unknown case {case_id!r}") from None
    t = time.perf_counter()
    res = c.fn()
    res.case_id = case_id
    res.seconds = time.perf_counter() - t
    return res


def case_ids(include_slow: bool = False) -> list:
    return [k for k, c in REGISTRY.items() if include_slow or not c.slow]


def _eq(case_id, expected, computed, detail="") -> CheckResult:
    return CheckResult(case_id, expected == computed, expected, computed, detail)


# -- exact reproductions --------------------------------------------------------


@case("mu.mixture.biased", "half mixture mean with eps = 1/1000, N = 200")
def _mu_biased():
    coins = coins_from(RHO13, F(1, 1000))
    one = build_mixture(build_lumped_one(200, coins, APRIME), build_lumped_one(200, coins, GAME_B), F(1, 2))
    mu = 200 * mean_variance(one).mu
    target = F(193387599, 6704101000)
    ok = mu == target == fm.mu_mixture_biased_half(RHO13, F(1, 1000))
    return CheckResult("", ok, target, mu, "engine and closed form")


@case("sigma2.mixture.N2", "half mixture ensemble variance, N = 2, rho = 1/3")
def _sigma2_mix_n2():
    s = mixture_ensemble_stats(2, F(1, 2), coins_from(RHO13)).sigma2
    target = F(114315959583, 258261590798)
    return CheckResult("", s == target == fm.sigma2_mixture_half_rho13(2), target, s)


@case("sigma2.mixture.limit", "half mixture ensemble variance as N -> oo, rho = 1/3")
def _sigma2_mix_lim():
    s = mixture_limit(F(1, 2), coins_from(RHO13)).sigma2
    target = F(5941525691817, 13404609664322)
    return CheckResult("", s == target == fm.sigma2_mixture_half_rho13_limit(), target, s)


@case("sigma2.pattern11.N2", "pattern [1,1] ensemble variance, N = 2, rho = 1/3")
def _sigma2_p11_n2():
    s = pattern_ensemble_stats(1, 1, 2, coins_from(RHO13)).sigma2
    target = F(74176355601, 141627323986)
    ok = s == target == fm.sigma2_pattern11_rho13(2) == fm.sigma2_pattern11_N2(RHO13)
    return CheckResult("", ok, target, s)


@case("sigma2.pattern11.limit", "pattern [1,1] ensemble variance as N -> oo, rho = 1/3")
def _sigma2_p11_lim():
    s = pattern_limit(1, 1, coins_from(RHO13)).sigma2
    target = F(5935929718185, 13404609664322)
    return CheckResult("", s == target == fm.sigma2_pattern11_rho13_limit(), target, s)


def _pattern_limit_case(r, s):
    def fn():
        v = pattern_limit(r, s, coins_from(RHO13)).sigma2
        target = fm.PATTERN_SIGMA2_LIMITS_RHO13[F(r, r + s)]
        return CheckResult("", v == target, target, v)
    return fn


PATTERN_LIMIT_CASES = ((2, 1), (4, 2), (1, 1), (2, 2), (3, 3), (1, 2), (2, 4))
for _r, _s in PATTERN_LIMIT_CASES:
    case(f"sigma2.pattern.limit.{_r}-{_s}", f"pattern [{_r},{_s}] variance limit, rho = 1/3")(
        _pattern_limit_case(_r, _s))


@case("pi.mixture.N2", "two-player half-mixture stationary law at rho in {1/3, 2/5, 2}")
def _pi_mix_n2():
    bad = []
    for rho in (F(1, 3), F(2, 5), F(2)):
        pi = stationary(build_full_mixture(2, coins_from(rho), F(1, 2)).P).pi
        disp = fm.pi_mixture_half_N2(rho)
        idx = StateIndexFull(2)
        for x, v in disp.items():
            if pi[idx.index(x)] != v:
                bad.append((rho, x))
    p00 = stationary(build_full_mixture(2, coins_from(RHO13), F(1, 2)).P).pi[0]
    return CheckResult("", not bad, fm.pi_mixture_half_N2(RHO13)[(0, 0)], p00,
                       f"mismatches={bad}" if bad else "all 9 entries at 3 values of rho")


@case("sigma2.B", "game B variance equals (3 rho/(1+rho+rho^2))^2 for N = 1..4")
def _sigma2_b():
    bad = []
    for rho in (F(1, 3), F(2), F(5, 7)):
        coins = coins_from(rho)
        for N in (2, 3, 4):
            one = mean_variance(build_lumped_one(N, coins, GAME_B))
            cov = covariance_param(build_lumped_pair(N, coins, GAME_B))
            total = N * one.sigma2 + N * (N - 1) * cov
            if total != fm.sigma2_B(rho) or one.mu != 0:
                bad.append((rho, N))
    return CheckResult("", not bad, fm.sigma2_B(RHO13), None, f"mismatches={bad}" if bad else "")


# -- cross-path equivalence -----------------------------------------------------


@case("crosspath.full_vs_lumped", "full 3^N chain equals lumped assembly, N in {2,3}")
def _full_vs_lumped():
    bad = []
    count = 0
    for N in (2, 3):
        for gamma in (F(1, 4), F(1, 2)):
            for rho in (F(1, 3), F(2)):
                coins = coins_from(rho)
                full = analyze(build_full_mixture(N, coins, gamma))
                red = analyze(build_reduced(N, coins, gamma))
                lump = mixture_ensemble_stats(N, gamma, coins)
                count += 1
                if not (full.mu == red.mu == lump.mu and full.sigma2 == red.sigma2 == lump.sigma2):
                    bad.append((N, gamma, rho))
    return CheckResult("", not bad, None, None, f"{count} cases, mismatches={bad}")


@case("crosspath.cycle_vs_phase", "cycle sums equal phase chain, r,s <= 3, N <= 6")
def _cycle_vs_phase():
    bad = []
    count = 0
    coins = coins_from(RHO13)
    for N in range(2, 7):
        chains = [(build_lumped_one(N, coins, APRIME), build_lumped_one(N, coins, GAME_B)),
                  (build_lumped_pair(N, coins, APRIME), build_lumped_pair(N, coins, GAME_B))]
        for r in (1, 2, 3):
            for s in (1, 2, 3):
                for A, B in chains:
                    c = pattern_stats(r, s, A, B, "cycle")
                    p = pattern_stats(r, s, A, B, "phase")
                    count += 1
                    if not (c.mu == p.mu and c.sigma2 == p.sigma2 and c.sigma12 == p.sigma12):
                        bad.append((r, s, N, A.n))
    return CheckResult("", not bad, None, None, f"{count} chain pairs, mismatches={bad}")


# -- properties -----------------------------------------------------------------


def random_irreducible_chain(n: int, rng: np.random.Generator, zero_prob: float = 0.3):
    """Random rational stochastic matrix with a guaranteed Hamiltonian cycle."""
    W = rng.integers(1, 10, size=(n, n))
    W[rng.random((n, n)) < zero_prob] = 0
    for i in range(n):
        W[i, (i + 1) % n] = max(W[i, (i + 1) % n], 1)
    rows = [[F(int(w), int(W[i].sum())) for w in W[i]] for i in range(n)]
    return linalg.matrix(rows)


def lazy_identity_holds(P, N) -> bool:
    F0 = fundamental(P)
    FN = fundamental(lazy_chain(P, N))
    return bool(np.all(FN.Z - FN.Pi == N * (F0.Z - F0.Pi)) and np.all(FN.pi == F0.pi))


@case("lazy.identity", "lazy-chain fundamental identity on 200 random chains, N = 1..10")
def _lazy_identity(n_chains: int = 200, seed: int = 2013):
    rng = np.random.default_rng(seed)
    sizes = (3, 5, 9)
    bad = 0
    for k in range(n_chains):
        P = random_irreducible_chain(sizes[k % 3], rng)
        assert is_irreducible(P)
        F0 = fundamental(P)
        D0 = F0.Z - F0.Pi
        for N in range(1, 11):
            FN = fundamental(lazy_chain(P, N))
            if not (np.all(FN.Z - FN.Pi == N * D0) and np.all(FN.pi == F0.pi)):
                bad += 1
    return CheckResult("", bad == 0, 0, bad, f"{n_chains} chains x 10 values of N, failures={bad}")


SIGN_RHOS = (F(1, 10), F(1, 3), F(1, 2), F(9, 10), F(1), F(10, 9), F(2), F(3), F(10))


@case("sign.pattern", "sign of pattern means, r,s <= 6, N = 2..12, 9 values of rho")
def _sign_law():
    bad = []
    count = 0
    for rho in SIGN_RHOS:
        coins = coins_from(rho)
        want = (rho < 1) - (rho > 1)
        for r in range(1, 7):
            for s in range(1, 7):
                for N in range(2, 13):
                    mu = pattern_mean(r, s, N, coins)
                    count += 1
                    if ((mu > 0) - (mu < 0)) != want:
                        bad.append((r, s, N, rho))
    return CheckResult("", not bad, None, None, f"{count} cases, violations={bad[:5]}")


@case("antisymmetry", "mu(1/rho) = -mu(rho) for mixtures and patterns")
def _antisymmetry():
    bad = []
    for rho in (F(1, 3), F(2, 5), F(3, 7), F(5, 2)):
        c, ci = coins_from(rho), coins_from(1 / rho)
        for gamma in (F(1, 4), F(1, 2), F(3, 4)):
            if fm.mu_mixture(gamma, 1 / rho) != -fm.mu_mixture(gamma, rho):
                bad.append(("formula", rho, gamma))
            for N in (2, 3, 5):
                one_a = build_mixture(build_lumped_one(N, c, APRIME), build_lumped_one(N, c, GAME_B), gamma)
                one_b = build_mixture(build_lumped_one(N, ci, APRIME), build_lumped_one(N, ci, GAME_B), gamma)
                if mean_variance(one_a).mu != -mean_variance(one_b).mu:
                    bad.append(("mixture", rho, gamma, N))
        for r in (1, 2, 3):
            for s in (1, 2, 3):
                for N in (2, 3, 5):
                    if pattern_mean(r, s, N, c) != -pattern_mean(r, s, N, ci):
                        bad.append(("pattern", rho, r, s, N))
                fa, fb = fm.pattern_mean_closed(r, s, 4, rho), fm.pattern_mean_closed(r, s, 4, 1 / rho)
                if abs(fa + fb) > 1e-12:
                    bad.append(("closed", rho, r, s))
    return CheckResult("", not bad, None, None, f"violations={bad[:5]}")


@case("relation.exact", "mixture mean at r/(r+s) equals pattern-mean limit, r,s <= 6")
def _relation_exact():
    bad = []
    for rho in (F(1, 3), F(2), F(3, 4)):
        for r in range(1, 7):
            for s in range(1, 7):
                if fm.mu_mixture(F(r, r + s), rho) != fm.pattern_mean_limit(r, s, rho):
                    bad.append((r, s, rho))
    for r, s in ((1, 1), (2, 1), (1, 3)):
        if pattern_mean_limit_series(r, s, coins_from(RHO13)) != fm.mu_mixture(F(r, r + s), RHO13):
            bad.append(("series", r, s))
    return CheckResult("", not bad, None, None, f"108 closed-form pairs + 3 series limits, mismatches={bad}")


@case("relation.richardson", "Richardson-extrapolated pattern mean vs mixture mean, r,s <= 3")
def _relation_richardson(tol: float = 1e-6, N0: int = 64):
    worst = 0.0
    bad = []
    for rho in (F(1, 3), F(2)):
        for r in (1, 2, 3):
            for s in (1, 2, 3):
                rep = mixture_pattern_relation(r, s, rho, tol, N0)
                worst = max(worst, rep.richardson_residual)
                if not rep.ok:
                    bad.append((r, s, rho))
    return CheckResult("", not bad, tol, worst, f"max residual {worst:.3g} at N = {N0}, {2 * N0}, {4 * N0}")


def coincidence_values(rho) -> dict:
    """The five quantities that coincide, each by its own route."""
    coins = coins_from(rho)
    A1 = build_one_player_original(GAME_A, coins, coins.mode)
    B1 = build_one_player_original(GAME_B, coins)
    return {
        "lim pattern [r,r]": [pattern_mean_limit_series(r, r, coins) for r in (1, 2, 3)]
        + [fm.pattern_mean_limit(r, r, rho) for r in (1, 2, 3)],
        "mixture (1/2,1/2), N=2,3,7": [mixture_ensemble_stats(N, F(1, 2), coins).mu for N in (2, 3, 7)],
        "3/2 one-player mixture (2/3,1/3)": [F(3, 2) * mean_variance(build_mixture(A1, B1, F(2, 3))).mu],
        "3/2 one-player pattern [2,1]": [F(3, 2) * pattern_mean(2, 1, 1, coins)],
        "pattern [1,1], N=2": [pattern_mean(1, 1, 2, coins), fm.mu_pattern11(2, rho)],
    }


@case("coincidence", "five coinciding means at rho in {1/3, 1/2, 3}")
def _coincidence():
    bad = []
    for rho in (F(1, 3), F(1, 2), F(3)):
        target = fm.mu_coincidence(rho)
        for name, vals in coincidence_values(rho).items():
            if any(v != target for v in vals):
                bad.append((name, rho))
    return CheckResult("", not bad, fm.mu_coincidence(RHO13), coincidence_values(RHO13)["pattern [1,1], N=2"][0],
                       f"mismatches={bad}")


@case("exchangeability", "stationary laws of N <= 3 mixtures are exchangeable")
def _exchangeability():
    bad = []
    for N in (2, 3):
        for gamma in (F(0), F(1, 4), F(1, 2)):
            for rho in (F(1, 3), F(2)):
                if not check_exchangeability(build_full_mixture(N, coins_from(rho), gamma).P, N):
                    bad.append((N, gamma, rho))
    return CheckResult("", not bad, None, None, f"failures={bad}")


@case("ratio.monotone", "(c^n - b^n)/(b^n - a^n) increasing in n for sampled 0 < a < b < c")
def _ratio_monotone(samples: int = 200, seed: int = 7):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(samples):
        a, b, c = sorted(F(int(x), 97) for x in rng.choice(np.arange(1, 400), 3, replace=False))
        vals = [fm.power_gap_ratio(a, b, c, n) for n in range(1, 31)]
        if any(v2 <= v1 for v1, v2 in zip(vals, vals[1:])):
            bad += 1
    return CheckResult("", bad == 0, 0, bad, f"{samples} triples, n = 1..30")


@case("slope.sample_variance", "sample-variance slopes of A', B and the half mixture")
def _slopes():
    bad = []
    for rho in (F(1, 3), F(2)):
        coins = coins_from(rho)
        for N in (3, 5, 13):
            b = mixture_ensemble_stats(N, F(0), coins).sample_variance_slope
            slope_a = (mean_variance(build_lumped_one(N, coins, APRIME)).sigma2
                       - covariance_param(build_lumped_pair(N, coins, APRIME)))
            m = mixture_ensemble_stats(N, F(1, 2), coins).sample_variance_slope
            if b != fm.sample_variance_slope("B", rho, N):
                bad.append(("B", rho, N))
            if slope_a != fm.sample_variance_slope("A'", rho, N):
                bad.append(("A'", rho, N))
            if not b < m < slope_a:
                bad.append(("order", rho, N))
        lim = mixture_limit(F(1, 2), coins)
        if lim.sigma2_one != fm.sample_variance_slope_mixture_half_asymptotic(rho):
            bad.append(("asymptote", rho))
    return CheckResult("", not bad, F(81, 2197), fm.sample_variance_slope("B", RHO13, 13), f"mismatches={bad}")


# -- Monte Carlo ---------------------------------------------------------------


def _sim(rho, eps, N, schedule, n, R, seed):
    from .simulator import SimConfig, simulate

    return simulate(SimConfig(ModelParams(rho, eps, N), schedule, n, R, seed))


@case("mc.pure_aprime", "pure A' keeps S_n = 0", slow=True)
def _mc_aprime():
    res = _sim(RHO13, 0, 7, "A'", 10 ** 5, 20, 11)
    return CheckResult("", bool(np.all(res.S == 0)), 0, int(np.abs(res.S).max()), "max |S_n| over replications")


@case("mc.pure_b", "pure B, N = 5: variance slope 81/169 and mean 0", slow=True)
def _mc_b():
    res = _sim(RHO13, 0, 5, "B", 10 ** 6, 100, 12)
    v, m = res.variance_slope(), res.mean_slope()
    ok = v.within(float(F(81, 169))) and m.within(0.0)
    return CheckResult("", ok, F(81, 169), v.value,
                       f"var se={v.se:.3g}; mean={m.value:.3g} se={m.se:.3g}")


@case("mc.mixture_biased", "half mixture, eps = 1/1000, N = 200: mean slope", slow=True)
def _mc_mix():
    res = _sim(RHO13, F(1, 1000), 200, MixtureSpec(F(1, 2)), 10 ** 6, 100, 13)
    m = res.mean_slope()
    target = F(193387599, 6704101000)
    return CheckResult("", m.within(float(target)), target, m.value, f"se={m.se:.3g}")


@case("mc.sample_variance", "sample-variance slopes: A' N=3, B N=13, mixture between", slow=True)
def _mc_svs():
    a = _sim(RHO13, 0, 3, "A'", 10 ** 4, 400, 14).sample_variance_slope()
    b = _sim(RHO13, 0, 13, "B", 10 ** 5, 400, 15).sample_variance_slope()
    mix_exact = mixture_ensemble_stats(200, F(1, 2), coins_from(RHO13)).sample_variance_slope
    m = _sim(RHO13, 0, 200, MixtureSpec(F(1, 2)), 10 ** 5, 200, 16).sample_variance_slope()
    b_ref, a_ref = fm.sample_variance_slope("B", RHO13, 200), fm.sample_variance_slope("A'", RHO13, 200)
    ok = a.within(1.0) and b.within(float(F(81, 2197))) and m.within(float(mix_exact)) \
        and b_ref < m.value < a_ref
    return CheckResult("", ok, None, None,
                       f"A' {a.value:.4f}+-{a.se:.2g} (1); B {b.value:.5f}+-{b.se:.2g} ({float(F(81, 2197)):.5f}); "
                       f"mixture {m.value:.5f}+-{m.se:.2g} ({float(mix_exact):.5f}, between {float(b_ref):.5f} and {float(a_ref):.5f})")


@case("mc.clt", "standardized S_n for the half mixture, N = 2", slow=True)
def _mc_clt():
    from .simulator import SimConfig, clt_check

    stats = mixture_ensemble_stats(2, F(1, 2), coins_from(RHO13))
    cfg = SimConfig(ModelParams(RHO13, 0, 2), MixtureSpec(F(1, 2)), 10 ** 5, 2000, 17)
    d = clt_check(cfg, stats.mu, stats.sigma2)
    ok = d.mean_ok and d.variance_ok
    return CheckResult("", ok, None, None,
                       f"mean={d.mean:.4f} (tol {3 / d.R ** 0.5:.3f}) var={d.variance:.4f} "
                       f"(tol {5 / d.R ** 0.5:.3f}) KS={d.ks_distance:.4f}")
