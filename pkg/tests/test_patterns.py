from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from parrondo_ensemble import chains as ch
from parrondo_ensemble import formulas as fm
from parrondo_ensemble import markov as mk
from parrondo_ensemble import patterns as pt
from parrondo_ensemble.params import ParameterError, coins_from

RHO13 = F(1, 3)


def _lumped(N, coins, pair=False):
    build = ch.build_lumped_pair if pair else ch.build_lumped_one
    return build(N, coins, ch.APRIME), build(N, coins, ch.GAME_B)


@pytest.mark.parametrize("r,s", [(1, 1), (2, 1), (1, 3), (3, 2)])
@pytest.mark.parametrize("N", [2, 5])
def test_three_methods_agree(r, s, N):
    coins = coins_from(F(2, 5))
    for pair in (False, True):
        A, B = _lumped(N, coins, pair)
        res = [pt.pattern_stats(r, s, A, B, m) for m in pt.METHODS]
        assert len({(x.mu, x.sigma2, x.sigma12) for x in res}) == 1


@pytest.mark.parametrize("r,s,N", [(2, 1, 3), (1, 2, 4)])
def test_pattern_against_dp_oracle(r, s, N):
    rho = 0.4
    coins = coins_from(rho)
    A, B = _lumped(N, coins)
    want_mu, want_var = oracles.pattern_rates([(A.P, A.W)] * r + [(B.P, B.W)] * s)
    got = pt.pattern_stats(r, s, A, B)
    assert got.mu == pytest.approx(want_mu, abs=1e-12)
    assert got.sigma2 == pytest.approx(want_var, abs=1e-8)


def test_ensemble_pattern_against_full_chain_dp():
    # two players: the full 9-state chain driven by A' then B
    rho = 1 / 3
    PA, WA = oracles.brute_full_chain(2, oracles.coins(rho), 1.0)
    PB, WB = oracles.brute_full_chain(2, oracles.coins(rho), 0.0)
    want_mu, want_var = oracles.pattern_rates([(PA, WA), (PB, WB)])
    st_ = pt.pattern_ensemble_stats(1, 1, 2, coins_from(RHO13))
    assert float(st_.mu) == pytest.approx(want_mu, abs=1e-12)
    assert float(st_.sigma2) == pytest.approx(want_var, abs=1e-8)
    assert st_.sigma2 == F(74176355601, 141627323986)


def test_phase_chain_is_uniform_over_phases():
    A, B = _lumped(4, coins_from(RHO13))
    ph = pt.build_phase_chain([A, A, B])
    pi = mk.stationary(ph.chain.P).pi
    for t in range(ph.T):
        assert sum(pi[ph.index(t, 0): ph.index(t, 0) + ph.m]) == F(1, 3)
    # restricted to phase 0 it is the stationary law of the one-period product
    prod = mk.stationary(pt.period_matrix([A, A, B])).pi
    assert np.all(3 * pi[: ph.m] == prod)


def test_period_moments_single_step_is_one_step_formula():
    c = ch.build_mixture(*_lumped(3, coins_from(RHO13), pair=True), F(1, 3))
    a = mk.analyze(c)
    b = pt.period_moments([c])
    assert (a.mu, a.sigma2, a.sigma12) == (b.mu, b.sigma2, b.sigma12)


def test_fair_games_give_zero_mean():
    for r, s, N in ((4, 3, 7), (1, 1, 2), (2, 5, 3)):
        st_ = pt.pattern_ensemble_stats(r, s, N, coins_from(1))
        assert st_.mu == 0 and st_.sigma2 > 0


def test_pattern_mean_one_player_original_games():
    # original one-player games: the closed form's N = 1 branch
    for r, s in ((2, 1), (1, 1), (3, 4)):
        v = pt.pattern_mean(r, s, 1, coins_from(RHO13))
        assert fm.pattern_mean_closed(r, s, 1, RHO13) == pytest.approx(float(v), abs=1e-13)
    # [PAPER] 3/2 times the one-player [2,1] mean equals the coincidence value
    assert F(3, 2) * pt.pattern_mean(2, 1, 1, coins_from(RHO13)) == fm.mu_coincidence(RHO13)


def test_float_mode_matches_exact():
    ex = pt.pattern_ensemble_stats(2, 3, 6, coins_from(F(2, 5)))
    fl = pt.pattern_ensemble_stats(2, 3, 6, coins_from(0.4))
    assert fl.mode == "float"
    for a, b in ((ex.mu, fl.mu), (ex.sigma2, fl.sigma2)):
        assert abs(float(a) - b) < 1e-10


def test_limit_dispatch_and_gamma_equiv():
    st_ = pt.pattern_ensemble_stats(2, 1, float("inf"), coins_from(RHO13))
    assert st_.sigma2 == F(1891312136577, 6060711605323)
    assert pt.pattern_ensemble_stats(2, 4, 3, coins_from(RHO13)).gamma_equiv == F(1, 3)


def test_invalid_input():
    A, B = _lumped(3, coins_from(RHO13))
    with pytest.raises(ValueError):
        pt.pattern_stats(1, 1, A, B, "nope")
    with pytest.raises(ParameterError):
        pt.pattern_stats(0, 1, A, B)
    with pytest.raises(ValueError):
        pt.pattern_stats(1, 1, A, _lumped(3, coins_from(RHO13), pair=True)[1])


def test_richardson_removes_two_orders():
    f = lambda N: F(3) + F(5) / N - F(7) / N ** 2 + F(1) / N ** 3  # noqa: E731
    ex = pt.richardson([f(8), f(16), f(32)])
    assert abs(ex - 3) < F(1, 8 ** 3)
    assert pt.richardson([F(2) + F(1, n) for n in (4, 8, 16)]) == 2


def test_relation_report():
    rep = pt.mixture_pattern_relation(1, 2, RHO13, with_series=True)
    assert rep.ok and rep.exact_residual == 0
    assert rep.series_limit == rep.mixture
    assert rep.to_dict()["ok"] is True


def test_sign_helpers():
    assert pt.pattern_sign(2, 2, 3, F(1, 2)) == 1
    assert pt.pattern_sign(2, 2, 3, F(2)) == -1
    assert pt.pattern_sign(2, 2, 3, 1) == 0
    assert pt.pattern_sign(2, 2, 3, 0.5) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(2, 12),
       st.fractions(min_value=F(1, 10), max_value=10, max_denominator=12))
def test_sign_law(r, s, N, rho):
    mu = pt.pattern_mean(r, s, N, coins_from(rho))
    want = (rho < 1) - (rho > 1)
    assert (mu > 0) - (mu < 0) == want


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(2, 8),
       st.fractions(min_value=F(1, 10), max_value=10, max_denominator=12))
def test_pattern_antisymmetry(r, s, N, rho):
    assert pt.pattern_mean(r, s, N, coins_from(1 / rho)) == -pt.pattern_mean(r, s, N, coins_from(rho))
