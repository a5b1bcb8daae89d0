from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from parrondo_ensemble import chains as ch
from parrondo_ensemble import formulas as fm
from parrondo_ensemble import linalg
from parrondo_ensemble import markov as mk
from parrondo_ensemble.params import coins_from

RHO13 = F(1, 3)


def test_stationary_matches_eigenvector():
    for N in (2, 3):
        c = ch.build_full_mixture(N, coins_from(0.4), 0.3)
        np.testing.assert_allclose(mk.stationary(c.P).pi, oracles.stationary_eig(c.P), atol=1e-12)
    P = ch.build_full_mixture(2, coins_from(RHO13), F(1, 2)).P
    pi = mk.stationary(P).pi
    assert np.all(pi @ P == pi) and sum(pi) == 1


def test_one_player_game_b():
    # [PAPER] one-player game B at rho = 1/3: pi = (5/13, 2/13, 6/13), variance 81/169
    B = ch.build_one_player_original(ch.GAME_B, coins_from(RHO13))
    assert tuple(mk.stationary(B.P).pi) == fm.pi_B_one(RHO13) == (F(5, 13), F(2, 13), F(6, 13))
    r = mk.mean_variance(B)
    assert r.mu == 0 and r.sigma2 == F(81, 169)
    # independent oracle: Var(S_{n+1}) - Var(S_n) from the exact law of S_n
    assert oracles.variance_rate(B.P.astype(float), B.W) == pytest.approx(81 / 169, abs=1e-10)


def test_fundamental_matrix_properties():
    P = ch.build_lumped_pair(4, coins_from(RHO13), ch.GAME_B).P
    Fm = mk.fundamental(P)
    n = P.shape[0]
    assert np.all(Fm.Z @ (linalg.identity(n) - P + Fm.Pi) == linalg.identity(n))
    v = np.array([F(k, 7) for k in range(n)], dtype=object)
    assert np.all(Fm.apply_D(v) == (Fm.Z - Fm.Pi) @ v)
    assert Fm.verify()


def test_half_mixture_two_players_exact():
    # [PAPER] mean 48/1609 and ensemble variance 114315959583/258261590798
    coins = coins_from(RHO13)
    st_ = mk.mixture_ensemble_stats(2, F(1, 2), coins)
    assert st_.mu == F(48, 1609) == fm.mu_mixture(F(1, 2), RHO13)
    assert st_.sigma2 == F(114315959583, 258261590798)
    full = mk.analyze(ch.build_full_mixture(2, coins, F(1, 2)))
    assert (full.mu, full.sigma2) == (st_.mu, st_.sigma2)


@pytest.mark.parametrize("N,gamma,rho", [(2, 0.5, 1 / 3), (3, 0.25, 2.0), (3, 0.75, 0.5)])
def test_ensemble_variance_against_dp_oracle(N, gamma, rho):
    P, W = oracles.brute_full_chain(N, oracles.coins(rho), gamma)
    mean, _ = oracles.profit_moments_dp(P, W, 1)
    want = oracles.variance_rate(P, W, n=400)
    st_ = mk.mixture_ensemble_stats(N, gamma, coins_from(rho))
    assert st_.mu == pytest.approx(mean, abs=1e-12)
    assert st_.sigma2 == pytest.approx(want, abs=1e-8)


def test_covariance_against_dp_oracle():
    # Var rate of S1 + S2 = sigma2_1 + sigma2_2 + 2 sigma12
    coins = coins_from(0.5)
    pair = ch.build_mixture(ch.build_lumped_pair(3, coins, ch.APRIME),
                            ch.build_lumped_pair(3, coins, ch.GAME_B), 0.5)
    s1 = mk.mean_variance(pair.with_payoffs("1")).sigma2
    s2 = mk.mean_variance(pair.with_payoffs("2")).sigma2
    cov = mk.covariance_param(pair)
    rate = oracles.variance_rate(pair.P, pair.W1 + pair.W2, n=400)
    assert s1 + s2 + 2 * cov == pytest.approx(rate, abs=1e-8)
    assert mk.mean_variance(pair).sigma2 == pytest.approx(rate, abs=1e-8)


def test_reducible_chain_rejected():
    P = linalg.matrix([[1, 0, 0], [0, F(1, 2), F(1, 2)], [0, F(1, 2), F(1, 2)]])
    assert not mk.is_irreducible(P)
    with pytest.raises(mk.ReducibleChainError):
        mk.stationary(P)
    Ap = ch.build_full_Aprime(2)
    with pytest.raises(mk.ReducibleChainError):
        mk.stationary(Ap.P)


def test_missing_payoffs():
    c = ch.build_lumped_one(3, coins_from(RHO13), ch.GAME_B)
    with pytest.raises(mk.MissingPayoffError):
        mk.covariance_param(c)


def test_exchangeability_positive_and_negative():
    coins = coins_from(RHO13)
    for N in (2, 3):
        P = ch.build_full_mixture(N, coins, F(1, 3)).P
        assert mk.check_exchangeability(P, N)
        assert mk.check_permutation_symmetry(P, N)
    # negative control: player 1 alone gets extra turns of game B
    P = ch.build_full_mixture(2, coins, F(1, 2)).P
    idx = ch.StateIndexFull(2)
    Q = linalg.zeros(P.shape)
    for a, (x1, x2) in enumerate(idx.states()):
        Q[a, idx.index(((x1 + 1) % 3, x2))] += coins.p[x1]
        Q[a, idx.index(((x1 - 1) % 3, x2))] += 1 - coins.p[x1]
    R = (P + Q) / 2
    rep = mk.check_exchangeability(R, 2)
    assert not rep and rep.max_deviation > 0
    assert not mk.check_permutation_symmetry(R, 2)


def test_sigma2_positive_flag():
    st_ = mk.mixture_ensemble_stats(3, F(1, 2), coins_from(RHO13))
    assert mk.analyze(ch.build_full_mixture(2, coins_from(RHO13), F(1, 2))).sigma2_positive
    assert st_.sigma2 > 0
    # a single player under pure A' has zero mean but positive variance
    a = mk.mean_variance(ch.build_lumped_one(3, coins_from(RHO13), ch.APRIME))
    assert a.sigma2_positive and a.mu == 0


def test_ensemble_limit_dispatch():
    coins = coins_from(RHO13)
    assert mk.ensemble_variance_mixture(float("inf"), F(1, 2), coins) == F(5941525691817, 13404609664322)
    assert mk.ensemble_variance_mixture(2, F(1, 2), coins) == F(114315959583, 258261590798)


def test_to_dict_serialises():
    d = mk.mixture_ensemble_stats(2, F(1, 2), coins_from(RHO13)).to_dict()
    assert d["mu"] == "48/1609" and d["mode"] == "exact"
    r = mk.analyze(ch.build_lumped_pair(2, coins_from(0.3), ch.GAME_B)).to_dict()
    assert isinstance(r["sigma2"], float)


@settings(max_examples=30, deadline=None)
@given(st.fractions(min_value=F(1, 10), max_value=10, max_denominator=20),
       st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=20),
       st.integers(2, 8))
def test_float_agrees_with_exact(rho, gamma, N):
    ex = mk.mixture_ensemble_stats(N, gamma, coins_from(rho))
    fl = mk.mixture_ensemble_stats(N, float(gamma), coins_from(float(rho)))
    for a, b in ((ex.mu, fl.mu), (ex.sigma2, fl.sigma2), (ex.sigma12, fl.sigma12)):
        assert abs(float(a) - b) <= 1e-10 * max(1.0, abs(float(a)))
    assert ex.sigma2 > 0


def test_lazy_chain():
    P = linalg.matrix([[0, 1], [F(1, 2), F(1, 2)]])
    L = mk.lazy_chain(P, 4)
    assert np.all(L == P / 4 + F(3, 4) * linalg.identity(2))
