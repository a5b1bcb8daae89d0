import json
from fractions import Fraction as F
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from parrondo_ensemble import chains as ch
from parrondo_ensemble import linalg
from parrondo_ensemble.params import coins_from

RHO13 = F(1, 3)
rhos = st.fractions(min_value=F(1, 20), max_value=20, max_denominator=30)
gammas = st.fractions(min_value=0, max_value=1, max_denominator=12)


def _stochastic(P):
    assert np.all(P >= 0)
    assert all(s == 1 for s in linalg.row_sums(P))


def test_state_index_roundtrip():
    idx = ch.StateIndexFull(3)
    assert idx.size == 27
    assert idx.index((1, 0, 2)) == 11
    assert all(idx.index(idx.state(i)) == i for i in range(27))
    red = ch.StateIndexReduced(4)
    assert red.size == comb(6, 2) == len(red.states())
    assert all(red.index(red.state(i)) == i for i in range(red.size))
    with pytest.raises(ValueError):
        idx.index((3, 0, 0))
    with pytest.raises(ValueError):
        red.index((1, 1, 1))


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("gamma", [0.0, 0.25, 1.0])
def test_full_chain_matches_enumeration(N, gamma):
    rho = 0.4
    coins = coins_from(rho)
    P, W = oracles.brute_full_chain(N, oracles.coins(rho), gamma)
    c = ch.build_full_mixture(N, coins, gamma)
    np.testing.assert_allclose(c.P.astype(float), P, atol=1e-15)
    np.testing.assert_allclose(c.Pd.astype(float), P * W, atol=1e-15)
    np.testing.assert_allclose(c.Pdd.astype(float), P * W * W, atol=1e-15)


def test_full_aprime_keeps_total_capital():
    c = ch.build_full_Aprime(3)
    _stochastic(c.P)
    assert np.all(c.Pd == 0)


def test_state_cap():
    with pytest.raises(ch.StateSpaceTooLarge):
        ch.build_full_B(5, coins_from(RHO13), max_states=100)


@pytest.mark.parametrize("N", [3, 4])
@pytest.mark.parametrize("kind", [ch.APRIME, ch.GAME_B])
def test_lumped_chains_match_full_marginals(N, kind):
    rho = 0.3
    gamma = 1.0 if kind == ch.APRIME else 0.0
    P, _, W1, W2 = oracles.brute_full_chain(N, oracles.coins(rho), gamma, players=True)
    if kind == ch.APRIME:
        # A' alone conserves total capital mod 3, so its stationary law is not
        # unique; any positive weights give the same lumped chain
        Pw, *_ = oracles.brute_full_chain(N, oracles.coins(rho), 0.5)
    else:
        Pw = P
    coins = coins_from(rho)
    one = ch.build_lumped_one(N, coins, kind)
    pair = ch.build_lumped_pair(N, coins, kind)
    lump = lambda M, k: oracles.lump(Pw, M, N, k)  # noqa: E731
    np.testing.assert_allclose(one.P.astype(float), lump(P, 1), atol=1e-12)
    np.testing.assert_allclose(one.Pd.astype(float), lump(P * W1, 1), atol=1e-12)
    np.testing.assert_allclose(pair.P.astype(float), lump(P, 2), atol=1e-12)
    np.testing.assert_allclose(pair.P1.astype(float), lump(P * W1, 2), atol=1e-12)
    np.testing.assert_allclose(pair.P2.astype(float), lump(P * W2, 2), atol=1e-12)
    np.testing.assert_allclose(pair.P12.astype(float), lump(P * W1 * W2, 2), atol=1e-12)
    np.testing.assert_allclose(pair.Pdd.astype(float), lump(P * (W1 + W2) ** 2, 2), atol=1e-12)


def test_lumped_one_is_lazy_original():
    coins = coins_from(RHO13)
    N = 7
    I = linalg.identity(3)
    b = ch.build_lumped_one(N, coins, ch.GAME_B)
    assert np.all(b.P == F(1, N) * ch.original_P_B(coins) + (1 - F(1, N)) * I)
    a = ch.build_lumped_one(N, coins, ch.APRIME)
    assert np.all(a.P == F(2, N) * ch.original_P_A() + (1 - F(2, N)) * I)


def test_pair_coefficients_sum_to_one():
    for N in range(2, 12):
        c0, c1, cI = ch.pair_coefficients(N, ch.APRIME)
        assert c0 + c1 + cI == 1
        assert ch.pair_coefficients(N, ch.GAME_B) == (F(2, N),)


@settings(max_examples=40, deadline=None)
@given(rhos, gammas, st.integers(2, 6))
def test_builders_are_stochastic(rho, gamma, N):
    try:
        coins = coins_from(rho)
    except ValueError:
        return
    for kind in (ch.APRIME, ch.GAME_B):
        _stochastic(ch.build_lumped_one(N, coins, kind).P)
        _stochastic(ch.build_lumped_pair(N, coins, kind).P)
    _stochastic(ch.build_reduced(N, coins, gamma).P)
    if N <= 4:
        _stochastic(ch.build_full_mixture(N, coins, gamma).P)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 20), st.floats(0, 1), st.integers(2, 5))
def test_float_builders_are_stochastic(rho, gamma, N):
    coins = coins_from(rho)
    for P in (ch.build_reduced(N, coins, gamma).P, ch.build_lumped_pair(N, coins, ch.APRIME).P):
        assert np.all(P >= 0)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)


def test_reduced_chain_shape():
    c = ch.build_reduced(5, coins_from(RHO13), F(1, 2))
    assert c.n == comb(7, 2)
    assert c.states[0] == (0, 0, 5)


def test_exports():
    P = linalg.matrix([[F(1, 3), F(2, 3)], [1, 0]])
    assert ch.matrix_to_csv(P) == "1/3,2/3\n1/1,0/1\n"
    assert json.loads(ch.matrix_to_json(P)) == [["1/3", "2/3"], ["1/1", "0/1"]]
    c = json.loads(ch.chain_to_json(ch.build_one_player_original(ch.GAME_B, coins_from(RHO13))))
    assert c["P"][0] == ["0/1", "1/10", "9/10"]
    assert c["W"][0] == [0, 1, -1]


def test_mixture_validation():
    coins = coins_from(RHO13)
    a = ch.build_lumped_one(3, coins, ch.APRIME)
    with pytest.raises(ValueError):
        ch.build_mixture(a, ch.build_lumped_pair(3, coins, ch.GAME_B), F(1, 2))
    with pytest.raises(ValueError):
        ch.build_mixture(a, a, F(2))
    with pytest.raises(ValueError):
        ch.build_lumped_one(1, coins, ch.GAME_B)
