"""Cross-module invariants as property tests."""

import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parrondo_ensemble import chains as ch
from parrondo_ensemble import checks
from parrondo_ensemble import formulas as fm
from parrondo_ensemble import markov as mk
from parrondo_ensemble import simulator as sim
from parrondo_ensemble.params import MixtureSpec, ModelParams, coins_from
from parrondo_ensemble.patterns import pattern_ensemble_stats

rhos = st.fractions(min_value=F(1, 10), max_value=10, max_denominator=15)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from((3, 5, 9)), st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_lazy_chain_fundamental_identity(n, N, seed):
    P = checks.random_irreducible_chain(n, np.random.default_rng(seed))
    assert checks.lazy_identity_holds(P, N)


def test_lazy_chain_identity_fails_for_wrong_scaling():
    # negative control: the identity is specific to the lazy chain
    P = checks.random_irreducible_chain(3, np.random.default_rng(0))
    a = mk.fundamental(P)
    b = mk.fundamental(mk.lazy_chain(P, 3))
    assert not np.all(b.Z - b.Pi == 2 * (a.Z - a.Pi))


@settings(max_examples=30, deadline=None)
@given(rhos)
def test_one_player_b_is_fair(rho):
    coins = coins_from(rho)
    pi = fm.pi_B_one(rho)
    assert sum(p * (w - (1 - w)) for p, w in zip(pi, coins.p)) == 0
    # and the displayed law is stationary for the original game B
    P = ch.original_P_B(coins)
    assert np.all(np.array(pi, dtype=object) @ P == np.array(pi, dtype=object))


@pytest.mark.parametrize("N", [2, 3, 4])
def test_game_b_stationary_law_is_product(N):
    rho = F(2, 5)
    pi = mk.stationary(ch.build_full_B(N, coins_from(rho)).P).pi
    one = fm.pi_B_one(rho)
    want = [np.prod([one[d] for d in x]) for x in itertools.product(range(3), repeat=N)]
    assert list(pi) == want


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(2, 12), rhos)
def test_pattern_denominator_positive(r, s, N, rho):
    _, D = fm.pattern_ED(r, s, N, rho)
    assert D > 0


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(2, 8), rhos)
def test_pattern_variance_nonnegative(r, s, N, rho):
    assert pattern_ensemble_stats(r, s, N, coins_from(rho)).sigma2 >= 0


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 6), st.fractions(min_value=0, max_value=F(7, 8), max_denominator=8), rhos)
def test_mixture_analysis_is_deterministic(N, gamma, rho):
    a = mk.mixture_ensemble_stats(N, gamma, coins_from(rho))
    b = mk.mixture_ensemble_stats(N, gamma, coins_from(rho))
    assert (a.mu, a.sigma2, a.sigma12) == (b.mu, b.sigma2, b.sigma12)


def test_pure_aprime_two_players_is_reducible():
    # x1 + x2 mod 3 never changes, so the two-player chain splits into three classes
    with pytest.raises(mk.ReducibleChainError):
        mk.mixture_ensemble_stats(2, 1, coins_from(F(1, 3)))
    assert mk.mixture_ensemble_stats(3, 1, coins_from(F(1, 3))).mu == 0


def test_simulated_game_b_moves_total_by_one():
    n = 300
    cfg = sim.SimConfig(ModelParams(F(1, 3), 0, 4), sim.PURE_B, n, 20, 5, trace_points=tuple(range(1, n + 1)))
    steps = np.diff(sim.simulate(cfg).trace_S, axis=1)
    assert np.all(np.abs(steps) == 1)


def test_simulated_residues_exchangeable():
    cfg = sim.SimConfig(ModelParams(F(1, 3), 0, 4), MixtureSpec(F(1, 2)), 500, 3000, 8)
    f = sim.simulate(cfg).residue_frequencies()
    se = np.sqrt(0.25 / 3000)
    assert np.max(np.abs(f - f.mean(axis=0))) < 5 * se
