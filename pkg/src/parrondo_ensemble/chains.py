"""Transition and payoff matrices for the ensemble games.

State spaces:

* full: ``{0,1,2}^N``, each player's capital mod 3; index is the base-3 value
  of ``(x_1, ..., x_N)`` with player 1 the most significant digit.
* reduced: type counts ``(n0, n1, n2)`` with ``n0 + n1 + n2 = N``, ordered
  lexicographically by ``(n0, n1)``.
* lumped one-player (3 states) and two-player (9 states, index ``3*x1 + x2``)
  marginal chains of an ``N``-player ensemble.

A :class:`GameChain` stores the transition matrix together with its
payoff-weighted matrices (``P*W`` and ``P*W*W``, entrywise), and optionally the
per-player weighted matrices for players 1 and 2.  Mixtures combine weighted
matrices directly, so no payoff matrix ever has to be merged.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np

from . import linalg
from .params import CoinProbs
from .scalar import EXACT, FLOAT, format_scalar

DEFAULT_MAX_STATES = 3 ** 8

APRIME = "A'"
GAME_B = "B"
GAME_A = "A"


class StateSpaceTooLarge(ValueError):
    """Raised when a full-chain builder would exceed the state-count cap."""


# -- state indexing ---------------------------------------------------------


@dataclass(frozen=True)
class StateIndexFull:
    """Bijection between ``{0,1,2}^N`` and ``0 .. 3^N - 1``."""

    N: int

    @property
    def size(self) -> int:
        return 3 ** self.N

    def index(self, x) -> int:
        if len(x) != self.N:
            raise ValueError(f"state {x!r} does not have {self.N} coordinates")
        i = 0
        for xi in x:
            if xi not in (0, 1, 2):
                raise ValueError(f"coordinate {xi!r} not in {{0,1,2}}")
            i = 3 * i + xi
        return i

    def state(self, i: int) -> tuple:
        if not 0 <= i < self.size:
            raise IndexError(i)
        digits = []
        for _ in range(self.N):
            i, d = divmod(i, 3)
            digits.append(d)
        return tuple(reversed(digits))

    def states(self):
        return [self.state(i) for i in range(self.size)]


@dataclass(frozen=True)
class StateIndexReduced:
    """Bijection between type counts ``(n0, n1, n2)`` and ``0 .. C(N+2,2) - 1``."""

    N: int
    _states: tuple = field(init=False, repr=False, compare=False)
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(
            (n0, n1, self.N - n0 - n1) for n0 in range(self.N + 1) for n1 in range(self.N - n0 + 1)
        )
        object.__setattr__(self, "_states", states)
        object.__setattr__(self, "_lookup", {s: k for k, s in enumerate(states)})

    @property
    def size(self) -> int:
        return comb(self.N + 2, 2)

    def index(self, counts) -> int:
        try:
            return self._lookup[tuple(counts)]
        except KeyError:
            raise ValueError(f"{counts!r} is not a type-count vector summing to {self.N}") from None

    def state(self, i: int) -> tuple:
        return self._states[i]

    def states(self):
        return list(self._states)


# -- the chain container ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GameChain:
    """A stochastic matrix with its payoff-weighted companions.

    ``Pd = P*W`` and ``Pdd = P*W*W`` (entrywise) describe the tracked profit.
    ``P1``, ``P2`` and ``P12`` are the analogues for players 1 and 2 and their
    product payoff; they are ``None`` when the chain does not track players.
    """

    P: np.ndarray
    Pd: np.ndarray
    Pdd: np.ndarray
    P1: Optional[np.ndarray] = None
    P2: Optional[np.ndarray] = None
    P12: Optional[np.ndarray] = None
    label: str = ""
    states: tuple = ()

    @classmethod
    def from_payoffs(cls, P, W, W1=None, W2=None, label="", states=()):
        P = np.asarray(P)
        W = np.asarray(W)
        kw = {}
        if W1 is not None and W2 is not None:
            W1, W2 = np.asarray(W1), np.asarray(W2)
            kw = dict(P1=P * W1, P2=P * W2, P12=P * W1 * W2)
        return cls(P=P, Pd=P * W, Pdd=P * W * W, label=label, states=tuple(states), **kw)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def mode(self) -> str:
        return linalg.mode_of(self.P)

    @property
    def has_players(self) -> bool:
        return self.P1 is not None

    @property
    def W(self) -> np.ndarray:
        """Payoff matrix recovered as ``Pd / P`` on the support of ``P`` (0 elsewhere)."""
        return _recover(self.P, self.Pd)

    @property
    def W1(self):
        return None if self.P1 is None else _recover(self.P, self.P1)

    @property
    def W2(self):
        return None if self.P2 is None else _recover(self.P, self.P2)

    def with_payoffs(self, which: str) -> "GameChain":
        """Re-target the tracked profit to player 1 (``"1"``) or player 2 (``"2"``)."""
        if not self.has_players:
            raise ValueError(f"chain {self.label!r} does not track individual players")
        Pk = self.P1 if which == "1" else self.P2
        W = _recover(self.P, Pk)
        return GameChain(self.P, Pk, self.P * W * W, self.P1, self.P2, self.P12,
                         f"{self.label}[player {which}]", self.states)

    def to_float(self) -> "GameChain":
        f = linalg.to_float
        opt = lambda M: None if M is None else f(M)  # noqa: E731
        return GameChain(f(self.P), f(self.Pd), f(self.Pdd), opt(self.P1), opt(self.P2),
                         opt(self.P12), self.label, self.states)


def _recover(P, Pw):
    W = np.zeros(P.shape, dtype=int)
    for idx, p in np.ndenumerate(P):
        if p != 0:
            w = Pw[idx] / p
            W[idx] = int(round(float(w)))
    return W


# -- helpers ------------------------------------------------------------------


def _guard(N: int, max_states: int | None):
    cap = DEFAULT_MAX_STATES if max_states is None else max_states
    if 3 ** N > cap:
        raise StateSpaceTooLarge(f"3^{N} = {3 ** N} states exceeds the cap of {cap}")


def _mode_of_coins(coins: CoinProbs | None) -> str:
    return coins.mode if coins is not None else EXACT


def _num(x, mode):
    return float(x) if mode == FLOAT else Fraction(x)


def _check_N(N, minimum):
    if isinstance(N, bool) or int(N) != N or N < minimum:
        raise ValueError(f"N must be an integer >= {minimum}, got {N!r}")
    return int(N)


# -- full chains on {0,1,2}^N -----------------------------------------------


def build_full_B(N: int, coins: CoinProbs, max_states: int | None = None) -> GameChain:
    """Game B on the full state space: a uniformly chosen player tosses a ``p_{x_i}`` coin."""
    N = _check_N(N, 1)
    _guard(N, max_states)
    mode = coins.mode
    idx = StateIndexFull(N)
    n = idx.size
    P = linalg.zeros((n, n), mode)
    W = np.zeros((n, n), dtype=int)
    W1 = np.zeros((n, n), dtype=int)
    W2 = np.zeros((n, n), dtype=int)
    inv_n = _num(Fraction(1, N), mode)
    for a, x in enumerate(idx.states()):
        for i in range(N):
            for step, prob in ((1, coins.p[x[i]]), (-1, coins.q[x[i]])):
                y = list(x)
                y[i] = (x[i] + step) % 3
                b = idx.index(y)
                P[a, b] += inv_n * prob
                W[a, b] = step
                if i == 0:
                    W1[a, b] = step
                elif i == 1:
                    W2[a, b] = step
    players = (W1, W2) if N >= 2 else (None, None)
    return GameChain.from_payoffs(P, W, *players, label=f"B full N={N}", states=idx.states())


def build_full_Aprime(N: int, max_states: int | None = None, mode: str = EXACT) -> GameChain:
    """Game A' on the full state space: an ordered pair (donor, beneficiary) moves one unit."""
    N = _check_N(N, 2)
    _guard(N, max_states)
    idx = StateIndexFull(N)
    n = idx.size
    P = linalg.zeros((n, n), mode)
    W = np.zeros((n, n), dtype=int)
    W1 = np.zeros((n, n), dtype=int)
    W2 = np.zeros((n, n), dtype=int)
    w = _num(Fraction(1, N * (N - 1)), mode)
    for a, x in enumerate(idx.states()):
        for i, j in itertools.permutations(range(N), 2):
            y = list(x)
            y[i] = (x[i] - 1) % 3
            y[j] = (x[j] + 1) % 3
            b = idx.index(y)
            P[a, b] += w
            for k, Wk in ((0, W1), (1, W2)):
                if k == i:
                    Wk[a, b] = -1
                elif k == j:
                    Wk[a, b] = 1
    return GameChain.from_payoffs(P, W, W1, W2, label=f"A' full N={N}", states=idx.states())


def build_mixture(chainA: GameChain, chainB: GameChain, gamma) -> GameChain:
    """Convex combination ``gamma * A + (1 - gamma) * B`` of chains and their weighted matrices."""
    if chainA.P.shape != chainB.P.shape:
        raise ValueError(f"shape mismatch: {chainA.P.shape} vs {chainB.P.shape}")
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    g, h = gamma, 1 - gamma

    def mix(a, b):
        if a is None or b is None:
            return None
        return g * a + h * b

    if gamma == 0 or gamma == 1:
        src = chainA if gamma == 1 else chainB
        both = chainA.has_players and chainB.has_players
        return GameChain(src.P.copy(), src.Pd.copy(), src.Pdd.copy(),
                         src.P1.copy() if both else None, src.P2.copy() if both else None,
                         src.P12.copy() if both else None,
                         f"mix({gamma}) {chainA.label} | {chainB.label}", chainB.states)
    return GameChain(
        mix(chainA.P, chainB.P), mix(chainA.Pd, chainB.Pd), mix(chainA.Pdd, chainB.Pdd),
        mix(chainA.P1, chainB.P1), mix(chainA.P2, chainB.P2), mix(chainA.P12, chainB.P12),
        f"mix({gamma}) {chainA.label} | {chainB.label}", chainB.states,
    )


def build_full_mixture(N: int, coins: CoinProbs, gamma, max_states: int | None = None) -> GameChain:
    return build_mixture(build_full_Aprime(N, max_states, coins.mode),
                         build_full_B(N, coins, max_states), gamma)


# -- reduced chain on type counts ---------------------------------------------

# Transitions from (n0, n1, n2): (count change, player type, game, result, probability).
# A' rows carry weight n_a * (n_b - [a == b]) / (N (N - 1)); B rows n_a p_a / N or n_a q_a / N.
TABLE1 = (
    ((-2, +1, +1), 0, APRIME, 0),
    ((-1, -1, +2), 0, APRIME, 1),
    ((0, 0, 0), 0, APRIME, 2),
    ((0, 0, 0), 1, APRIME, 0),
    ((+1, -2, +1), 1, APRIME, 1),
    ((+2, -1, -1), 1, APRIME, 2),
    ((-1, +2, -1), 2, APRIME, 0),
    ((0, 0, 0), 2, APRIME, 1),
    ((+1, +1, -2), 2, APRIME, 2),
    ((-1, +1, 0), 0, GAME_B, "win"),
    ((-1, 0, +1), 0, GAME_B, "lose"),
    ((0, -1, +1), 1, GAME_B, "win"),
    ((+1, -1, 0), 1, GAME_B, "lose"),
    ((+1, 0, -1), 2, GAME_B, "win"),
    ((0, +1, -1), 2, GAME_B, "lose"),
)


def build_reduced(N: int, coins: CoinProbs, gamma) -> GameChain:
    """Mixture ``gamma A' + (1-gamma) B`` on type counts, with ensemble payoffs.

    Rows landing on the same target are summed; A' rows that leave the counts
    unchanged become self-loop mass with payoff 0.
    """
    N = _check_N(N, 2)
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    mode = coins.mode
    idx = StateIndexReduced(N)
    n = idx.size
    P = linalg.zeros((n, n), mode)
    Pd = linalg.zeros((n, n), mode)
    pair = _num(Fraction(1, N * (N - 1)), mode)
    single = _num(Fraction(1, N), mode)
    for a, counts in enumerate(idx.states()):
        for delta, ptype, game, result in TABLE1:
            target = tuple(c + d for c, d in zip(counts, delta))
            if game == APRIME:
                k = counts[ptype] * (counts[result] - (1 if result == ptype else 0))
                prob = gamma * pair * k
                pay = 0
            else:
                coin = coins.p[ptype] if result == "win" else coins.q[ptype]
                prob = (1 - gamma) * single * counts[ptype] * coin
                pay = 1 if result == "win" else -1
            if prob == 0:
                continue
            b = idx.index(target)
            P[a, b] += prob
            Pd[a, b] += pay * prob
    Pdd = np.abs(Pd)
    return GameChain(P, Pd, Pdd, label=f"reduced N={N} gamma={gamma}", states=tuple(idx.states()))


# -- one-player originals and lumped chains -----------------------------------


def _cycle_payoff() -> np.ndarray:
    """+1 for a move up (mod 3), -1 for a move down, 0 on the diagonal."""
    return np.array([[0, 1, -1], [-1, 0, 1], [1, -1, 0]], dtype=int)


def original_P_A(mode: str = EXACT) -> np.ndarray:
    h = _num(Fraction(1, 2), mode)
    z = _num(0, mode)
    return linalg.matrix([[z, h, h], [h, z, h], [h, h, z]], mode)


def original_P_B(coins: CoinProbs) -> np.ndarray:
    z = _num(0, coins.mode)
    p, q = coins.p, coins.q
    return linalg.matrix([[z, p[0], q[0]], [q[1], z, p[1]], [p[2], q[2], z]], coins.mode)


def build_one_player_original(kind: str, coins: CoinProbs | None = None, mode: str | None = None) -> GameChain:
    """Parrondo's one-player game A (fair coin) or B (capital-dependent coins)."""
    W = _cycle_payoff()
    if kind == GAME_A:
        m = mode or _mode_of_coins(coins)
        return GameChain.from_payoffs(original_P_A(m), W, label="A one-player", states=(0, 1, 2))
    if kind == GAME_B:
        if coins is None:
            raise ValueError("game B needs coin probabilities")
        return GameChain.from_payoffs(original_P_B(coins), W, label="B one-player", states=(0, 1, 2))
    raise ValueError(f"unknown one-player game {kind!r}")


def lumped_one_from(kind: str, coins: CoinProbs, move, label="") -> GameChain:
    """``move * base + (1 - move) * I`` for the one-player base matrix of ``kind``.

    ``move`` is the per-turn chance that the tracked player is involved:
    ``1/N`` for game B, ``2/N`` for game A'.  It may be any field element
    (fraction, float, or power series in ``1/N``).
    """
    base = original_P_A(coins.mode) if kind == APRIME else original_P_B(coins)
    W = _cycle_payoff()
    I = linalg.identity(3, coins.mode)
    P = move * base + (1 - move) * I
    Pd = move * (base * W)
    return GameChain(P, Pd, Pd * W, label=label, states=(0, 1, 2))


def build_lumped_one(N: int, coins: CoinProbs, kind: str) -> GameChain:
    """Player 1's marginal chain when ``N`` players play ``kind``."""
    N = _check_N(N, 2)
    if kind not in (APRIME, GAME_B):
        raise ValueError(f"kind must be {APRIME!r} or {GAME_B!r}, got {kind!r}")
    move = _num(Fraction(2 if kind == APRIME else 1, N), coins.mode)
    return lumped_one_from(kind, coins, move, label=f"{kind} one-player lumped N={N}")


def _pair_transfer_matrices(mode: str):
    """``(P_A0, P_A1)`` with per-player payoffs for transfers inside / out of the pair."""
    idx = StateIndexFull(2)
    A0 = linalg.zeros((9, 9), mode)
    A1 = linalg.zeros((9, 9), mode)
    W1 = np.zeros((9, 9), dtype=int)
    W2 = np.zeros((9, 9), dtype=int)
    V1 = np.zeros((9, 9), dtype=int)
    V2 = np.zeros((9, 9), dtype=int)
    half = _num(Fraction(1, 2), mode)
    quarter = _num(Fraction(1, 4), mode)
    for a, (x1, x2) in enumerate(idx.states()):
        # 1 -> 2 and 2 -> 1
        for d1, d2 in ((-1, +1), (+1, -1)):
            b = idx.index(((x1 + d1) % 3, (x2 + d2) % 3))
            A0[a, b] += half
            W1[a, b], W2[a, b] = d1, d2
        # 1 -> other, other -> 1, 2 -> other, other -> 2
        for d1, d2 in ((-1, 0), (+1, 0), (0, -1), (0, +1)):
            b = idx.index(((x1 + d1) % 3, (x2 + d2) % 3))
            A1[a, b] += quarter
            V1[a, b], V2[a, b] = d1, d2
    return (A0, W1, W2), (A1, V1, V2)


def lumped_pair_from(kind: str, coins: CoinProbs, coeffs, label="") -> GameChain:
    """Two-player marginal chain assembled from mixing coefficients.

    For game B ``coeffs = (c,)``: ``c * P_B^(2) + (1 - c) * I``.  For game A'
    ``coeffs = (c0, c1, cI)`` weighting the within-pair transfer matrix, the
    pair-to-outside transfer matrix, and the identity.
    """
    mode = coins.mode
    I = linalg.identity(9, mode)
    if kind == GAME_B:
        (c,) = coeffs
        base = build_full_B(2, coins)
        W1, W2 = base.W1, base.W2
        P = c * base.P + (1 - c) * I
        P1, P2 = c * base.P1, c * base.P2
        P12 = linalg.zeros((9, 9), mode) * c
        Pdd = c * (base.P * (W1 + W2) ** 2)
    elif kind == APRIME:
        c0, c1, cI = coeffs
        (A0, W1, W2), (A1, V1, V2) = _pair_transfer_matrices(mode)
        P = c0 * A0 + c1 * A1 + cI * I
        P1 = c0 * (A0 * W1) + c1 * (A1 * V1)
        P2 = c0 * (A0 * W2) + c1 * (A1 * V2)
        P12 = c0 * (A0 * W1 * W2)
        # transfers inside the pair leave the pair's total unchanged
        Pdd = c1 * (A1 * (V1 + V2) ** 2)
    else:
        raise ValueError(f"kind must be {APRIME!r} or {GAME_B!r}, got {kind!r}")
    Pd = P1 + P2
    return GameChain(P, Pd, Pdd, P1, P2, P12, label=label, states=tuple(StateIndexFull(2).states()))


def pair_coefficients(N: int, kind: str, mode: str = EXACT):
    N = _check_N(N, 2)
    if kind == GAME_B:
        return (_num(Fraction(2, N), mode),)
    d = N * (N - 1)
    return (_num(Fraction(2, d), mode), _num(Fraction(4 * (N - 2), d), mode),
            _num(Fraction((N - 2) * (N - 3), d), mode))


def build_lumped_pair(N: int, coins: CoinProbs, kind: str) -> GameChain:
    """Players 1 and 2's joint marginal chain when ``N`` players play ``kind``."""
    if kind not in (APRIME, GAME_B):
        raise ValueError(f"kind must be {APRIME!r} or {GAME_B!r}, got {kind!r}")
    return lumped_pair_from(kind, coins, pair_coefficients(N, kind, coins.mode),
                            label=f"{kind} pair lumped N={N}")


# -- export ---------------------------------------------------------------------


def matrix_to_csv(M) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(M):
        writer.writerow([format_scalar(v) if not isinstance(v, (int, np.integer)) else str(v) for v in row])
    return buf.getvalue()


def matrix_to_json(M) -> str:
    rows = [[format_scalar(v) if not isinstance(v, (int, np.integer)) else f"{int(v)}/1" for v in row]
            for row in np.asarray(M)]
    return json.dumps(rows)


def chain_to_json(chain: GameChain) -> str:
    out = {
        "label": chain.label,
        "mode": chain.mode,
        "states": [list(s) if isinstance(s, tuple) else s for s in chain.states],
        "P": json.loads(matrix_to_json(chain.P)),
        "W": chain.W.tolist(),
    }
    if chain.has_players:
        out["W1"] = chain.W1.tolist()
        out["W2"] = chain.W2.tolist()
    return json.dumps(out)
