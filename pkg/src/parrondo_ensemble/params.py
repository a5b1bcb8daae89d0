"""Model parameters and the coin probabilities of the capital-dependent game."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .scalar import EXACT, FLOAT, Scalar, check_mode, infer_mode, to_mode


class ParameterError(ValueError):
    """Raised for parameters outside the model's domain."""


@dataclass(frozen=True)
class CoinProbs:
    """Win probabilities ``p0, p1, p2`` by capital mod 3, with complements."""

    p0: Scalar
    p1: Scalar
    p2: Scalar
    mode: str = EXACT

    @property
    def q0(self) -> Scalar:
        return 1 - self.p0

    @property
    def q1(self) -> Scalar:
        return 1 - self.p1

    @property
    def q2(self) -> Scalar:
        return 1 - self.p2

    @property
    def p(self) -> tuple:
        return (self.p0, self.p1, self.p2)

    @property
    def q(self) -> tuple:
        return (self.q0, self.q1, self.q2)


@dataclass(frozen=True)
class ModelParams:
    """Bias-adjusted coin parameterization plus the ensemble size.

    ``rho`` > 0 tilts game B (``rho = 1/3`` is Parrondo's original game),
    ``eps`` >= 0 is the bias subtracted from every win probability, ``N`` is
    the number of players.  ``N = 1`` is allowed only for the one-player
    comparison games.
    """

    rho: Scalar
    eps: Scalar = 0
    N: int = 2
    mode: str | None = None

    def __post_init__(self):
        mode = self.mode or infer_mode(self.rho, self.eps)
        check_mode(mode)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "rho", to_mode(self.rho, mode))
        object.__setattr__(self, "eps", to_mode(self.eps, mode))
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ParameterError(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not self.rho > 0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if self.eps < 0:
            raise ParameterError(f"eps must be nonnegative, got {self.eps}")
        if self.N < 1:
            raise ParameterError(f"N must be at least 1, got {self.N}")
        derive_coin_probs(self)  # validates eps against (0, 1)

    @property
    def coins(self) -> CoinProbs:
        return derive_coin_probs(self)


@dataclass(frozen=True)
class MixtureSpec:
    """Random mixture: game A' with probability ``gamma``, else game B."""

    gamma: Scalar

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ParameterError(f"gamma must lie in [0, 1], got {self.gamma}")


@dataclass(frozen=True)
class PatternSpec:
    """Periodic schedule ``(A')^r B^s``."""

    r: int
    s: int

    def __post_init__(self):
        for name in ("r", "s"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer, got {v!r}")

    @property
    def period(self) -> int:
        return self.r + self.s

    @property
    def gamma_equiv(self) -> Fraction:
        return Fraction(self.r, self.r + self.s)


def coins_from(rho, eps=0, mode: str | None = None) -> CoinProbs:
    """Coin probabilities straight from ``rho`` and ``eps``."""
    mode = mode or infer_mode(rho, eps)
    rho, eps = to_mode(rho, mode), to_mode(eps, mode)
    if not rho > 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    p0 = rho * rho / (1 + rho * rho) - eps
    p1 = 1 / (1 + rho) - eps
    for name, p in (("p0", p0), ("p1", p1)):
        if not 0 < p < 1:
            raise ParameterError(
                f"{name} = {p} lies outside (0, 1) for rho={rho}, eps={eps}; eps is too large"
            )
    return CoinProbs(p0, p1, p1, mode)


def derive_coin_probs(params: ModelParams) -> CoinProbs:
    """``p0 = rho^2/(1+rho^2) - eps`` and ``p1 = p2 = 1/(1+rho) - eps``."""
    return coins_from(params.rho, params.eps, params.mode)


def float_coins(coins: CoinProbs) -> CoinProbs:
    return CoinProbs(float(coins.p0), float(coins.p1), float(coins.p2), FLOAT)
