"""Exact and Monte Carlo analysis of N-player Parrondo games.

Game A' redistributes one unit of capital from a random player to another;
game B is the capital-dependent game played by one random player.  The
package computes means, variances and covariances of ensemble profit for
random mixtures and periodic patterns of the two games, over exact rationals
or floats, and checks them by simulation.
"""

from .params import CoinProbs, MixtureSpec, ModelParams, ParameterError, PatternSpec, coins_from, derive_coin_probs

__all__ = [
    "CoinProbs",
    "MixtureSpec",
    "ModelParams",
    "ParameterError",
    "PatternSpec",
    "coins_from",
    "derive_coin_probs",
]
__version__ = "0.1.0"
