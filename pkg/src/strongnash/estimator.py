"""scikit-learn style front end for the SNE search."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .game import Game, Profile, check_profile as _check_shape, parse_game, parse_profile
from .search import SearchConfig, SearchStatus, find_sne


def check_game(game) -> Game:
    """Coerce ``game`` to a two-agent :class:`Game`.

    Accepts a Game, JSON text/bytes in the game file format, or a pair of
    payoff matrices.
    """
    if isinstance(game, Game):
        g = game
    elif isinstance(game, (str, bytes)):
        g = parse_game(game)
    else:
        u1, u2 = game
        g = Game([np.asarray(u1, dtype=object), np.asarray(u2, dtype=object)])
    if g.n_agents != 2:
        raise ValueError(f"expected a two-agent game, got {g.n_agents} agents")
    return g


def check_profile(game: Game, x) -> Profile:
    """Coerce ``x`` (Profile, JSON, or nested sequences) and check its shape."""
    if isinstance(x, Profile):
        p = x
    elif isinstance(x, (str, bytes)):
        p = parse_profile(x, game)
    else:
        p = Profile(x)
    _check_shape(game, p)
    return p


class StrongNashSolver(BaseEstimator):
    """Find a strong Nash equilibrium of a two-agent game.

    ``fit`` runs the configured search and stores ``status_``,
    ``profile_``, ``values_`` and ``trace_``.
    """

    def __init__(self, algorithm="iterated", mode=1, oracle="support", eps=0,
                 removal="random", seed=0, time_limit=300.0, max_iter=10_000):
        self.algorithm = algorithm
        self.mode = mode
        self.oracle = oracle
        self.eps = eps
        self.removal = removal
        self.seed = seed
        self.time_limit = time_limit
        self.max_iter = max_iter

    def _config(self) -> SearchConfig:
        return SearchConfig(algorithm=self.algorithm, mode=self.mode, removal=self.removal,
                            seed=self.seed, backend=self.oracle, eps=Fraction(self.eps),
                            time_limit=self.time_limit, max_iter=self.max_iter)

    def fit(self, game, y=None):
        g = check_game(game)
        self.outcome_ = find_sne(g, self._config())
        self.status_ = self.outcome_.status
        self.profile_ = self.outcome_.profile
        self.values_ = self.outcome_.values
        self.trace_ = self.outcome_.trace
        self.game_ = g
        return self

    @property
    def found_(self) -> bool:
        self._check_fitted()
        return self.status_ is SearchStatus.FOUND

    def _check_fitted(self):
        if not hasattr(self, "outcome_"):
            raise NotFittedError("call fit before using this solver")
