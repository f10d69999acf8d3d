"""Weak and strong Pareto-efficiency verification.

A profile ``x`` is checked by building, for each agent, the gain tensor
``v_i - U_i`` (``v_i`` the agent's value at ``x``); a deviation ``x'`` makes
agent ``i`` strictly better off exactly when the multilinear evaluation of
that tensor at ``x'`` is negative. Joint supports of size ``n`` per agent are
enumerated and the resulting sign system is decided on each.

Two agents get an exact decision (see :mod:`strongnash.bilinear`). Three or
more agents fall back to a numeric search whose hits are re-checked exactly;
an "efficient" verdict there is flagged as uncertified.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bilinear import STRICT, WEAK, BilinearSystem, decide_bilinear, form_from_block
from .game import Game, Profile, check_profile, contract, expected_utilities

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GainTensor:
    agent: int
    values: np.ndarray  # object array of Fractions, same shape as U_i


@dataclass(frozen=True)
class ParetoResult:
    efficient: bool
    witness: Profile | None = None
    gains: tuple[Fraction, ...] | None = None
    certified: bool = True

    @property
    def verdict(self) -> str:
        return "Efficient" if self.efficient else "Dominated"


def build_gain_tensor(game: Game, x: Profile, i: int) -> GainTensor:
    v = expected_utilities(game, x)[i]
    vals = v - game.payoffs[i]
    vals.flags.writeable = False
    return GainTensor(i, vals)


def evaluate(tensor: np.ndarray, x: Sequence) -> Fraction:
    """Multilinear evaluation of ``tensor`` at the profile ``x``."""
    v = contract(tensor, list(x))
    return v.item() if isinstance(v, np.ndarray) else v


def _gains(game: Game, x: Profile, xp: Profile) -> tuple[Fraction, ...]:
    v = expected_utilities(game, x)
    w = expected_utilities(game, xp)
    return tuple(b - a for a, b in zip(v, w))


def _mixed(m: int, pair: tuple[int, int], p: Fraction) -> list[Fraction]:
    s = [Fraction(0)] * m
    a, b = pair
    s[a] += p
    s[b] += 1 - p
    return s


def _pairs(m: int) -> list[tuple[int, int]]:
    if m == 1:
        return [(0, 0)]
    return list(itertools.combinations(range(m), 2))


def _block_mask(neg: np.ndarray, rows, cols) -> np.ndarray:
    """mask[r, c] = some cell of the 2x2 block (rows[r], cols[c]) is True."""
    ra = np.array([r[0] for r in rows])
    rb = np.array([r[1] for r in rows])
    ca = np.array([c[0] for c in cols])
    cb = np.array([c[1] for c in cols])
    row_any = neg[ra] | neg[rb]  # (R, m2)
    return row_any[:, ca] | row_any[:, cb]


def _two_agent_search(game: Game, x: Profile, relations, shifts):
    """Find x' with sum(G_i x') rel_i -shift_i for both agents, or None.

    ``relations[i]`` is STRICT or WEAK; ``shifts`` folds in epsilon.
    """
    G = [build_gain_tensor(game, x, i).values for i in range(2)]
    m1, m2 = game.actions
    rows, cols = _pairs(m1), _pairs(m2)
    # a convex combination can only be negative if some cell is
    masks = []
    for i in range(2):
        shifted = G[i] + shifts[i]
        if relations[i] == STRICT:
            neg = np.vectorize(lambda v: v < 0, otypes=[bool])(shifted)
        else:
            neg = np.vectorize(lambda v: v <= 0, otypes=[bool])(shifted)
        masks.append(_block_mask(neg, rows, cols))
    cand = masks[0] & masks[1]
    for ri, ci in zip(*np.nonzero(cand)):
        (a, a2), (b, b2) = rows[ri], cols[ci]
        forms = [form_from_block(G[i][a, b], G[i][a, b2], G[i][a2, b],
                                 G[i][a2, b2], relations[i], shifts[i])
                 for i in range(2)]
        hit = decide_bilinear(BilinearSystem(forms))
        if hit is not None:
            p, q = hit
            return Profile([_mixed(m1, (a, a2), p), _mixed(m2, (b, b2), q)])
    return None


def _numeric_search(game: Game, x: Profile, eps: Fraction, strong_agent=None,
                    restarts: int = 8, seed: int = 0):
    """Multistart local search for a dominating profile, n >= 3.

    Returns an exactly verified Profile or None (uncertified).
    """
    from scipy.optimize import minimize

    n = game.n_agents
    v = [float(t) for t in expected_utilities(game, x)]
    U = game.as_float()
    rng = np.random.default_rng(seed)
    sizes = [min(n, m) for m in game.actions]
    supports = itertools.product(*[itertools.combinations(range(m), k)
                                   for m, k in zip(game.actions, sizes)])
    for supp in supports:
        sub = [u[np.ix_(*supp)] for u in U]
        dims = [len(s) for s in supp]
        splits = np.cumsum(dims)[:-1]

        def unpack(z):
            parts = np.split(np.abs(z), splits)
            return [p / p.sum() if p.sum() > 0 else np.full(len(p), 1 / len(p))
                    for p in parts]

        def values(z):
            xs = unpack(z)
            return np.array([contract(s, xs) for s in sub], dtype=float)

        def objective(z):
            g = values(z) - np.array(v)
            if strong_agent is None:
                return -np.min(g)
            return -g[strong_agent] + 50 * np.sum(np.maximum(0, -g))

        for _ in range(restarts):
            z0 = rng.random(sum(dims)) + 1e-3
            res = minimize(objective, z0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
            xs = unpack(res.x)
            cand = []
            for s, probs, m in zip(supp, xs, game.actions):
                full = [Fraction(0)] * m
                fr = [Fraction(float(p)).limit_denominator(10 ** 6) for p in probs]
                fr[-1] = 1 - sum(fr[:-1])
                if fr[-1] < 0:
                    break
                for a, p in zip(s, fr):
                    full[a] = p
                cand.append(full)
            if len(cand) != n:
                continue
            xp = Profile(cand)
            g = _gains(game, x, xp)
            if strong_agent is None and all(t > eps for t in g):
                return xp
            if strong_agent is not None and all(t >= 0 for t in g) \
                    and g[strong_agent] > 0:
                return xp
    return None


def verify_weak_pareto(game: Game, x: Profile, eps=0) -> ParetoResult:
    """Is there a profile giving every agent a gain strictly above ``eps``?"""
    check_profile(game, x)
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    n = game.n_agents
    if n == 1:
        raise ValueError("use a restricted game with at least two agents")
    # pure profiles first: cheap and exact
    v = expected_utilities(game, x)
    for idx in itertools.product(*[range(m) for m in game.actions]):
        if all(u[idx] - vi > eps for u, vi in zip(game.payoffs, v)):
            xp = Profile.pure(idx, game)
            return ParetoResult(False, xp, _gains(game, x, xp))
    if n == 2:
        xp = _two_agent_search(game, x, (STRICT, STRICT), (eps, eps))
        if xp is None:
            return ParetoResult(True)
        return ParetoResult(False, xp, _gains(game, x, xp))
    xp = _numeric_search(game, x, eps)
    if xp is None:
        logger.info("no dominating profile found numerically (n=%d)", n)
        return ParetoResult(True, certified=False)
    return ParetoResult(False, xp, _gains(game, x, xp))


def verify_strong_pareto(game: Game, x: Profile) -> ParetoResult:
    """Is there a profile no agent dislikes and some agent strictly prefers?"""
    check_profile(game, x)
    n = game.n_agents
    v = expected_utilities(game, x)
    for idx in itertools.product(*[range(m) for m in game.actions]):
        g = [u[idx] - vi for u, vi in zip(game.payoffs, v)]
        if all(t >= 0 for t in g) and any(t > 0 for t in g):
            xp = Profile.pure(idx, game)
            return ParetoResult(False, xp, _gains(game, x, xp))
    certified = True
    for d in range(n):
        if n == 2:
            rels = tuple(STRICT if i == d else WEAK for i in range(2))
            xp = _two_agent_search(game, x, rels, (Fraction(0), Fraction(0)))
        else:
            xp = _numeric_search(game, x, Fraction(0), strong_agent=d)
            if xp is None:
                certified = False
        if xp is not None:
            return ParetoResult(False, xp, _gains(game, x, xp))
    return ParetoResult(True, certified=certified)
