"""Nash and strong Nash verification, plus an exhaustive NE enumerator."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import Game, Profile, check_profile, contract, deviation_payoffs, expected_utilities
from .pareto import verify_weak_pareto
from .support import full_vector


@dataclass(frozen=True)
class NeCheck:
    is_ne: bool
    regrets: tuple


@dataclass(frozen=True)
class SneVerdict:
    is_sne: bool
    coalition: tuple[int, ...] | None = None
    witness: Profile | None = None  # members' strategies only
    gains: tuple[Fraction, ...] | None = None
    certified: bool = True

    @property
    def verdict(self) -> str:
        return "IsSNE" if self.is_sne else "NotSNE"


def check_ne(game: Game, x: Profile, tol: float | None = None) -> NeCheck:
    """Regret of every agent against its best pure deviation."""
    v = expected_utilities(game, x)
    regrets = []
    for i in range(game.n_agents):
        dev = deviation_payoffs(game, x, i)
        regrets.append(max(dev.flat) - v[i])
    if tol is None:
        ok = all(r <= 0 for r in regrets)
    else:
        ok = all(float(r) <= tol for r in regrets)
    return NeCheck(ok, tuple(regrets))


def restricted_game(game: Game, x: Profile, coalition) -> Game:
    """Members' payoff tensors with every outsider's strategy contracted in."""
    tensors = []
    for i in coalition:
        t = contract(game.payoffs[i], x.strategies, skip=coalition)
        tensors.append(np.asarray(t, dtype=object))
    return Game(tensors)


def verify_sne(game: Game, x: Profile, eps=0) -> SneVerdict:
    """Check every coalition for a deviation gaining all members more than ``eps``.

    Coalitions are visited by size, then lexicographically; the first
    deviation found is returned.
    """
    check_profile(game, x)
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    n = game.n_agents
    v = expected_utilities(game, x)
    for i in range(n):
        dev = deviation_payoffs(game, x, i)
        best = max(range(len(dev)), key=lambda a: (dev[a], -a))
        if dev[best] - v[i] > eps:
            w = [Fraction(0)] * game.actions[i]
            w[best] = Fraction(1)
            return SneVerdict(False, (i,), Profile([w]), (dev[best] - v[i],))
    certified = True
    for size in range(2, n + 1):
        for coalition in itertools.combinations(range(n), size):
            sub = restricted_game(game, x, coalition)
            xs = Profile([x[i] for i in coalition])
            res = verify_weak_pareto(sub, xs, eps)
            if not res.efficient:
                return SneVerdict(False, coalition, res.witness, res.gains)
            certified = certified and res.certified
    return SneVerdict(True, certified=certified)


class NeList(list):
    """List of equilibria; ``degenerate`` marks continua seen during enumeration."""

    degenerate: bool = False


def enumerate_nes(game: Game) -> NeList:
    """All Nash equilibria of a two-agent game by support-pair enumeration.

    Exact rational solves per support pair, after a float screen. When a
    support pair carries a continuum, one representative (the vertex with
    largest minimum probability) is returned and ``degenerate`` is set.
    """
    from .oracle import SupportIndex

    if game.n_agents != 2:
        raise ValueError("enumerate_nes supports two-agent games only")
    index = SupportIndex(game, balanced_only=False)
    m1, m2 = game.actions
    found = NeList()
    seen = set()
    for e in index.iter_entries():
        if e.kind == "unique":
            prof = Profile([e.x, e.y])
            if len(prof.supports()[0]) < len(e.s1) or len(prof.supports()[1]) < len(e.s2):
                continue  # lives on a smaller support, visited earlier
        else:
            res = _degenerate_pair(index.R1, index.R2, e.s1, e.s2)
            if res is None:
                continue
            found.degenerate = True
            x, y = res
            prof = Profile([full_vector(m1, index.rows, x), full_vector(m2, index.cols, y)])
        if prof in seen:
            continue
        seen.add(prof)
        found.append(prof)
    return found


def _degenerate_pair(R1, R2, s1, s2):
    """A representative NE with support exactly ``(s1, s2)``, or None.

    Maximizes the smallest on-support probability; zero means the support
    is not realized exactly.
    """
    from .lp import LinearProgram, LpStatus, solve_lp

    m1, m2 = R1.shape
    k1, k2 = len(s1), len(s2)
    nv = k1 + k2 + 3  # x, y, v1, v2, t
    iv1, iv2, it = k1 + k2, k1 + k2 + 1, k1 + k2 + 2
    obj = [0] * nv
    obj[it] = 1
    lp = LinearProgram(nv, objective=obj, sense="max")
    lp.set_bounds(iv1, None, None)
    lp.set_bounds(iv2, None, None)
    lp.set_bounds(it, None, 1)
    lp.add_row([1] * k1 + [0] * (k2 + 3), "=", 1)
    lp.add_row([0] * k1 + [1] * k2 + [0] * 3, "=", 1)
    for j in range(k1 + k2):
        row = [0] * nv
        row[j] = 1
        row[it] = -1
        lp.add_row(row, ">=", 0)
    for r in range(m1):
        row = [0] * k1 + [R1[r, c] for c in s2] + [-1, 0, 0]
        lp.add_row(row, "=" if r in s1 else "<=", 0)
    for c in range(m2):
        row = [R2[r, c] for r in s1] + [0] * k2 + [0, -1, 0]
        lp.add_row(row, "=" if c in s2 else "<=", 0)
    out = solve_lp(lp, exact=True)
    if out.status is not LpStatus.OPTIMAL or out.x[it] <= 0:
        return None
    z = out.x
    return full_vector(m1, s1, z[:k1]), full_vector(m2, s2, z[k1:k1 + k2])


__all__ = ["NeCheck", "SneVerdict", "NeList", "check_ne", "verify_sne",
           "enumerate_nes", "restricted_game"]
