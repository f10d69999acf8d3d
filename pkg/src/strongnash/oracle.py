"""Constrained Nash-equilibrium oracle for two-agent games.

A query asks for an NE whose value pair lies in a box, satisfies a set of
Pareto cuts (each excludes the open quadrant strictly below its point) and
optional welfare bounds; optionally the welfare-maximizing such NE.

Two backends answer the same query: support enumeration over a cached index
of per-support solutions, and a branch-and-bound over the mixed-integer
Nash formulation (:mod:`strongnash.milp`). Every ``Found`` answer is exact.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .game import Game, Profile, to_fraction
from .support import (exact_side, full_vector, pair_lp, strictly_dominated_reduction)

logger = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 300.0
COMPLETE_PAIRS = 1 << 20
_TOL = 1e-9
NO_BOUND = -math.inf


class Objective(Enum):
    FEASIBILITY = "feasibility"
    MAX_WELFARE = "max_welfare"


class Backend(Enum):
    SUPPORT = "support"
    MILP = "milp"


class OracleStatus(Enum):
    FOUND = "Found"
    INFEASIBLE = "Infeasible"
    TIMED_OUT = "TimedOut"


@dataclass(frozen=True)
class ValueBox:
    lo1: Fraction
    hi1: Fraction
    lo2: Fraction
    hi2: Fraction

    def __post_init__(self):
        for name in ("lo1", "hi1", "lo2", "hi2"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if self.lo1 > self.hi1 or self.lo2 > self.hi2:
            raise ValueError(f"empty box {self}")

    @classmethod
    def root(cls, game: Game) -> "ValueBox":
        (a, b), (c, d) = game.payoff_range(0), game.payoff_range(1)
        return cls(a, b, c, d)

    def contains(self, v1, v2) -> bool:
        return self.lo1 <= v1 <= self.hi1 and self.lo2 <= v2 <= self.hi2

    def bounds(self):
        return (self.lo1, self.hi1), (self.lo2, self.hi2)

    def __str__(self):
        return f"[{self.lo1},{self.hi1}]x[{self.lo2},{self.hi2}]"

    def to_json_obj(self):
        return [[str(self.lo1), str(self.hi1)], [str(self.lo2), str(self.hi2)]]


@dataclass(frozen=True, order=True)
class Cut:
    """Excludes value pairs strictly below ``(v1, v2)`` in both coordinates."""

    v1: Fraction
    v2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "v1", to_fraction(self.v1))
        object.__setattr__(self, "v2", to_fraction(self.v2))

    def excludes(self, w1, w2) -> bool:
        return w1 < self.v1 and w2 < self.v2


def filter_cuts(cuts: Sequence[Cut]) -> tuple[Cut, ...]:
    """Drop dominated cuts; the result is sorted by ``v1`` ascending."""
    uniq = sorted(set(cuts), key=lambda c: (c.v1, c.v2))
    keep = [c for c in uniq
            if not any(d != c and c.v1 <= d.v1 and c.v2 <= d.v2 for d in uniq)]
    return tuple(keep)


def satisfies_cuts(cuts: Sequence[Cut], v1, v2) -> bool:
    return not any(c.excludes(v1, v2) for c in cuts)


def welfare_lower_bound(cuts: Sequence[Cut], box: ValueBox | None = None):
    """Least welfare v1 + v2 over points satisfying every cut.

    Without a box only the inner staircase corners count. With a box the two
    unbounded end pieces are closed off by the box's lower corners, which
    makes the bound valid over the whole box. Fewer than two cuts give
    ``NO_BOUND``.
    """
    cuts = filter_cuts(cuts)
    if len(cuts) < 2:
        return NO_BOUND
    sums = [a.v1 + b.v2 for a, b in zip(cuts, cuts[1:])]
    if box is not None:
        sums.append(box.lo1 + cuts[0].v2)
        sums.append(cuts[-1].v1 + box.lo2)
    return min(sums)


def staircase_pieces(cuts: Sequence[Cut]):
    """Lower-bound pairs whose union is the set satisfying every cut."""
    cuts = filter_cuts(cuts)
    if not cuts:
        return [(None, None)]
    pieces = []
    for j in range(len(cuts) + 1):
        lo1 = cuts[j - 1].v1 if j > 0 else None
        lo2 = cuts[j].v2 if j < len(cuts) else None
        pieces.append((lo1, lo2))
    return pieces


@dataclass(frozen=True)
class Region:
    box: ValueBox
    cuts: tuple[Cut, ...] = ()
    sw_lo: Fraction | None = None
    sw_hi: Fraction | None = None

    def contains(self, v1, v2) -> bool:
        if not self.box.contains(v1, v2):
            return False
        if self.sw_lo is not None and v1 + v2 < self.sw_lo:
            return False
        if self.sw_hi is not None and v1 + v2 > self.sw_hi:
            return False
        return satisfies_cuts(self.cuts, v1, v2)

    def pieces(self):
        return staircase_pieces(self.cuts)


@dataclass
class OracleQuery:
    game: Game
    box: ValueBox | None = None
    cuts: tuple = ()
    objective: Objective = Objective.FEASIBILITY
    sw_hi: Fraction | None = None
    sw_lo: Fraction | None = None
    backend: Backend = Backend.SUPPORT
    time_limit: float = DEFAULT_TIME_LIMIT
    index: "SupportIndex | None" = None  # optional cache shared across queries

    def __post_init__(self):
        if self.game.n_agents != 2:
            raise ValueError("the oracle handles two-agent games only")
        if self.box is None:
            self.box = ValueBox.root(self.game)
        self.cuts = tuple(Cut(*c) if not isinstance(c, Cut) else c for c in self.cuts)
        if self.sw_lo is not None and self.sw_lo == NO_BOUND:
            self.sw_lo = None
        if self.sw_hi is not None:
            self.sw_hi = to_fraction(self.sw_hi)
        if self.sw_lo is not None:
            self.sw_lo = to_fraction(self.sw_lo)
        if self.sw_lo is not None and self.sw_hi is not None and self.sw_lo > self.sw_hi:
            raise ValueError("welfare lower bound exceeds upper bound")
        self.objective = Objective(self.objective)
        self.backend = Backend(self.backend)

    @property
    def region(self) -> Region:
        return Region(self.box, filter_cuts(self.cuts), self.sw_lo, self.sw_hi)


@dataclass
class OracleResult:
    status: OracleStatus
    profile: Profile | None = None
    values: tuple[Fraction, Fraction] | None = None
    exhaustive: bool = True
    stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status is OracleStatus.FOUND


class OracleTimeout(Exception):
    pass


# ------------------------------------------------------------ support index

class Entry(NamedTuple):
    kind: str  # "unique" or "degenerate"
    s1: tuple
    s2: tuple
    x: list | None = None
    y: list | None = None
    v1: Fraction | None = None
    v2: Fraction | None = None


def _batch_side(A: np.ndarray):
    """Batched solve of ``A z = e_last``.

    Returns (status, z) with status 0 inconsistent, 1 unique, 2 not unique.
    """
    B, r, q = A.shape
    e = np.zeros(r)
    e[-1] = 1.0
    status = np.full(B, 2, dtype=np.int8)
    z = np.zeros((B, q))
    if r < q or B == 0:
        return status, z
    sv = np.linalg.svd(A, compute_uv=False)
    full = sv[:, -1] > 1e-10 * np.maximum(1.0, sv[:, 0])
    if full.any():
        Af = A[full]
        At = np.transpose(Af, (0, 2, 1))
        zf = np.linalg.solve(At @ Af, (At @ e)[..., None])[..., 0]
        resid = np.linalg.norm(np.einsum("brq,bq->br", Af, zf) - e, axis=1)
        scale = 1.0 + np.abs(Af).max(axis=(1, 2))
        ok = resid <= 1e-7 * scale
        st = np.where(ok, 1, 0).astype(np.int8)
        status[full] = st
        z[full] = zf
    return status, z


class SupportIndex:
    """Per-game cache of support-pair solutions, produced lazily in order.

    Support pairs are visited by ascending total size, then
    lexicographically. Entries are either exact isolated equilibria or
    support pairs whose equilibria form a continuum (solved per query by LP).
    Large reduced games are restricted to equal-size supports, in which case
    ``exhaustive`` is False.
    """

    def __init__(self, game: Game, balanced_only: bool | None = None):
        if game.n_agents != 2:
            raise ValueError("two-agent games only")
        self.game = game
        U1, U2 = game.payoffs
        self.m1, self.m2 = game.actions
        self.rows, self.cols = strictly_dominated_reduction(U1, U2)
        self.R1 = U1[np.ix_(self.rows, self.cols)]
        self.R2 = U2[np.ix_(self.rows, self.cols)]
        self.F1 = self.R1.astype(float)
        self.F2 = self.R2.astype(float)
        self.k1, self.k2 = len(self.rows), len(self.cols)
        total = (2 ** self.k1 - 1) * (2 ** self.k2 - 1)
        if balanced_only is None:
            balanced_only = total > COMPLETE_PAIRS
        self.balanced_only = balanced_only
        self.exhaustive = not balanced_only
        self.entries: list[Entry] = []
        self.pairs_screened = 0
        self._gen = self._produce()
        self._done = False

    def iter_entries(self, deadline: float | None = None):
        i = 0
        while True:
            if i < len(self.entries):
                yield self.entries[i]
                i += 1
                continue
            if self._done:
                return
            if deadline is not None and time.monotonic() > deadline:
                raise OracleTimeout()
            try:
                self.entries.extend(next(self._gen))
            except StopIteration:
                self._done = True

    def complete(self, deadline: float | None = None) -> list[Entry]:
        for _ in self.iter_entries(deadline):
            pass
        return self.entries

    def _groups(self):
        k1, k2 = self.k1, self.k2
        for t in range(2, k1 + k2 + 1):
            for a in range(max(1, t - k2), min(k1, t - 1) + 1):
                b = t - a
                if self.balanced_only and a != b:
                    continue
                yield a, b

    def _produce(self):
        for a, b in self._groups():
            C1 = np.array(list(itertools.combinations(range(self.k1), a)), dtype=int)
            C2 = np.array(list(itertools.combinations(range(self.k2), b)), dtype=int)
            step = max(1, 20000 // len(C2))
            for start in range(0, len(C1), step):
                yield self._screen(C1[start:start + step], C2)

    def _screen(self, S1: np.ndarray, S2: np.ndarray) -> list[Entry]:
        c, a = S1.shape
        n, b = S2.shape
        self.pairs_screened += c * n
        F1, F2 = self.F1, self.F2
        # y-side: rows of S1 indifferent under y on S2
        Ay = np.zeros((c, n, a + 1, b + 1))
        Ay[:, :, :a, :b] = F1[S1[:, None, :, None], S2[None, :, None, :]]
        Ay[:, :, :a, b] = -1.0
        Ay[:, :, a, :b] = 1.0
        # x-side: columns of S2 indifferent under x on S1
        Ax = np.zeros((c, n, b + 1, a + 1))
        Ax[:, :, :b, :a] = F2[S1[:, None, None, :], S2[None, :, :, None]]
        Ax[:, :, :b, a] = -1.0
        Ax[:, :, b, :a] = 1.0
        sy, zy = _batch_side(Ay.reshape(c * n, a + 1, b + 1))
        sx, zx = _batch_side(Ax.reshape(c * n, b + 1, a + 1))
        wy, u1 = zy[:, :b], zy[:, b]
        wx, u2 = zx[:, :a], zx[:, a]
        neg_y = (sy == 1) & (wy < -_TOL).any(axis=1)
        neg_x = (sx == 1) & (wx < -_TOL).any(axis=1)
        alive = (sy != 0) & (sx != 0) & ~neg_x & ~neg_y
        ii = np.repeat(np.arange(c), n)
        jj = np.tile(np.arange(n), c)
        # a uniquely solved side fixes one player's mix: screen the other
        # player's best responses against every row / column
        idx = np.nonzero(alive & (sy == 1))[0]
        if len(idx):
            pay1 = np.einsum("prj,pj->pr", F1[:, S2[jj[idx]]].transpose(1, 0, 2), wy[idx])
            tol1 = _TOL * (1 + np.abs(F1).max())
            alive[idx[pay1.max(axis=1) > u1[idx] + tol1]] = False
        idx = np.nonzero(alive & (sx == 1))[0]
        if len(idx):
            pay2 = np.einsum("pim,pi->pm", F2[S1[ii[idx]], :], wx[idx])
            tol2 = _TOL * (1 + np.abs(F2).max())
            alive[idx[pay2.max(axis=1) > u2[idx] + tol2]] = False
        both = alive & (sy == 1) & (sx == 1)
        out = []
        for p in np.nonzero(alive)[0]:
            s1 = tuple(int(v) for v in S1[ii[p]])
            s2 = tuple(int(v) for v in S2[jj[p]])
            if both[p]:
                e = self._exact_unique(s1, s2)
            else:
                e = self._degenerate(s1, s2)
            if e is not None:
                out.append(e)
        return out

    def _exact_unique(self, s1, s2):
        xs = exact_side(self.R2, s1, s2)
        ys = exact_side(self.R1.T, s2, s1)
        if xs == "none" or ys == "none":
            return None
        if xs == "degenerate" or ys == "degenerate":
            return self._degenerate(s1, s2)
        (wx, u2), (wy, u1) = xs, ys
        if any(p < 0 for p in wx) or any(p < 0 for p in wy):
            return None
        for r in range(self.k1):
            if sum((self.R1[r, cc] * q for cc, q in zip(s2, wy)), Fraction(0)) > u1:
                return None
        for cc in range(self.k2):
            if sum((self.R2[r, cc] * p for r, p in zip(s1, wx)), Fraction(0)) > u2:
                return None
        x = full_vector(self.m1, [self.rows[r] for r in s1], wx)
        y = full_vector(self.m2, [self.cols[cc] for cc in s2], wy)
        return Entry("unique", s1, s2, x, y, u1, u2)

    def _degenerate(self, s1, s2):
        free = ((None, None), (None, None))
        if pair_lp(self.F1, self.F2, s1, s2, [(None, None)], free, exact=False) is None:
            return None
        return Entry("degenerate", s1, s2)

    def solve_degenerate(self, e: Entry, region: Region, maximize: bool):
        pieces = region.pieces()
        box = region.box.bounds()
        fbox = tuple((float(lo), float(hi)) for lo, hi in box)
        fl = lambda v: None if v is None else float(v)
        # cheap float screen before the exact solve
        if pair_lp(self.F1, self.F2, e.s1, e.s2, pieces, fbox, fl(region.sw_lo),
                   fl(region.sw_hi), maximize, exact=False) is None:
            return None
        res = pair_lp(self.R1, self.R2, e.s1, e.s2, pieces, box, region.sw_lo,
                      region.sw_hi, maximize, exact=True)
        if res is None:
            return None
        x, y, v1, v2 = res
        x = full_vector(self.m1, self.rows, x)
        y = full_vector(self.m2, self.cols, y)
        return x, y, v1, v2


def _support_query(q: OracleQuery) -> OracleResult:
    index = q.index if q.index is not None else SupportIndex(q.game)
    if index.game is not q.game and index.game != q.game:
        raise ValueError("index was built for a different game")
    region = q.region
    maximize = q.objective is Objective.MAX_WELFARE
    deadline = time.monotonic() + q.time_limit
    best = None
    stats = {"entries": 0}
    try:
        for e in index.iter_entries(deadline):
            stats["entries"] += 1
            if e.kind == "unique":
                if not region.contains(e.v1, e.v2):
                    continue
                cand = (e.x, e.y, e.v1, e.v2)
            else:
                cand = index.solve_degenerate(e, region, maximize)
                if cand is None:
                    continue
            if not maximize:
                best = cand
                break
            if best is None or cand[2] + cand[3] > best[2] + best[3]:
                best = cand
    except OracleTimeout:
        stats["pairs"] = index.pairs_screened
        return _result(OracleStatus.TIMED_OUT, best, index.exhaustive, stats)
    stats["pairs"] = index.pairs_screened
    if best is None:
        return OracleResult(OracleStatus.INFEASIBLE, exhaustive=index.exhaustive,
                            stats=stats)
    return _result(OracleStatus.FOUND, best, index.exhaustive, stats)


def _result(status, best, exhaustive, stats):
    if best is None:
        return OracleResult(status, exhaustive=exhaustive, stats=stats)
    x, y, v1, v2 = best
    return OracleResult(status, Profile([x, y]), (Fraction(v1), Fraction(v2)),
                        exhaustive, stats)


def find_ne(query: OracleQuery) -> OracleResult:
    """Answer ``query`` with its backend; ``Found`` results are exact NEs."""
    if query.backend is Backend.SUPPORT:
        res = _support_query(query)
    else:
        from .milp import milp_query
        res = milp_query(query)
    if res.profile is not None:
        _revalidate(query, res)
    return res


def _revalidate(query: OracleQuery, res: OracleResult) -> None:
    from .game import expected_utilities
    from .verify import check_ne

    if not check_ne(query.game, res.profile).is_ne:
        raise AssertionError("oracle produced a non-equilibrium")
    v = expected_utilities(query.game, res.profile)
    if v != res.values or not query.region.contains(*v):
        raise AssertionError("oracle result violates the query region")
