"""Branch-and-bound over the mixed-integer Nash formulation.

Variables: mixed strategies x, y; values v1, v2; support indicators b1, b2
(an action may be played only if its indicator is on, and an action whose
indicator is on must be a best response); one binary z per Pareto cut
selecting which coordinate clears the cut. Relaxations are solved in floats
with :func:`strongnash.lp.solve_lp`; integral leaves are re-solved exactly
on the implied support pair.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time

from .lp import LinearProgram, LpNumericalError, LpStatus, solve_lp
from .oracle import (Objective, OracleQuery, OracleResult, OracleStatus, _result,
                     filter_cuts)
from .support import pair_lp

logger = logging.getLogger(__name__)

_INT_TOL = 1e-7


class _Model:
    def __init__(self, q: OracleQuery):
        g = q.game
        self.U1, self.U2 = g.payoffs
        self.F1, self.F2 = self.U1.astype(float), self.U2.astype(float)
        m1, m2 = g.actions
        self.m1, self.m2 = m1, m2
        self.region = q.region
        self.cuts = filter_cuts(q.cuts)
        K = len(self.cuts)
        # layout: x | y | v1 v2 | b1 | b2 | z
        self.ix = 0
        self.iy = m1
        self.iv1 = m1 + m2
        self.iv2 = self.iv1 + 1
        self.ib1 = self.iv2 + 1
        self.ib2 = self.ib1 + m1
        self.iz = self.ib2 + m2
        self.n = self.iz + K
        self.binaries = list(range(self.ib1, self.n))
        self.maximize = q.objective is Objective.MAX_WELFARE
        self._base = self._build()

    def _build(self) -> LinearProgram:
        m1, m2, n = self.m1, self.m2, self.n
        F1, F2 = self.F1, self.F2
        obj = [0.0] * n
        if self.maximize:
            obj[self.iv1] = obj[self.iv2] = 1.0
        lp = LinearProgram(n, objective=obj, sense="max" if self.maximize else "feasibility")
        box = self.region.box
        lp.set_bounds(self.iv1, float(box.lo1), float(box.hi1))
        lp.set_bounds(self.iv2, float(box.lo2), float(box.hi2))
        for j in range(self.ib1, n):
            lp.set_bounds(j, 0.0, 1.0)
        M1 = float(F1.max() - F1.min())
        M2 = float(F2.max() - F2.min())
        row = [0.0] * n
        for j in range(m1):
            row[self.ix + j] = 1.0
        lp.add_row(row, "=", 1.0)
        row = [0.0] * n
        for j in range(m2):
            row[self.iy + j] = 1.0
        lp.add_row(row, "=", 1.0)
        for r in range(m1):
            base = [0.0] * n
            for c in range(m2):
                base[self.iy + c] = -F1[r, c]
            base[self.iv1] = 1.0
            lp.add_row(list(base), ">=", 0.0)  # v1 is at least every row payoff
            tight = list(base)
            tight[self.ib1 + r] = M1
            lp.add_row(tight, "<=", M1)  # b = 1 forces a best response
            link = [0.0] * n
            link[self.ix + r] = 1.0
            link[self.ib1 + r] = -1.0
            lp.add_row(link, "<=", 0.0)
        for c in range(m2):
            base = [0.0] * n
            for r in range(m1):
                base[self.ix + r] = -F2[r, c]
            base[self.iv2] = 1.0
            lp.add_row(list(base), ">=", 0.0)
            tight = list(base)
            tight[self.ib2 + c] = M2
            lp.add_row(tight, "<=", M2)
            link = [0.0] * n
            link[self.iy + c] = 1.0
            link[self.ib2 + c] = -1.0
            lp.add_row(link, "<=", 0.0)
        lo1, lo2 = float(self.U1.min()), float(self.U2.min())
        for k, cut in enumerate(self.cuts):
            # v1 >= c1 - M1 z and v2 >= c2 - M2 (1 - z); the payoff range
            # suffices unless the cut point lies above the payoffs
            c1, c2 = float(cut.v1), float(cut.v2)
            M1k = max(M1, c1 - lo1)
            M2k = max(M2, c2 - lo2)
            row = [0.0] * n
            row[self.iv1] = 1.0
            row[self.iz + k] = M1k
            lp.add_row(row, ">=", c1)
            row = [0.0] * n
            row[self.iv2] = 1.0
            row[self.iz + k] = -M2k
            lp.add_row(row, ">=", c2 - M2k)
        if self.region.sw_lo is not None:
            row = [0.0] * n
            row[self.iv1] = row[self.iv2] = 1.0
            lp.add_row(row, ">=", float(self.region.sw_lo))
        if self.region.sw_hi is not None:
            row = [0.0] * n
            row[self.iv1] = row[self.iv2] = 1.0
            lp.add_row(row, "<=", float(self.region.sw_hi))
        return lp

    def relax(self, fixed: dict):
        lp = LinearProgram(self.n, objective=list(self._base.objective),
                           sense=self._base.sense, rows=list(self._base.rows),
                           bounds=list(self._base.bounds))
        for j, val in fixed.items():
            lp.bounds[j] = (float(val), float(val))
        try:
            return solve_lp(lp)
        except LpNumericalError:
            logger.warning("relaxation hit the pivot cap; node dropped")
            return None

    def exact_leaf(self, fixed: dict, sol):
        """Exact re-solve on the support pair implied by the indicators."""
        def on(j):
            return fixed.get(j, round(sol[j])) >= 0.5
        s1 = tuple(r for r in range(self.m1) if on(self.ib1 + r))
        s2 = tuple(c for c in range(self.m2) if on(self.ib2 + c))
        if not s1 or not s2:
            return None
        reg = self.region
        return pair_lp(self.U1, self.U2, s1, s2, reg.pieces(), reg.box.bounds(),
                       reg.sw_lo, reg.sw_hi, self.maximize, exact=True)


def milp_query(q: OracleQuery) -> OracleResult:
    model = _Model(q)
    deadline = time.monotonic() + q.time_limit
    counter = itertools.count()
    best = None
    best_w = None
    nodes = 0
    # heap of (-bound, seq, fixed) for best-first; list stack for depth-first
    frontier = [(0.0, next(counter), {})]
    while frontier:
        if time.monotonic() > deadline:
            return _result(OracleStatus.TIMED_OUT, best, True, {"nodes": nodes})
        if model.maximize:
            negb, _, fixed = heapq.heappop(frontier)
            if best_w is not None and -negb <= float(best_w) + 1e-9:
                break
        else:
            _, _, fixed = frontier.pop()
        nodes += 1
        out = model.relax(fixed)
        if out is None or out.status is not LpStatus.OPTIMAL:
            continue
        sol = out.x
        bound = float(out.objective) if model.maximize else 0.0
        if model.maximize and best_w is not None and bound <= float(best_w) + 1e-9:
            continue
        frac = [(abs(sol[j] - round(sol[j])), j) for j in model.binaries
                if j not in fixed and abs(sol[j] - round(sol[j])) > _INT_TOL]
        if not frac:
            leaf = model.exact_leaf(fixed, sol)
            if leaf is None:
                # float relaxation disagreed with exact arithmetic; refine if possible
                free = [j for j in model.binaries if j not in fixed]
                if not free:
                    continue
                frac = [(0.0, free[0])]
            else:
                w = leaf[2] + leaf[3]
                if best is None or w > best_w:
                    best, best_w = leaf, w
                if not model.maximize:
                    break
                continue
        # branch on the most fractional binary (lowest index on ties)
        _, j = max(frac, key=lambda t: (t[0], -t[1]))
        children = []
        for val in (0, 1):
            child = dict(fixed)
            child[j] = val
            children.append(child)
        if model.maximize:
            for child in children:
                heapq.heappush(frontier, (-bound, next(counter), child))
        else:
            # depth-first, exploring the rounded direction first
            first = round(sol[j])
            frontier.append((0.0, next(counter), children[1 - first]))
            frontier.append((0.0, next(counter), children[first]))
    stats = {"nodes": nodes}
    if best is None:
        return OracleResult(OracleStatus.INFEASIBLE, stats=stats)
    return _result(OracleStatus.FOUND, best, True, stats)
