"""Dense two-phase simplex with Bland's rule.

Works on float64 tableaus (tolerance-based) or on object tableaus of
Fractions (``exact=True``, zero tolerance). Problems in this package are small,
so robustness and determinism matter more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-11


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpNumericalError(RuntimeError):
    """Pivoting exceeded the iteration cap; re-solve with a perturbation."""


@dataclass
class LinearProgram:
    """``sense`` c.x subject to rows ``coeffs . x (<=|=|>=) rhs`` and bounds.

    Bounds default to ``[0, inf)``; use ``None`` for an infinite side.
    """

    n_vars: int
    objective: list = field(default_factory=list)
    sense: str = "feasibility"  # "max", "min" or "feasibility"
    rows: list = field(default_factory=list)
    bounds: list = field(default_factory=list)

    def __post_init__(self):
        if not self.objective:
            self.objective = [0] * self.n_vars
        if not self.bounds:
            self.bounds = [(0, None)] * self.n_vars
        if len(self.objective) != self.n_vars or len(self.bounds) != self.n_vars:
            raise ValueError("objective/bounds length must equal n_vars")
        if self.sense not in ("max", "min", "feasibility"):
            raise ValueError(f"unknown sense {self.sense!r}")

    def add_row(self, coeffs: Sequence, rel: str, rhs) -> None:
        if len(coeffs) != self.n_vars:
            raise ValueError("row length differs from n_vars")
        if rel not in ("<=", "=", ">="):
            raise ValueError(f"unknown relation {rel!r}")
        self.rows.append((list(coeffs), rel, rhs))

    def set_bounds(self, j: int, lo=None, hi=None) -> None:
        if lo is not None and hi is not None and lo > hi:
            raise ValueError(f"variable {j}: lower bound above upper bound")
        self.bounds[j] = (lo, hi)


@dataclass
class LpOutcome:
    status: LpStatus
    x: np.ndarray | None = None
    objective: object = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _num(v, exact):
    if exact:
        return v if isinstance(v, Fraction) else Fraction(v)
    return float(v)


def solve_lp(lp: LinearProgram, tol: float = FEAS_TOL, exact: bool = False,
             max_iter: int | None = None) -> LpOutcome:
    """Solve ``lp``; deterministic for identical input."""
    dtype = object if exact else float
    zero = Fraction(0) if exact else 0.0
    tol = 0 if exact else tol
    ptol = 0 if exact else _PIVOT_TOL
    n = lp.n_vars

    # Substitute x_j = shift_j + sign_j * y_j (y >= 0); free vars get y+ - y-.
    cols: list[tuple[int, int]] = []  # (original var, sign)
    shift = [zero] * n
    extra_rows = []
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            shift[j] = _num(lo, exact)
            cols.append((j, 1))
            if hi is not None:
                extra_rows.append((len(cols) - 1, _num(hi, exact) - shift[j]))
        elif hi is not None:
            shift[j] = _num(hi, exact)
            cols.append((j, -1))
        else:
            cols.append((j, 1))
            cols.append((j, -1))
    n_y = len(cols)

    A_rows, rels, rhs = [], [], []
    for coeffs, rel, b in lp.rows:
        c = [_num(v, exact) for v in coeffs]
        row = [c[j] * s for j, s in cols]
        bb = _num(b, exact) - sum((c[j] * shift[j] for j in range(n)), zero)
        A_rows.append(row)
        rels.append(rel)
        rhs.append(bb)
    for k, ub in extra_rows:
        row = [zero] * n_y
        row[k] = _num(1, exact)
        A_rows.append(row)
        rels.append("<=")
        rhs.append(ub)

    m = len(A_rows)
    A = np.array(A_rows, dtype=dtype).reshape(m, n_y)
    b = np.array(rhs, dtype=dtype).reshape(m)
    for i in range(m):
        if b[i] < 0:
            A[i] = -A[i]
            b[i] = -b[i]
            rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]

    n_slack = sum(1 for r in rels if r != "=")
    n_art = sum(1 for r in rels if r != "<=")
    N = n_y + n_slack + n_art
    T = np.zeros((m + 1, N + 1), dtype=dtype)
    if exact:
        T[:] = Fraction(0)
    T[:m, :n_y] = A
    T[:m, -1] = b
    basis = [0] * m
    s_col, a_col = n_y, n_y + n_slack
    art_cols = []
    for i, rel in enumerate(rels):
        if rel == "<=":
            T[i, s_col] = 1
            basis[i] = s_col
            s_col += 1
        else:
            if rel == ">=":
                T[i, s_col] = -1
                s_col += 1
            T[i, a_col] = 1
            basis[i] = a_col
            art_cols.append(a_col)
            a_col += 1

    if max_iter is None:
        max_iter = 50 * (m + N) + 1000
    iters = 0

    def pivot(r, c):
        T[r] = T[r] / T[r, c]
        col = T[:, c].copy()
        col[r] = 0
        if exact:
            for i in np.nonzero(col)[0]:
                T[i] = T[i] - col[i] * T[r]
        else:
            T[:] -= np.outer(col, T[r])
            T[np.abs(T) < 1e-14] = 0.0
        basis[r] = c

    def run(allowed: np.ndarray) -> bool:
        """Minimise the objective row; False if unbounded."""
        nonlocal iters
        while True:
            red = T[m, :N]
            cand = np.nonzero(allowed & (red < -tol))[0]
            if len(cand) == 0:
                return True
            c = int(cand[0])  # Bland: lowest index entering
            colv = T[:m, c]
            rows_ok = np.nonzero(colv > ptol)[0]
            if len(rows_ok) == 0:
                return False
            ratios = [(T[i, -1] / colv[i], basis[i], i) for i in rows_ok]
            best = min(r[0] for r in ratios)
            if exact:
                ties = [r for r in ratios if r[0] == best]
            else:
                ties = [r for r in ratios if r[0] <= best + tol]
            r = min(ties, key=lambda t: t[1])[2]  # Bland: lowest basic index
            pivot(r, c)
            iters += 1
            if iters > max_iter:
                raise LpNumericalError(
                    f"simplex exceeded {max_iter} pivots")

    allowed = np.ones(N, dtype=bool)
    # phase 1: minimise the sum of artificials
    if art_cols:
        T[m, :] = 0
        for c in art_cols:
            T[m, c] = 1
        for i in range(m):
            if basis[i] in art_cols:
                T[m] = T[m] - T[i]
        run(allowed)
        infeasibility = -T[m, -1]
        scale = max([1.0] + [abs(float(v)) for v in b])
        if infeasibility > tol * scale:
            return LpOutcome(LpStatus.INFEASIBLE, iterations=iters)
        art_set = set(art_cols)
        # drive zero-level artificials out of the basis
        for i in range(m):
            if basis[i] in art_set:
                row = T[i, :a_col - n_art]
                nz = [j for j in range(n_y + n_slack)
                      if (row[j] != 0 if exact else abs(row[j]) > 1e-9)]
                if nz:
                    pivot(i, nz[0])
        allowed[n_y + n_slack:] = False
        for i in range(m):
            if basis[i] in art_set:
                # redundant row: freeze it out
                T[i, :] = 0
                basis[i] = -1

    # phase 2
    cvec = [_num(v, exact) for v in lp.objective]
    if lp.sense == "max":
        cvec = [-v for v in cvec]
    elif lp.sense == "feasibility":
        cvec = [zero] * n
    T[m, :] = 0
    for k, (j, s) in enumerate(cols):
        T[m, k] = cvec[j] * s
    for i in range(m):
        if basis[i] >= 0 and T[m, basis[i]] != 0:
            T[m] = T[m] - T[m, basis[i]] * T[i]
    if not run(allowed):
        return LpOutcome(LpStatus.UNBOUNDED, iterations=iters)

    y = np.zeros(N, dtype=dtype)
    if exact:
        y[:] = Fraction(0)
    for i in range(m):
        if basis[i] >= 0:
            y[basis[i]] = T[i, -1]
    x = np.array(shift, dtype=dtype)
    for k, (j, s) in enumerate(cols):
        x[j] = x[j] + s * y[k]
    obj = sum((_num(v, exact) * x[j] for j, v in enumerate(lp.objective)), zero)
    if not exact:
        x = x.astype(float)
    return LpOutcome(LpStatus.OPTIMAL, x=x, objective=obj, iterations=iters)


def check_feasible(lp: LinearProgram, x, tol: float = FEAS_TOL) -> bool:
    """Does ``x`` satisfy every row and bound of ``lp`` within ``tol``?"""
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[j] < lo - tol:
            return False
        if hi is not None and x[j] > hi + tol:
            return False
    for coeffs, rel, rhs in lp.rows:
        lhs = sum(c * v for c, v in zip(coeffs, x))
        if rel == "<=" and lhs > rhs + tol:
            return False
        if rel == ">=" and lhs < rhs - tol:
            return False
        if rel == "=" and (abs(lhs - rhs) > tol):
            return False
    return True

