"""Support-pair machinery for two-agent games.

For a support pair ``(S1, S2)`` the equilibrium conditions are linear:
player 1's mix on ``S1`` must make every column of ``S2`` a best response of
player 2, and symmetrically. These helpers solve that system in floats for
screening and in exact rationals for certification.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .lp import LinearProgram, LpStatus, solve_lp

SCREEN_TOL = 1e-7


def support_pairs(m1: int, m2: int, balanced_only: bool = False) -> Iterator[tuple]:
    """Support pairs by ascending total size, then lexicographically."""
    for t in range(2, m1 + m2 + 1):
        for k1 in range(max(1, t - m2), min(m1, t - 1) + 1):
            k2 = t - k1
            if balanced_only and k1 != k2:
                continue
            for s1 in itertools.combinations(range(m1), k1):
                for s2 in itertools.combinations(range(m2), k2):
                    yield s1, s2


def strictly_dominated_reduction(u1: np.ndarray, u2: np.ndarray):
    """Iteratively delete pure actions strictly dominated by pure actions.

    Returns the surviving row and column index lists. Every Nash equilibrium
    of the game lives on the survivors.
    """
    rows = list(range(u1.shape[0]))
    cols = list(range(u1.shape[1]))
    changed = True
    while changed:
        changed = False
        sub1 = u1[np.ix_(rows, cols)]
        for a in list(rows):
            ia = rows.index(a)
            if any(b != a and all(sub1[rows.index(b), j] > sub1[ia, j]
                                  for j in range(len(cols))) for b in rows):
                rows.remove(a)
                changed = True
                break
        if changed:
            continue
        sub2 = u2[np.ix_(rows, cols)]
        for c in list(cols):
            ic = cols.index(c)
            if any(d != c and all(sub2[i, cols.index(d)] > sub2[i, ic]
                                  for i in range(len(rows))) for d in cols):
                cols.remove(c)
                changed = True
                break
    return rows, cols


def rref_solve(A: list[list[Fraction]], b: list[Fraction]):
    """Exact solve of ``A z = b``.

    Returns ``(z, free)``: a particular solution with free variables at zero
    and the list of free variable indices, or ``None`` when inconsistent.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(m):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [vi - f * vr for vi, vr in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n] != 0:
            return None
    z = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        z[c] = M[i][n]
    free = [c for c in range(n) if c not in pivots]
    return z, free


def _side_matrix(P, s_own, s_other):
    """Rows: indifference over ``s_other`` then the sum-to-one row."""
    k = len(s_own)
    A = [[P[a][c] for a in s_own] + [-1] for c in s_other]
    A.append([1] * k + [0])
    b = [0] * len(s_other) + [1]
    return A, b


def float_side(P: np.ndarray, s_own, s_other):
    """Screen one side in floats.

    Returns ``"none"``, ``"degenerate"`` or ``(w, u)`` with ``w`` over
    ``s_own``.
    """
    A, b = _side_matrix(P, s_own, s_other)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if np.linalg.norm(A @ sol - b) > SCREEN_TOL * (1 + np.abs(A).max()):
        return "none"
    if rank < A.shape[1]:
        return "degenerate"
    return sol[:-1], sol[-1]


def exact_side(P: np.ndarray, s_own, s_other):
    """Exact analogue of :func:`float_side` on an object array of Fractions."""
    A, b = _side_matrix(P, s_own, s_other)
    A = [[Fraction(v) for v in row] for row in A]
    res = rref_solve(A, [Fraction(v) for v in b])
    if res is None:
        return "none"
    z, free = res
    if free:
        return "degenerate"
    return z[:-1], z[-1]


def pair_lp(U1, U2, s1, s2, pieces, box, sw_lo=None, sw_hi=None,
            maximize=False, exact=True):
    """LP for an equilibrium supported within ``(s1, s2)`` in a value region.

    ``pieces`` is a list of extra lower bounds ``(lo1, lo2)`` (None = absent);
    the region is their union intersected with ``box`` and welfare bounds.
    Returns the best ``(x, y, v1, v2)`` over pieces (full-length strategy
    lists), or None.
    """
    m1, m2 = U1.shape
    k1, k2 = len(s1), len(s2)
    nv = k1 + k2 + 2
    iv1, iv2 = k1 + k2, k1 + k2 + 1
    best = None
    for lo1, lo2 in pieces:
        obj = [0] * nv
        if maximize:
            obj[iv1] = obj[iv2] = 1
        lp = LinearProgram(nv, objective=obj,
                           sense="max" if maximize else "feasibility")
        (b1lo, b1hi), (b2lo, b2hi) = box
        if lo1 is not None:
            b1lo = lo1 if b1lo is None else max(b1lo, lo1)
        if lo2 is not None:
            b2lo = lo2 if b2lo is None else max(b2lo, lo2)
        if (b1lo is not None and b1hi is not None and b1lo > b1hi) or \
           (b2lo is not None and b2hi is not None and b2lo > b2hi):
            continue
        lp.set_bounds(iv1, b1lo, b1hi)
        lp.set_bounds(iv2, b2lo, b2hi)
        lp.add_row([1] * k1 + [0] * (k2 + 2), "=", 1)
        lp.add_row([0] * k1 + [1] * k2 + [0, 0], "=", 1)
        for r in range(m1):
            row = [0] * k1 + [U1[r][c] for c in s2] + [-1, 0]
            lp.add_row(row, "=" if r in s1 else "<=", 0)
        for c in range(m2):
            row = [U2[r][c] for r in s1] + [0] * k2 + [0, -1]
            lp.add_row(row, "=" if c in s2 else "<=", 0)
        if sw_lo is not None:
            lp.add_row([0] * (k1 + k2) + [1, 1], ">=", sw_lo)
        if sw_hi is not None:
            lp.add_row([0] * (k1 + k2) + [1, 1], "<=", sw_hi)
        out = solve_lp(lp, exact=exact)
        if out.status is not LpStatus.OPTIMAL:
            continue
        z = out.x
        cand = (z, z[iv1] + z[iv2])
        if best is None or (maximize and cand[1] > best[1]):
            best = cand
            if not maximize:
                break
    if best is None:
        return None
    z = best[0]
    zero = Fraction(0) if exact else 0.0
    x = [zero] * m1
    y = [zero] * m2
    for j, a in enumerate(s1):
        x[a] = z[j]
    for j, c in enumerate(s2):
        y[c] = z[k1 + j]
    return x, y, z[iv1], z[iv2]


def full_vector(m: int, idx: Sequence[int], vals: Sequence) -> list:
    out = [Fraction(0)] * m
    for a, v in zip(idx, vals):
        out[a] = v
    return out
