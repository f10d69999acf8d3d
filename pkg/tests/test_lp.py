from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from strongnash.lp import LinearProgram, LpStatus, check_feasible, solve_lp


def test_bounded_max():
    lp = LinearProgram(1, objective=[1], sense="max")
    lp.add_row([1], "<=", 3)
    out = solve_lp(lp)
    assert out.status is LpStatus.OPTIMAL and out.x[0] == pytest.approx(3)


def test_infeasible():
    lp = LinearProgram(1)
    lp.add_row([1], ">=", 1)
    lp.add_row([1], "<=", 0)
    assert solve_lp(lp).status is LpStatus.INFEASIBLE
    assert solve_lp(lp, exact=True).status is LpStatus.INFEASIBLE


def test_unbounded():
    lp = LinearProgram(2, objective=[1, 1], sense="max")
    lp.add_row([1, -1], "<=", 1)
    assert solve_lp(lp).status is LpStatus.UNBOUNDED


def test_fig2_indifference_welfare():
    # x, y on {a1,a2} x {a4,a5}; v1, v2 free; maximize v1 + v2
    lp = LinearProgram(6, objective=[0, 0, 0, 0, 1, 1], sense="max")
    lp.set_bounds(4, None, None)
    lp.set_bounds(5, None, None)
    lp.add_row([1, 1, 0, 0, 0, 0], "=", 1)
    lp.add_row([0, 0, 1, 1, 0, 0], "=", 1)
    lp.add_row([0, 0, 5, 0, -1, 0], "=", 0)   # agent 1, row a1
    lp.add_row([0, 0, 0, 5, -1, 0], "=", 0)   # row a2
    lp.add_row([0, 5, 0, 0, 0, -1], "=", 0)   # agent 2, column a4
    lp.add_row([5, 0, 0, 0, 0, -1], "=", 0)   # column a5
    out = solve_lp(lp, exact=True)
    assert out.status is LpStatus.OPTIMAL
    assert out.x[4] == Fraction(5, 2) and out.x[5] == Fraction(5, 2)


def test_degenerate_cycling_example():
    # Beale's example cycles under the textbook rule; Bland's rule terminates
    lp = LinearProgram(4, objective=[Fraction(3, 4), -150, Fraction(1, 50), -6], sense="max")
    lp.add_row([Fraction(1, 4), -60, Fraction(-1, 25), 9], "<=", 0)
    lp.add_row([Fraction(1, 2), -90, Fraction(-1, 50), 3], "<=", 0)
    lp.add_row([0, 0, 1, 0], "<=", 1)
    out = solve_lp(lp, exact=True)
    assert out.status is LpStatus.OPTIMAL
    assert out.objective == Fraction(1, 20)


@given(st.integers(0, 10_000))
def test_agrees_with_highs(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 5)), int(rng.integers(1, 6))
    A = rng.integers(-4, 5, size=(m, n))
    b = rng.integers(-3, 8, size=m)
    c = rng.integers(-5, 6, size=n)
    lo = rng.integers(-2, 1, size=n)
    hi = lo + rng.integers(1, 6, size=n)
    lp = LinearProgram(n, objective=c.tolist(), sense="min")
    for j in range(n):
        lp.set_bounds(j, int(lo[j]), int(hi[j]))
    for row, rhs in zip(A.tolist(), b.tolist()):
        lp.add_row(row, "<=", rhs)
    ref = linprog(c, A_ub=A, b_ub=b, bounds=list(zip(lo, hi)), method="highs")
    for exact in (False, True):
        out = solve_lp(lp, exact=exact)
        if ref.status == 2:
            assert out.status is LpStatus.INFEASIBLE
        else:
            assert ref.status == 0
            assert out.status is LpStatus.OPTIMAL
            assert float(out.objective) == pytest.approx(ref.fun, abs=1e-7)
            assert check_feasible(lp, [float(v) for v in out.x])
