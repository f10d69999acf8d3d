from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import random_game
from strongnash.game import Profile, expected_utilities
from strongnash.generator import fixture
from strongnash.oracle import (NO_BOUND, Cut, Objective, OracleQuery, OracleStatus,
                               SupportIndex, ValueBox, filter_cuts, find_ne, satisfies_cuts,
                               staircase_pieces, welfare_lower_bound)
from strongnash.verify import check_ne

F = Fraction
FIG4_CUTS = [Cut(3, 5), Cut("3.4", "3.4"), Cut(5, 3), Cut(10, 0)]


def test_filter_cuts():
    assert filter_cuts([Cut(1, 1), Cut(2, 2)]) == (Cut(2, 2),)
    assert filter_cuts([Cut(3, 1), Cut(1, 3)]) == (Cut(1, 3), Cut(3, 1))
    assert filter_cuts(FIG4_CUTS[::-1]) == tuple(FIG4_CUTS)
    assert filter_cuts([Cut(1, 1), Cut(1, 1)]) == (Cut(1, 1),)


def test_welfare_lower_bound():
    assert welfare_lower_bound(FIG4_CUTS) == 5
    assert welfare_lower_bound([Cut(2, 2)]) == NO_BOUND
    assert welfare_lower_bound([Cut(0, 1), Cut(1, 0)]) == 0
    box = ValueBox(-10, 10, -10, 5)
    assert welfare_lower_bound(FIG4_CUTS, box) == -5


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=5),
       st.integers(0, 6), st.integers(0, 6))
def test_staircase_and_bound_cover_feasible_points(pts, w1, w2):
    cuts = [Cut(a, b) for a, b in pts]
    ok = satisfies_cuts(cuts, w1, w2)
    in_piece = any((lo1 is None or w1 >= lo1) and (lo2 is None or w2 >= lo2)
                   for lo1, lo2 in staircase_pieces(cuts))
    assert ok == in_piece
    lb = welfare_lower_bound(cuts, ValueBox(0, 6, 0, 6))
    if ok and lb != NO_BOUND:
        assert w1 + w2 >= lb


def test_value_box():
    b = ValueBox(3, "3.4", "3.4", 5)
    assert b.hi1 == F(17, 5) and str(b) == "[3,17/5]x[17/5,5]"
    with pytest.raises(ValueError):
        ValueBox(2, 1, 0, 0)
    assert ValueBox.root(fixture("fig4")) == ValueBox(-10, 10, -10, 5)


@pytest.mark.parametrize("backend", ["support", "milp"])
@pytest.mark.parametrize("box, expect", [
    ((3, "3.4", "3.4", 5), (F(17, 5), F(17, 5))),
    ((5, 10, 0, 5), (F(41, 5), 0)),
    ((5, "8.2", "0.4", 5), None),
    ((5, "8.6", "0.3", 5), None),
    (("3.7", 5, 3, 5), (4, 4)),
])
def test_fig4_boxes(backend, box, expect):
    res = find_ne(OracleQuery(fixture("fig4"), ValueBox(*box), backend=backend))
    if expect is None:
        assert res.status is OracleStatus.INFEASIBLE
    else:
        assert res.status is OracleStatus.FOUND and res.values == expect


def test_fig4_pure_profiles():
    g = fixture("fig4")
    res = find_ne(OracleQuery(g, ValueBox(3, "3.4", "3.4", 5)))
    assert res.profile == Profile.pure((6, 6), g)
    res = find_ne(OracleQuery(g, ValueBox(5, 10, 0, 5)))
    assert res.profile == Profile.pure((3, 3), g)


@pytest.mark.parametrize("backend", ["support", "milp"])
def test_max_welfare_with_cuts(backend):
    g = fixture("fig4")
    q = OracleQuery(g, cuts=FIG4_CUTS, objective=Objective.MAX_WELFARE, backend=backend)
    assert find_ne(q).values == (F(41, 5), 0)
    # the witness dominating (8.2, 0) cuts it off
    q = OracleQuery(g, cuts=FIG4_CUTS + [Cut("8.6", "0.3")], objective=Objective.MAX_WELFARE,
                    backend=backend)
    assert find_ne(q).values == (4, 4)
    q = OracleQuery(g, objective=Objective.MAX_WELFARE, backend=backend)
    assert sum(find_ne(q).values) == F(41, 5)
    q = OracleQuery(g, cuts=FIG4_CUTS + [Cut(5, 5), Cut(9, 1)], backend=backend)
    assert find_ne(q).status is OracleStatus.INFEASIBLE


def test_welfare_bounds_respected():
    g = fixture("fig2")
    res = find_ne(OracleQuery(g, sw_hi=4, objective=Objective.MAX_WELFARE))
    assert res.values == (1, 1)
    res = find_ne(OracleQuery(g, sw_lo=3))
    assert res.values == (F(5, 2), F(5, 2))


def test_index_is_reused_and_ordered():
    g = fixture("fig4")
    idx = SupportIndex(g)
    sizes = [len(e.s1) + len(e.s2) for e in idx.complete()]
    assert sizes == sorted(sizes) and len(idx.entries) == 31
    res = find_ne(OracleQuery(g, ValueBox("3.7", 5, 3, 5), index=idx))
    assert res.values == (4, 4)


def test_degenerate_pair_is_solved_per_region():
    from strongnash.game import Game
    g = Game([[[1, 1], [0, 0]], [[2, 2], [3, 0]]])
    # agent 1 always plays row 1; agent 2 indifferent: a continuum of NEs with v2 = 2
    res = find_ne(OracleQuery(g, ValueBox(0, 1, 2, 2)))
    assert res.found and check_ne(g, res.profile).is_ne


def test_timeout_reports_unknown():
    g = random_game(np.random.default_rng(1), 12, 12, hi=50)
    res = find_ne(OracleQuery(g, ValueBox(1000, 1000, 1000, 1000), time_limit=0.0))
    assert res.status in (OracleStatus.TIMED_OUT, OracleStatus.INFEASIBLE)


@given(st.integers(0, 100_000))
def test_found_profiles_are_exact_equilibria_in_region(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng, 4, 4, hi=6)
    lo1, lo2 = (F(int(a), 2) for a in rng.integers(0, 10, size=2))
    box = ValueBox(lo1, lo1 + 3, lo2, lo2 + 3)
    cuts = [Cut(int(a), int(b)) for a, b in rng.integers(0, 7, size=(2, 2))]
    res = find_ne(OracleQuery(g, box, cuts=cuts))
    if res.found:
        v = expected_utilities(g, res.profile)
        assert check_ne(g, res.profile).is_ne
        assert box.contains(*v) and satisfies_cuts(cuts, *v)
