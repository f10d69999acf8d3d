"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line and the
run ends with a summary of all ten (see conftest.py)."""

import itertools
import time
from fractions import Fraction

import numpy as np

from oracles import grid_dominator, random_game
from strongnash.game import Profile, expected_utilities
from strongnash.generator import GenSpec, GenSpecError, fixture, generate
from strongnash.oracle import Cut, Objective, OracleQuery, OracleStatus, ValueBox, find_ne
from strongnash.search import (SearchConfig, SearchStatus, branch_state, filter_states,
                               find_sne, init2_candidates, init_states, SearchState)
from strongnash.verify import check_ne, enumerate_nes, verify_sne

F = Fraction
MODES = (0, 1, 2, 3)
BACKENDS = ("support", "milp")


def _all_modes(game, algorithm="iterated", backends=BACKENDS):
    return {(m, b): find_sne(game, SearchConfig(algorithm=algorithm, mode=m, backend=b))
            for m in MODES for b in backends}


def test_criterion_01_fig1(accept):
    t0 = time.perf_counter()
    g = fixture("fig1")
    nes = enumerate_nes(g)
    ok_enum = nes == [Profile.pure((1, 1), g)] and expected_utilities(g, nes[0]) == (1, 1)
    outs = _all_modes(g)
    ok_search = all(o.status is SearchStatus.NONE for o in outs.values())
    dt = time.perf_counter() - t0
    ok = ok_enum and ok_search and dt < 1.0
    accept(1, ok, f"unique NE (a2,a4)={ok_enum}, NoSNE in 4 modes x 2 backends={ok_search}, "
                  f"{dt:.2f}s (limit 1s)")
    assert ok


def test_criterion_02_fig2(accept):
    t0 = time.perf_counter()
    g = fixture("fig2")
    nes = enumerate_nes(g)
    vals = sorted(expected_utilities(g, x) for x in nes)
    ok_enum = vals == [(F(5, 7), F(5, 7)), (1, 1), (F(5, 2), F(5, 2))]
    r = verify_sne(g, Profile([[0, 0, 1], [0, 0, 1]]))
    ok_reject = not r.is_sne and r.coalition == (0, 1)
    ok_accept = verify_sne(g, Profile([["1/2", "1/2", 0], ["1/2", "1/2", 0]])).is_sne
    out = find_sne(g)
    ok_find = out.status is SearchStatus.FOUND and out.values == (F(5, 2), F(5, 2))
    dt = time.perf_counter() - t0
    ok = ok_enum and ok_reject and ok_accept and ok_find and dt < 1.0
    accept(2, ok, f"three NEs={ok_enum}, (a3,a6) rejected by grand coalition={ok_reject}, "
                  f"half-mix accepted={ok_accept}, find_sne (5/2,5/2)={ok_find}, {dt:.2f}s")
    assert ok


def test_criterion_03_fig3(accept):
    g = fixture("fig3")
    U1, U2 = g.payoffs
    larger_sum = U1[0, 0] + U2[0, 0] > U1[2, 2] + U2[2, 2]
    outs = _all_modes(g)
    target = Profile([[0, 0, 1], [0, 0, 1]])
    ok = larger_sum and all(o.profile == target and o.values == (2, 2) for o in outs.values())
    accept(3, ok, f"pure SNE (a3,a6) at (2,2) in all modes/backends; (a1,a4) sum larger={larger_sum}")
    assert ok


def test_criterion_04_fig4(accept):
    t0 = time.perf_counter()
    g = fixture("fig4")
    checks = {}
    checks["init2"] = init2_candidates(g) == [(3, 5), (F(17, 5), F(17, 5)), (5, 3), (10, 0)]
    s1, s2, s3 = (ValueBox(3, "3.4", "3.4", 5), ValueBox("3.4", 5, 3, 5), ValueBox(5, 10, 0, 5))
    checks["init_states"] = [s.box for s in init_states(g, 2)][:3] == [s1, s2, s3]
    q = lambda box: find_ne(OracleQuery(g, box))
    checks["s1"] = q(s1).values == (F(17, 5), F(17, 5))
    checks["s3"] = q(s3).values == (F(41, 5), 0)
    checks["s7"] = q(ValueBox("3.7", 5, 3, 5)).values == (4, 4)
    checks["s4"] = (q(ValueBox(5, "8.2", "0.4", 5)).status is OracleStatus.INFEASIBLE and
                    q(ValueBox(5, "8.6", "0.3", 5)).status is OracleStatus.INFEASIBLE)
    s6 = branch_state(SearchState(s2, 1), (F(37, 10), F(18, 5)))[0]
    merged = filter_states([SearchState(s1, 0), s6])
    checks["filter"] = [s.box for s in merged] == [ValueBox(3, "3.7", "3.6", 5)]
    checks["find_sne"] = find_sne(g, SearchConfig(mode=1)).values == (4, 4)
    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 5.0
    bad = [k for k, v in checks.items() if not v]
    accept(4, ok, f"{len(checks) - len(bad)}/{len(checks)} checks"
                  f"{' failed: ' + ','.join(bad) if bad else ''}, {dt:.2f}s (limit 5s)")
    assert ok


def test_criterion_05_verifier_vs_grid(accept):
    rng = np.random.default_rng(2024)
    games = nes_seen = disagreements = dominated = 0
    while games < 300:
        g = random_game(rng, 3, 3, hi=3)
        games += 1
        for x in enumerate_nes(g):
            nes_seen += 1
            r = verify_sne(g, x)
            grid = grid_dominator(g, x, res=16)
            if r.is_sne:
                disagreements += grid is not None
                continue
            dominated += 1
            if len(r.coalition) == 2:
                gains = [b - a for a, b in zip(expected_utilities(g, x),
                                               expected_utilities(g, r.witness))]
                disagreements += not (all(t > 0 for t in gains) and tuple(gains) == r.gains)
            else:
                disagreements += 1  # an NE has no profitable single-agent deviation
    ok = disagreements == 0
    accept(5, ok, f"{games} games, {nes_seen} NEs ({dominated} NotSNE), "
                  f"{disagreements} disagreements with the 1/16 grid oracle")
    assert ok


def test_criterion_06_backend_agreement(accept):
    rng = np.random.default_rng(77)
    mismatches = []
    n = 0
    for k in range(100):
        g = random_game(rng, 5, 5, hi=9)
        a, b = sorted(F(int(t), 2) for t in rng.integers(0, 19, size=2))
        c, d = sorted(F(int(t), 2) for t in rng.integers(0, 19, size=2))
        box = ValueBox(a, b, c, d) if rng.random() < 0.7 else None
        cuts = [Cut(int(p), int(q)) for p, q in rng.integers(0, 10, size=(rng.integers(0, 4), 2))]
        for obj in (Objective.FEASIBILITY, Objective.MAX_WELFARE):
            r1 = find_ne(OracleQuery(g, box, cuts=cuts, objective=obj, backend="support"))
            r2 = find_ne(OracleQuery(g, box, cuts=cuts, objective=obj, backend="milp"))
            n += 1
            same = r1.status is r2.status
            if same and obj is Objective.MAX_WELFARE and r1.found:
                same = abs(float(sum(r1.values) - sum(r2.values))) <= 1e-6
            if not same:
                mismatches.append((k, obj.value, r1.status.value, r2.status.value))
    ok = not mismatches
    accept(6, ok, f"{n} queries on 100 random 5x5 games, {len(mismatches)} mismatches "
                  f"{mismatches[:3] if mismatches else ''}")
    assert ok


def test_criterion_07_generator_grid(accept):
    t0 = time.perf_counter()
    failures, rejected, done = [], [], 0
    grid = list(itertools.product((4, 6, 8), (0, 2, 4), (0, 2), range(1, 6)))
    for m, supp, dec, seed in grid:
        try:
            g, cert = generate(GenSpec(m, supp, dec, seed))
        except GenSpecError:
            rejected.append((m, supp, dec, seed))
            continue
        done += 1
        if cert.sne is not None and not verify_sne(g, cert.sne).is_sne:
            failures.append(("planted", m, supp, dec, seed))
        for d in cert.decoys:
            if not check_ne(g, d).is_ne or verify_sne(g, d).is_sne:
                failures.append(("decoy", m, supp, dec, seed))
        if supp >= 2:
            for r, c in itertools.product(range(m), repeat=2):
                x = Profile.pure((r, c), g)
                if check_ne(g, x).is_ne and verify_sne(g, x).is_sne:
                    failures.append(("pure SNE", m, supp, dec, seed))
        if supp == 0:
            nes = enumerate_nes(g)
            if nes.degenerate or any(verify_sne(g, x).is_sne for x in nes):
                failures.append(("supp0 SNE", m, supp, dec, seed))
    dt = time.perf_counter() - t0
    ok = not failures and not rejected and dt < 60
    detail = f"{done}/{len(grid)} specs certified, {len(failures)} failures, {dt:.1f}s (limit 60s)"
    if rejected:
        shapes = sorted({r[:3] for r in rejected})
        detail += (f"; {len(rejected)} specs rejected by the generator {shapes}: a full-support "
                   "block leaves no actions for decoy equilibria")
    accept(7, ok, detail)
    assert ok


def test_criterion_08_eps_monotone(accept):
    rng = np.random.default_rng(8)
    triples = violations = flips = 0
    while triples < 50:
        g = random_game(rng, 3, 3, hi=4)
        nes = enumerate_nes(g)
        x = nes[int(rng.integers(len(nes)))]
        ladder = sorted({F(int(t), 4) for t in rng.integers(0, 13, size=6)} | {F(0)})
        verdicts = [verify_sne(g, x, e).is_sne for e in ladder]
        triples += 1
        violations += any(a and not b for a, b in zip(verdicts, verdicts[1:]))
        flips += verdicts[0] != verdicts[-1]
    ok = violations == 0
    accept(8, ok, f"{triples} (game, NE, ladder) triples, {violations} violations, "
                  f"{flips} ladders change verdict")
    assert ok


def test_criterion_09_scale_smoke(accept):
    rows = []
    for supp, dec, seed in itertools.product((2, 4), (0, 2, 4, 6), (1, 2)):
        g, cert = generate(GenSpec(20, supp, dec, seed))
        t0 = time.perf_counter()
        out = find_sne(g, SearchConfig(mode=3, time_limit=120))
        dt = time.perf_counter() - t0
        rows.append((out.status is SearchStatus.FOUND and out.profile == cert.sne, dt,
                     out.trace.verify_share))
    solved = sum(r[0] and r[1] < 120 for r in rows)
    share = sum(r[2] > 0.5 for r in rows)
    ok = solved == len(rows) and share * 2 >= len(rows)
    accept(9, ok, f"m=20 mode 3: {solved}/{len(rows)} solved to the planted SNE within 120s "
                  f"(max {max(r[1] for r in rows):.2f}s); verification share > 50% on "
                  f"{share}/{len(rows)}")
    assert ok


def test_criterion_10_mode_agreement(accept):
    suite = [(name, fixture(name), None) for name in ("fig1", "fig2", "fig3", "fig4")]
    for m, supp, dec in itertools.product((4, 6, 8), (0, 2, 4), (0, 2)):
        spec = GenSpec(m, supp, dec, seed=m + supp + dec)
        try:
            g, cert = generate(spec)
        except GenSpecError:
            continue
        suite.append((f"m{m}s{supp}d{dec}", g, cert))
    disagree = []
    for name, g, cert in suite:
        for alg in ("iterated", "spatial"):
            outs = [find_sne(g, SearchConfig(algorithm=alg, mode=m)) for m in MODES]
            found = {o.status for o in outs}
            values = {o.values for o in outs}
            if len(found) != 1 or len(values) != 1 or SearchStatus.UNKNOWN in found:
                disagree.append((name, alg))
            elif cert is not None and outs[0].profile != cert.sne:
                disagree.append((name, alg, "certificate"))
    ok = not disagree
    accept(10, ok, f"{len(suite)} instances x 2 algorithms x 4 modes, "
                   f"{len(disagree)} disagreements {disagree[:3] if disagree else ''}")
    assert ok
