"""Strong Nash equilibrium search for two-agent games.

Two drivers share the constrained NE oracle and the exact SNE verifier:

* ``spatial``: branch-and-bound over boxes of equilibrium values. Each
  state's box is searched for an NE; a non-strong NE yields a dominating
  witness whose value pair splits the box.
* ``iterated``: one region over the whole value space, shrunk by Pareto cuts
  at witness values until the oracle returns a strong NE or nothing.

Modes: 0 plain; 1 welfare maximization with a decreasing welfare cap; 2 as 1
plus initial states/cuts from undominated pure outcomes; 3 as 2 without
welfare maximization.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .game import Game, Profile, expected_utilities
from .oracle import (DEFAULT_TIME_LIMIT, NO_BOUND, Backend, Cut, Objective, OracleQuery,
                     OracleStatus, SupportIndex, ValueBox, filter_cuts, find_ne,
                     welfare_lower_bound)
from .verify import verify_sne


class SearchStatus(Enum):
    FOUND = "FoundSNE"
    NONE = "NoSNE"
    UNKNOWN = "Unknown"


@dataclass
class SearchState:
    box: ValueBox
    created: int
    sw_hi: Fraction | None = None  # welfare cap inherited from the parent box


@dataclass
class SearchConfig:
    algorithm: str = "iterated"
    mode: int = 1
    removal: str = "random"
    seed: int = 0
    backend: str = "support"
    eps: Fraction = Fraction(0)
    time_limit: float = DEFAULT_TIME_LIMIT
    max_iter: int = 10_000

    def __post_init__(self):
        if self.algorithm not in ("spatial", "iterated"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.mode not in (0, 1, 2, 3):
            raise ValueError(f"mode must be 0..3, got {self.mode!r}")
        if self.removal not in ("random", "dfs", "bfs"):
            raise ValueError(f"unknown removal strategy {self.removal!r}")
        Backend(self.backend)
        self.eps = Fraction(self.eps)
        if self.eps < 0:
            raise ValueError("eps must be non-negative")

    @property
    def maximize(self) -> bool:
        return self.mode in (1, 2)

    @property
    def uses_init2(self) -> bool:
        return self.mode in (2, 3)


@dataclass
class SearchTrace:
    iterations: int = 0
    oracle_calls: int = 0
    oracle_time: float = 0.0
    verify_time: float = 0.0
    exhaustive: bool = True
    events: list = field(default_factory=list)

    @property
    def verify_share(self) -> float:
        total = self.oracle_time + self.verify_time
        return self.verify_time / total if total > 0 else 0.0

    def to_json_obj(self) -> dict:
        return {"iterations": self.iterations, "oracle_calls": self.oracle_calls,
                "oracle_time": self.oracle_time, "verify_time": self.verify_time,
                "verify_share": self.verify_share, "exhaustive": self.exhaustive,
                "events": self.events}


@dataclass
class SearchOutcome:
    status: SearchStatus
    profile: Profile | None = None
    values: tuple | None = None
    trace: SearchTrace = field(default_factory=SearchTrace)

    @property
    def sne_kind(self) -> str | None:
        if self.profile is None:
            return None
        return "pure" if self.profile.is_pure() else "mixed"


# ----------------------------------------------------------------- helpers

def init2_candidates(game: Game) -> list[tuple[Fraction, Fraction]]:
    """Value pairs of pure outcomes no other pure outcome Pareto-dominates.

    An outcome is dropped when another one is at least as good for both
    agents and differs. Sorted by the first value ascending.
    """
    if game.n_agents != 2:
        raise ValueError("two-agent games only")
    U1, U2 = game.payoffs
    pts = sorted({(U1[idx], U2[idx]) for idx in itertools.product(*map(range, game.actions))})
    keep = [p for p in pts
            if not any(q != p and q[0] >= p[0] and q[1] >= p[1] for q in pts)]
    return sorted(keep, key=lambda p: (p[0], -p[1]))


def init_states(game: Game, mode: int) -> list[SearchState]:
    root = ValueBox.root(game)
    if mode in (0, 1):
        return [SearchState(root, 0)]
    X = init2_candidates(game)
    states = []
    for h in range(len(X) - 1):
        (a1, _), (b1, b2) = X[h], X[h + 1]
        states.append(SearchState(ValueBox(a1, b1, b2, root.hi2), len(states)))
    # zero-measure boundary states
    states.append(SearchState(ValueBox(root.lo1, X[0][0], X[0][1], X[0][1]), len(states)))
    states.append(SearchState(ValueBox(X[-1][0], X[-1][0], root.lo2, X[-1][1]), len(states)))
    return states


def branch_state(s: SearchState, values, counter=None) -> list[SearchState]:
    """Split ``s`` around a dominating value pair ``(w1, w2)``.

    Drops exactly the points of the box strictly below the pair.
    """
    w1, w2 = Fraction(values[0]), Fraction(values[1])
    b = s.box
    nxt = counter if counter is not None else itertools.count(s.created + 1)
    out = []
    cut1 = min(b.hi1, w1)
    if w2 <= b.hi2 and b.lo1 <= cut1:
        out.append(SearchState(ValueBox(b.lo1, cut1, max(w2, b.lo2), b.hi2), next(nxt), s.sw_hi))
    if cut1 != b.hi1:
        out.append(SearchState(ValueBox(max(cut1, b.lo1), b.hi1, b.lo2, b.hi2), next(nxt), s.sw_hi))
    return out


def _merge_ok(s: SearchState, t: SearchState, witnesses) -> bool:
    a, b = s.box, t.box
    if not (a.lo1 <= b.lo1 and a.lo2 <= b.lo2):
        return False
    if witnesses is None:
        return True
    # the merged box must still hold every undominated point of both boxes
    if a.hi1 > b.hi1 or a.hi2 > b.hi2:
        return False
    if a.lo2 == b.lo2:
        return True
    # the strip of s below t's lower edge must be strictly dominated
    return any(a.hi1 < w1 and b.lo2 <= w2 for w1, w2 in witnesses)


def filter_states(states: list[SearchState], witnesses=None, counter=None) -> list[SearchState]:
    """Merge pairs of states per the box-merge rule until none qualifies.

    With ``witnesses`` (achievable value pairs) a merge is applied only when
    the part of the first box it discards is strictly dominated by one of
    them; without, the rule is applied unconditionally.
    """
    S = sorted(states, key=lambda s: s.created)
    nxt = counter if counter is not None else itertools.count(
        max((s.created for s in S), default=0) + 1)
    changed = True
    while changed:
        changed = False
        for i, j in itertools.permutations(range(len(S)), 2):
            s, t = S[i], S[j]
            if not _merge_ok(s, t, witnesses):
                continue
            caps = [s.sw_hi, t.sw_hi]
            cap = None if None in caps else max(caps)
            merged = SearchState(ValueBox(s.box.lo1, t.box.hi1, t.box.lo2, t.box.hi2),
                                 next(nxt), cap)
            S = [u for k, u in enumerate(S) if k not in (i, j)] + [merged]
            changed = True
            break
    return S


# ------------------------------------------------------------------ drivers

class _Clock:
    def __init__(self, limit):
        self.start = time.monotonic()
        self.deadline = self.start + limit

    def left(self) -> float:
        return self.deadline - time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def _oracle(game, cfg, trace, clock, index, box=None, cuts=(), sw_hi=None, sw_lo=None):
    q = OracleQuery(game, box=box, cuts=tuple(cuts),
                    objective=Objective.MAX_WELFARE if cfg.maximize else Objective.FEASIBILITY,
                    sw_hi=sw_hi, sw_lo=sw_lo, backend=cfg.backend,
                    time_limit=max(0.0, clock.left()), index=index)
    t0 = time.monotonic()
    res = find_ne(q)
    trace.oracle_time += time.monotonic() - t0
    trace.oracle_calls += 1
    if not res.exhaustive and res.status is OracleStatus.INFEASIBLE:
        trace.exhaustive = False
    return res


def _verify(game, x, cfg, trace):
    t0 = time.monotonic()
    verdict = verify_sne(game, x, cfg.eps)
    trace.verify_time += time.monotonic() - t0
    return verdict


def _witness_values(game, x, verdict):
    """Full-profile values of the deviation: members' witness, others fixed."""
    strategies = list(x.strategies)
    for k, i in enumerate(verdict.coalition):
        strategies[i] = verdict.witness[k]
    return expected_utilities(game, Profile(strategies))


def find_sne(game: Game, config: SearchConfig | None = None) -> SearchOutcome:
    cfg = config or SearchConfig()
    if game.n_agents != 2:
        raise ValueError("SNE search handles two-agent games only")
    index = SupportIndex(game) if Backend(cfg.backend) is Backend.SUPPORT else None
    if cfg.algorithm == "spatial":
        return _spatial(game, cfg, index)
    return _iterated(game, cfg, index)


def _spatial(game, cfg, index) -> SearchOutcome:
    trace = SearchTrace()
    clock = _Clock(cfg.time_limit)
    rng = random.Random(cfg.seed)
    counter = itertools.count(100)
    states = init_states(game, cfg.mode)
    witnesses = list(init2_candidates(game)) if cfg.uses_init2 else []
    while states:
        if trace.iterations >= cfg.max_iter or clock.left() <= 0:
            return SearchOutcome(SearchStatus.UNKNOWN, trace=trace)
        trace.iterations += 1
        if cfg.removal == "random":
            k = rng.randrange(len(states))
        elif cfg.removal == "dfs":
            k = max(range(len(states)), key=lambda i: states[i].created)
        else:
            k = min(range(len(states)), key=lambda i: states[i].created)
        s = states.pop(k)
        res = _oracle(game, cfg, trace, clock, index, box=s.box,
                      sw_hi=s.sw_hi if cfg.maximize else None)
        event = {"iteration": trace.iterations, "box": str(s.box),
                 "oracle": res.status.value, "elapsed": clock.elapsed()}
        trace.events.append(event)
        if res.status is OracleStatus.TIMED_OUT:
            return SearchOutcome(SearchStatus.UNKNOWN, trace=trace)
        if res.status is OracleStatus.INFEASIBLE:
            continue
        verdict = _verify(game, res.profile, cfg, trace)
        event["ne"] = [str(v) for v in res.values]
        if verdict.is_sne:
            return SearchOutcome(SearchStatus.FOUND, res.profile, res.values, trace)
        w = _witness_values(game, res.profile, verdict)
        event["witness"] = [str(v) for v in w]
        witnesses.append(tuple(w))
        if cfg.maximize:
            s = SearchState(s.box, s.created, res.values[0] + res.values[1])
        states.extend(branch_state(s, w, counter))
        states = filter_states(states, witnesses, counter)
    return SearchOutcome(SearchStatus.NONE, trace=trace)


def _iterated(game, cfg, index) -> SearchOutcome:
    trace = SearchTrace()
    clock = _Clock(cfg.time_limit)
    root = ValueBox.root(game)
    cuts: tuple[Cut, ...] = ()
    if cfg.uses_init2:
        cuts = filter_cuts([Cut(*p) for p in init2_candidates(game)])
    sw_hi = None
    while True:
        if trace.iterations >= cfg.max_iter or clock.left() <= 0:
            return SearchOutcome(SearchStatus.UNKNOWN, trace=trace)
        trace.iterations += 1
        sw_lo = None
        if cfg.mode != 0 and len(cuts) >= 2:
            lb = welfare_lower_bound(cuts, root)
            sw_lo = None if lb == NO_BOUND else lb
        event = {"iteration": trace.iterations, "cuts": [[str(c.v1), str(c.v2)] for c in cuts],
                 "sw_lo": None if sw_lo is None else str(sw_lo),
                 "sw_hi": None if sw_hi is None else str(sw_hi)}
        trace.events.append(event)
        if sw_lo is not None and sw_hi is not None and sw_lo > sw_hi:
            event["oracle"] = "skipped"
            return SearchOutcome(SearchStatus.NONE, trace=trace)
        res = _oracle(game, cfg, trace, clock, index, box=root, cuts=cuts,
                      sw_hi=sw_hi, sw_lo=sw_lo)
        event["oracle"] = res.status.value
        event["elapsed"] = clock.elapsed()
        if res.status is OracleStatus.TIMED_OUT:
            return SearchOutcome(SearchStatus.UNKNOWN, trace=trace)
        if res.status is OracleStatus.INFEASIBLE:
            return SearchOutcome(SearchStatus.NONE, trace=trace)
        event["ne"] = [str(v) for v in res.values]
        verdict = _verify(game, res.profile, cfg, trace)
        if verdict.is_sne:
            return SearchOutcome(SearchStatus.FOUND, res.profile, res.values, trace)
        w = _witness_values(game, res.profile, verdict)
        event["witness"] = [str(v) for v in w]
        cuts = filter_cuts(list(cuts) + [Cut(*w)])
        if cfg.maximize:
            sw_hi = res.values[0] + res.values[1]
