"""Normal-form games with exact rational payoffs.

Payoff tensors are numpy object arrays holding :class:`fractions.Fraction`
entries, so every expectation computed from them is exact. Floats only ever
appear inside the LP search code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Scalar = Fraction


class ShapeError(ValueError):
    """Payoff tensor or strategy vector has the wrong dimensions."""


class GameFormatError(ValueError):
    """A game or profile file could not be parsed."""


def to_fraction(value) -> Fraction:
    """Convert ints, decimal strings, ``"p/q"`` strings and Fractions exactly.

    Floats are converted through their shortest decimal repr, so ``3.4``
    becomes ``17/5`` rather than the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not payoffs")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, (np.integer,)):
        return Fraction(int(value))
    if isinstance(value, (np.floating,)):
        return to_fraction(float(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def _as_fraction_array(data) -> np.ndarray:
    arr = np.array(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Game:
    """An n-agent normal-form game.

    ``payoffs[i]`` has shape ``actions`` and gives agent ``i``'s utility for
    every joint action (agent 0's action indexes the first axis).
    """

    payoffs: tuple[np.ndarray, ...]

    def __init__(self, payoffs: Sequence):
        tensors = tuple(_as_fraction_array(u) for u in payoffs)
        if len(tensors) < 2:
            raise ShapeError("a game needs at least two agents")
        shape = tensors[0].shape
        if len(shape) != len(tensors):
            raise ShapeError(
                f"payoff tensors must have {len(tensors)} axes, got {len(shape)}")
        for i, u in enumerate(tensors):
            if u.shape != shape:
                raise ShapeError(
                    f"agent {i} tensor has shape {u.shape}, expected {shape}")
        if any(m < 1 for m in shape):
            raise ShapeError("every agent needs at least one action")
        object.__setattr__(self, "payoffs", tensors)

    @classmethod
    def bimatrix(cls, u1, u2) -> "Game":
        return cls([u1, u2])

    @property
    def n_agents(self) -> int:
        return len(self.payoffs)

    @property
    def actions(self) -> tuple[int, ...]:
        return self.payoffs[0].shape

    def payoff_range(self, i: int) -> tuple[Fraction, Fraction]:
        u = self.payoffs[i]
        return min(u.flat), max(u.flat)

    def as_float(self) -> tuple[np.ndarray, ...]:
        return tuple(u.astype(float) for u in self.payoffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return self.actions == other.actions and all(
            np.array_equal(a, b) for a, b in zip(self.payoffs, other.payoffs))

    def __hash__(self) -> int:
        return hash((self.actions, tuple(tuple(u.flat) for u in self.payoffs)))

    def __repr__(self) -> str:
        return f"Game(actions={self.actions})"


@dataclass(frozen=True, eq=False)
class Profile:
    """One mixed strategy per agent, stored as tuples of Fractions."""

    strategies: tuple[tuple[Fraction, ...], ...]

    def __init__(self, strategies: Iterable[Iterable]):
        strats = tuple(tuple(to_fraction(p) for p in s) for s in strategies)
        for i, s in enumerate(strats):
            if any(p < 0 for p in s):
                raise ValueError(f"agent {i} strategy has a negative entry")
            if sum(s) != 1:
                raise ValueError(
                    f"agent {i} strategy sums to {sum(s)}, not 1")
        object.__setattr__(self, "strategies", strats)

    @classmethod
    def pure(cls, actions: Sequence[int], game_or_shape) -> "Profile":
        shape = game_or_shape.actions if isinstance(game_or_shape, Game) \
            else tuple(game_or_shape)
        strats = []
        for a, m in zip(actions, shape):
            s = [Fraction(0)] * m
            s[a] = Fraction(1)
            strats.append(s)
        return cls(strats)

    @property
    def n_agents(self) -> int:
        return len(self.strategies)

    def __getitem__(self, i: int) -> tuple[Fraction, ...]:
        return self.strategies[i]

    def __iter__(self):
        return iter(self.strategies)

    def __len__(self) -> int:
        return len(self.strategies)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Profile):
            return NotImplemented
        return self.strategies == other.strategies

    def __hash__(self) -> int:
        return hash(self.strategies)

    def supports(self) -> tuple[frozenset, ...]:
        return tuple(support_of(s) for s in self.strategies)

    def is_pure(self) -> bool:
        return all(len(s) == 1 for s in self.supports())

    def to_json_obj(self) -> dict:
        return {"strategies": [[_fraction_to_json(p) for p in s]
                               for s in self.strategies]}

    def __repr__(self) -> str:
        body = "; ".join(
            ", ".join(str(p) for p in s) for s in self.strategies)
        return f"Profile({body})"


def check_profile(game: Game, x: Profile) -> None:
    if x.n_agents != game.n_agents:
        raise ShapeError(
            f"profile has {x.n_agents} strategies for {game.n_agents} agents")
    for i, (s, m) in enumerate(zip(x.strategies, game.actions)):
        if len(s) != m:
            raise ShapeError(f"agent {i} strategy has {len(s)} entries, "
                             f"game has {m} actions")


def contract(tensor: np.ndarray, strategies: Sequence, skip: Iterable[int] = ()) -> np.ndarray:
    """Contract ``tensor`` with the strategies of every agent not in ``skip``.

    The remaining axes keep their original relative order.
    """
    skip = set(skip)
    out = tensor
    # contract from the last axis so earlier axis numbers stay valid
    for axis in reversed(range(tensor.ndim)):
        if axis in skip:
            continue
        vec = np.asarray(strategies[axis], dtype=tensor.dtype)
        out = np.tensordot(out, vec, axes=([axis], [0]))
    return out


def expected_utilities(game: Game, x: Profile) -> tuple[Fraction, ...]:
    """Exact expected utility of every agent under profile ``x``."""
    check_profile(game, x)
    vals = []
    for u in game.payoffs:
        v = contract(u, x.strategies)
        vals.append(Fraction(v.item() if isinstance(v, np.ndarray) else v))
    return tuple(vals)


def deviation_payoffs(game: Game, x: Profile, i: int) -> np.ndarray:
    """Agent ``i``'s payoff for each of its pure actions, others fixed."""
    check_profile(game, x)
    return contract(game.payoffs[i], x.strategies, skip=(i,))


def support_of(probs: Sequence, tol: float | None = None) -> frozenset:
    """Indices played with positive probability.

    Exact entries use ``> 0``; with ``tol`` given (numeric path) entries at or
    below ``tol`` are dropped.
    """
    if tol is None:
        return frozenset(a for a, p in enumerate(probs) if p > 0)
    return frozenset(a for a, p in enumerate(probs) if float(p) > tol)


@dataclass(frozen=True)
class AffineMap:
    """``original = scale * normalized + offset``."""

    scale: Fraction
    offset: Fraction

    def forward(self, value):
        if self.scale == 0:
            return Fraction(0)
        return (value - self.offset) / self.scale

    def inverse(self, value):
        return self.scale * value + self.offset


def normalize(game: Game) -> tuple[Game, tuple[AffineMap, ...]]:
    """Rescale each agent's payoffs to span exactly [0, 1].

    Constant-payoff agents map to all zeros (map scale 0 keeps the inverse
    exact).
    """
    tensors, maps = [], []
    for u in game.payoffs:
        lo, hi = min(u.flat), max(u.flat)
        if hi == lo:
            amap = AffineMap(Fraction(0), lo)
            new = np.full(u.shape, Fraction(0), dtype=object)
        else:
            amap = AffineMap(hi - lo, lo)
            new = (u - lo) / (hi - lo)
        tensors.append(new)
        maps.append(amap)
    return Game(tensors), tuple(maps)


# --------------------------------------------------------------------- I/O

def _fraction_to_json(f: Fraction):
    if f.denominator == 1:
        return int(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _reject_constant(name):
    raise GameFormatError(f"non-finite entry {name} is not allowed")


def _loads(data) -> object:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        return json.loads(data, parse_float=Fraction, parse_int=Fraction,
                          parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise GameFormatError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def _nested_to_array(obj, shape: tuple[int, ...], where: str) -> np.ndarray:
    out = np.empty(shape, dtype=object)

    def fill(node, idx, depth):
        path = where + "".join(f"[{k}]" for k in idx)
        if depth == len(shape):
            if isinstance(node, (list, dict)) or node is None or isinstance(node, bool):
                raise GameFormatError(f"{path}: expected a number, got {node!r}")
            try:
                out[idx] = to_fraction(node)
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise GameFormatError(f"{path}: bad entry {node!r}") from exc
            return
        if not isinstance(node, list) or len(node) != shape[depth]:
            got = len(node) if isinstance(node, list) else type(node).__name__
            raise GameFormatError(
                f"{path}: expected a list of length {shape[depth]}, got {got}")
        for k, child in enumerate(node):
            fill(child, idx + (k,), depth + 1)

    fill(obj, (), 0)
    return out


def parse_game(data) -> Game:
    """Parse the JSON game format.

    ``{"agents": n, "actions": [m1, ...], "payoffs": [T1, ...]}`` with
    numbers read exactly from their decimal text or given as ``"p/q"``.
    """
    obj = _loads(data)
    if not isinstance(obj, dict):
        raise GameFormatError("top level must be an object")
    for key in ("agents", "actions", "payoffs"):
        if key not in obj:
            raise GameFormatError(f"missing key {key!r}")
    n = obj["agents"]
    if not isinstance(n, Fraction) or n.denominator != 1 or n < 2:
        raise GameFormatError(f"'agents' must be an integer >= 2, got {n!r}")
    n = int(n)
    actions = obj["actions"]
    if (not isinstance(actions, list) or len(actions) != n
            or any(not isinstance(m, Fraction) or m.denominator != 1 or m < 1
                   for m in actions)):
        raise GameFormatError(f"'actions' must list {n} positive integers")
    shape = tuple(int(m) for m in actions)
    payoffs = obj["payoffs"]
    if not isinstance(payoffs, list) or len(payoffs) != n:
        raise GameFormatError(f"'payoffs' must hold {n} tensors")
    tensors = [_nested_to_array(t, shape, f"payoffs[{i}]")
               for i, t in enumerate(payoffs)]
    return Game(tensors)


def serialize_game(game: Game) -> bytes:
    obj = {
        "agents": game.n_agents,
        "actions": list(game.actions),
        "payoffs": [_tensor_to_json(u) for u in game.payoffs],
    }
    return (json.dumps(obj) + "\n").encode("utf-8")


def _tensor_to_json(u):
    if not isinstance(u, np.ndarray):
        return _fraction_to_json(u)
    if u.ndim == 0:
        return _fraction_to_json(u.item())
    return [_tensor_to_json(sub) for sub in u]


def parse_profile(data, game: Game | None = None) -> Profile:
    obj = _loads(data)
    if not isinstance(obj, dict) or "strategies" not in obj:
        raise GameFormatError("profile must be an object with 'strategies'")
    strats = obj["strategies"]
    if not isinstance(strats, list) or not all(isinstance(s, list) for s in strats):
        raise GameFormatError("'strategies' must be a list of lists")
    try:
        x = Profile([[to_fraction(p) for p in s] for s in strats])
    except (ValueError, TypeError) as exc:
        raise GameFormatError(f"invalid profile: {exc}") from exc
    if game is not None:
        try:
            check_profile(game, x)
        except ShapeError as exc:
            raise GameFormatError(str(exc)) from exc
    return x


def serialize_profile(x: Profile) -> bytes:
    return (json.dumps(x.to_json_obj()) + "\n").encode("utf-8")
