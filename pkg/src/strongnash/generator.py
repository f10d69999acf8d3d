"""Instances with a planted mixed strong equilibrium and decoy equilibria.

Construction (two agents, ``m`` actions each, payoff scale ``H``):

* planted block, ``k`` rows by ``k`` columns: agent 1 earns ``H`` on the
  diagonal and 0 elsewhere, agent 2 the reverse. The only equilibrium of the
  block is uniform play, worth ``(H/k, H(k-1)/k)``; every block cell sums to
  ``H`` so no mixture of block cells dominates it.
* low decoys: a single diagonal cell on fresh actions, worth strictly less
  than the planted values to both agents.
* high decoys: a prisoner's dilemma on two fresh rows and columns whose
  equilibrium has welfare above ``H`` but gives agent 2 less than the planted
  value; its cooperative cell dominates the equilibrium.
* everything else is filler near ``-F`` with small seeded jitter; unused
  actions are padded with strictly dominated ones.

With ``supp = 0`` the block is replaced by the 2x2 prisoner's dilemma
``[[3,0],[5,1]] / [[3,5],[0,1]]``, whose cooperative cell dominates every
equilibrium of the game. Rows and columns are shuffled with the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .game import Game, Profile
from .verify import check_ne, enumerate_nes, verify_sne

H = Fraction(5)
F = Fraction(10)


class GenSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    m: int
    supp: int
    decoys: int = 0
    seed: int = 0
    high_share: float = 0.5  # fraction of decoys with welfare above the planted one

    def validate(self) -> None:
        if self.m < 1:
            raise GenSpecError("m must be positive")
        if self.supp < 0 or self.supp > self.m:
            raise GenSpecError(f"supp must lie in 0..m, got {self.supp}")
        if self.decoys < 0:
            raise GenSpecError("decoys must be non-negative")
        if not 0.0 <= self.high_share <= 1.0:
            raise GenSpecError("high_share must lie in [0, 1]")
        core = self.supp if self.supp > 0 else 2
        if core > self.m:
            raise GenSpecError("supp = 0 needs m >= 2")
        if self.decoys + core > self.m:
            raise GenSpecError(
                f"{self.decoys} decoys do not fit next to a size-{core} core in m={self.m}")
        if self.supp == 1 and self.decoys > 0:
            raise GenSpecError("a size-1 block leaves agent 2 no room for dominated decoys")
        if not 0 <= self.seed < 2 ** 64:
            raise GenSpecError("seed must be a 64-bit unsigned integer")


@dataclass
class Certificate:
    sne: Profile | None
    decoys: list = field(default_factory=list)
    uniqueness_verified: bool = False

    def to_json_obj(self) -> dict:
        return {"sne": None if self.sne is None else self.sne.to_json_obj(),
                "decoys": [d.to_json_obj() for d in self.decoys],
                "uniqueness": "verified" if self.uniqueness_verified else "unverified"}

    def to_bytes(self) -> bytes:
        return (json.dumps(self.to_json_obj(), indent=1) + "\n").encode()


def _rand_frac(rng, lo: Fraction, hi: Fraction, den: int = 1000) -> Fraction:
    """Uniform rational strictly inside (lo, hi) on a grid of step 1/den."""
    t = Fraction(int(rng.integers(1, den)), den)
    return lo + (hi - lo) * t


def generate(spec: GenSpec) -> tuple[Game, Certificate]:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    m, k = spec.m, spec.supp
    jit = H / (8 * m)
    U1 = np.empty((m, m), dtype=object)
    U2 = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            U1[i, j] = -F + _rand_frac(rng, 0, jit)
            U2[i, j] = -F + _rand_frac(rng, 0, jit)

    decoys = []  # (row, col) of planted pure decoy equilibria
    sne = None
    if k > 0:
        for i in range(k):
            for j in range(k):
                U1[i, j] = H if i == j else Fraction(0)
                U2[i, j] = Fraction(0) if i == j else H
        v1, v2 = H / k, H * (k - 1) / k
        nxt = k
    else:
        U1[:2, :2] = [[Fraction(3), Fraction(0)], [Fraction(5), Fraction(1)]]
        U2[:2, :2] = [[Fraction(3), Fraction(5)], [Fraction(0), Fraction(1)]]
        _make_dominant(U1, U2, 0, 1, 0, 1, rng, jit)
        decoys.append((1, 1))
        v1 = v2 = Fraction(3)  # the cooperative cell bounds every decoy
        nxt = 2

    room = m - nxt
    n_high = int(round(spec.decoys * spec.high_share)) if k > 1 else 0
    n_high = min(n_high, max(0, room - spec.decoys))  # each high decoy takes two slots
    n_low = spec.decoys - n_high
    for _ in range(n_low):
        a1 = _rand_frac(rng, Fraction(0), v1)
        a2 = _rand_frac(rng, Fraction(0), v2)
        U1[nxt, nxt], U2[nxt, nxt] = a1, a2
        decoys.append((nxt, nxt))
        nxt += 1
    for _ in range(n_high):
        p, q = nxt, nxt + 1
        d2 = _rand_frac(rng, Fraction(0), v2 / 2)
        d1 = H - d2 + _rand_frac(rng, Fraction(0), H / 2)  # welfare above H
        c1 = d1 + _rand_frac(rng, Fraction(0), Fraction(1))
        c2 = d2 + _rand_frac(rng, Fraction(0), (v2 - d2) / 2)
        U1[p, p], U2[p, p] = c1, c2               # cooperative cell
        U1[q, q], U2[q, q] = d1, d2               # the decoy equilibrium
        U1[q, p], U2[q, p] = c1 + 1, d2 - 1       # agent 1 defects
        U1[p, q], U2[p, q] = d1 - 1, (c2 + v2) / 2  # agent 2 defects
        _make_dominant(U1, U2, p, q, p, q, rng, jit)
        decoys.append((q, q))
        nxt += 2
    # padding: each agent's own payoff on spare actions is strictly dominated
    for a in range(nxt, m):
        for j in range(m):
            U1[a, j] = -2 * F + _rand_frac(rng, 0, jit)
            U2[j, a] = -2 * F + _rand_frac(rng, 0, jit)

    prow = rng.permutation(m)
    pcol = rng.permutation(m)
    # new index of old row r is inv_row[r]
    inv_row = np.argsort(prow)
    inv_col = np.argsort(pcol)
    G1 = U1[np.ix_(prow, pcol)]
    G2 = U2[np.ix_(prow, pcol)]
    game = Game([G1, G2])

    def pure(r, c):
        return Profile.pure((int(inv_row[r]), int(inv_col[c])), game)

    if k > 0:
        x = [Fraction(0)] * m
        y = [Fraction(0)] * m
        for i in range(k):
            x[int(inv_row[i])] = Fraction(1, k)
            y[int(inv_col[i])] = Fraction(1, k)
        sne = Profile([x, y])
    cert = Certificate(sne, [pure(r, c) for r, c in decoys])
    return game, cert


def _make_dominant(U1, U2, weak_row, strong_row, weak_col, strong_col, rng, jit):
    """Outside the 2x2 block, make ``strong_row`` beat ``weak_row`` for agent 1
    everywhere, and ``strong_col`` beat ``weak_col`` for agent 2."""
    m = U1.shape[0]
    for j in range(m):
        if j not in (weak_col, strong_col):
            U1[weak_row, j] = U1[strong_row, j] - _rand_frac(rng, 0, jit)
    for i in range(m):
        if i not in (weak_row, strong_row):
            U2[i, weak_col] = U2[i, strong_col] - _rand_frac(rng, 0, jit)


class CertificateError(AssertionError):
    pass


def certify(game: Game, cert: Certificate, enumerate_up_to: int = 12) -> Certificate:
    """Re-check a certificate with the exact verifiers.

    The planted profile must be an SNE and every decoy an NE that is not
    strong. For ``m <= enumerate_up_to`` all equilibria are enumerated as well:
    the planted profile must be the only SNE among them.
    Returns a copy marked ``uniqueness_verified`` when enumeration ran.
    """
    if cert.sne is not None and not verify_sne(game, cert.sne).is_sne:
        raise CertificateError("planted profile is not a strong NE")
    for d in cert.decoys:
        if not check_ne(game, d).is_ne:
            raise CertificateError(f"decoy {d} is not an NE")
        if verify_sne(game, d).is_sne:
            raise CertificateError(f"decoy {d} is strong")
    if max(game.actions) > enumerate_up_to:
        return Certificate(cert.sne, list(cert.decoys), False)
    for e in enumerate_nes(game):
        if not verify_sne(game, e).is_sne:
            continue
        if cert.sne is None:
            raise CertificateError(f"unexpected SNE {e}")
        if e != cert.sne:
            raise CertificateError(f"SNE {e} besides the planted one")
    return Certificate(cert.sne, list(cert.decoys), True)


# ------------------------------------------------------------------ fixtures

def _fig4():
    N = (-10, -10)
    rows = [
        [(5, 0), (5, 3), (3, 5)] + [N] * 4,
        [(0, 0), (3, 5), (5, 3)] + [N] * 4,
        [(10, 0), (5, 0), (0, 1), (-10, 1)] + [N] * 3,
        [N] * 3 + [("8.2", 0)] + [N] * 3,
        [N] * 4 + [(2, 2)] + [N] * 2,
        [N] * 5 + [(2, 4)] + [N],
        [N] * 6 + [("3.4", "3.4")],
    ]
    return ([[c[0] for c in r] for r in rows], [[c[1] for c in r] for r in rows])


def fixture(name: str) -> Game:
    """The four worked-example games."""
    rho = Fraction(1, 10)
    if name == "fig1":
        return Game([[[3, 0], [5, 1]], [[3, 5], [0, 1]]])
    if name == "fig2":
        return Game([[[5, 0, 0], [0, 5, 0], [0, 0, 1]],
                     [[0, 5, 0], [5, 0, 0], [0, 0, 1]]])
    if name == "fig3":
        return Game([[[5, 0, 0], [0, 0, 0], [rho, rho, 2]],
                     [[0, 0, rho], [0, 5, rho], [0, 0, 2]]])
    if name == "fig4":
        return Game(list(_fig4()))
    raise KeyError(f"unknown fixture {name!r}; expected fig1..fig4")


FIXTURES = ("fig1", "fig2", "fig3", "fig4")


__all__ = ["GenSpec", "GenSpecError", "Certificate", "CertificateError", "certify",
           "generate", "fixture", "FIXTURES",
           "H", "F"]
