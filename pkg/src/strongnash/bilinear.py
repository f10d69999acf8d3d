"""Exact feasibility of bilinear sign systems over the unit square.

Each form is ``f(p, q) = A + B*p + C*q + D*p*q`` with rational coefficients
and a relation ``<`` or ``<=`` against zero. For fixed ``p`` every form is
linear in ``q``, so the feasible ``q`` set is an interval whose endpoints are
ratios of degree-1 polynomials in ``p``. Whether that interval is empty only
changes at roots of a finite family of polynomials of degree <= 2, so testing
one rational ``p`` per root and per open cell between roots decides the system.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Sequence

STRICT = "<"
WEAK = "<="


@dataclass(frozen=True)
class BilinearForm:
    A: Fraction
    B: Fraction
    C: Fraction
    D: Fraction
    rel: str = STRICT

    def __call__(self, p, q):
        return self.A + self.B * p + self.C * q + self.D * p * q

    def holds(self, p, q) -> bool:
        v = self(p, q)
        return v < 0 if self.rel == STRICT else v <= 0


@dataclass(frozen=True)
class BilinearSystem:
    forms: tuple[BilinearForm, ...]

    def __init__(self, forms: Sequence[BilinearForm]):
        forms = tuple(forms)
        if sum(1 for f in forms if f.rel == WEAK) > 1:
            # two closed boundaries can meet at an irrational p alone
            raise ValueError("at most one non-strict form is supported")
        for f in forms:
            if f.rel not in (STRICT, WEAK):
                raise ValueError(f"unknown relation {f.rel!r}")
        object.__setattr__(self, "forms", forms)

    def holds(self, p, q) -> bool:
        return all(f.holds(p, q) for f in self.forms)


def _poly_eval(c: Sequence[Fraction], x: Fraction) -> Fraction:
    # c[k] is the coefficient of x**k
    v = Fraction(0)
    for coef in reversed(c):
        v = v * x + coef
    return v


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


def _rational_sqrt(f: Fraction) -> Fraction | None:
    if f < 0:
        return None
    n, d = f.numerator, f.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _roots_in_unit(c, rationals: set, irrationals: list) -> None:
    """Collect roots of polynomial ``c`` lying in [0, 1].

    Rational roots go to ``rationals``; irrational ones are appended as
    ``(poly, lo, hi)`` brackets with a sign change and no other root inside.
    """
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    if len(c) <= 1:
        return  # constant (or identically zero): never changes sign
    if len(c) == 2:
        r = -c[0] / c[1]
        if 0 <= r <= 1:
            rationals.add(r)
        return
    a, b, cc = c[2], c[1], c[0]
    disc = b * b - 4 * a * cc
    if disc < 0:
        return
    s = _rational_sqrt(disc)
    if s is not None:
        for r in ((-b - s) / (2 * a), (-b + s) / (2 * a)):
            if 0 <= r <= 1:
                rationals.add(r)
        return
    # two distinct irrational roots, separated by the vertex
    vertex = -b / (2 * a)
    cuts = sorted({Fraction(0), Fraction(1)} | ({vertex} if 0 < vertex < 1 else set()))
    for lo, hi in zip(cuts, cuts[1:]):
        if _poly_eval(c, lo) * _poly_eval(c, hi) < 0:
            irrationals.append((c, lo, hi))


def _isolate(brackets, rationals):
    """Shrink irrational brackets until they avoid all rationals and each other."""
    out = [list(b) for b in brackets]
    for _ in range(400):
        clash = False
        for k, (c, lo, hi) in enumerate(out):
            bad = any(lo <= r <= hi for r in rationals) or any(
                j != k and not (hi < out[j][1] or out[j][2] < lo)
                for j in range(len(out)))
            if bad:
                clash = True
                mid = (lo + hi) / 2
                if _poly_eval(c, lo) * _poly_eval(c, mid) < 0:
                    out[k][2] = mid
                else:
                    out[k][1] = mid
        if not clash:
            return [(lo, hi) for _, lo, hi in out]
    raise ArithmeticError("failed to isolate polynomial roots")


def _q_interval(forms, p: Fraction):
    """Feasible q at fixed p as ``(lo, lo_closed, hi, hi_closed)`` or None."""
    lo, lo_c = Fraction(0), True
    hi, hi_c = Fraction(1), True
    for f in forms:
        alpha = f.A + f.B * p
        beta = f.C + f.D * p
        closed = f.rel == WEAK
        if beta == 0:
            if alpha < 0 or (closed and alpha == 0):
                continue
            return None
        t = -alpha / beta
        if beta > 0:  # q < t
            if t < hi or (t == hi and not closed):
                hi, hi_c = t, closed
        else:  # q > t
            if t > lo or (t == lo and not closed):
                lo, lo_c = t, closed
    if lo < hi or (lo == hi and lo_c and hi_c):
        return lo, lo_c, hi, hi_c
    return None


def _pick_q(interval) -> Fraction:
    lo, lo_c, hi, hi_c = interval
    if lo == hi:
        return lo
    if lo_c and lo == 0:
        return lo
    if hi_c and hi == 1:
        return hi
    return (lo + hi) / 2


def sample_points(forms) -> list[Fraction]:
    """Rational p values covering every sign cell of the system's critical set."""
    rationals = {Fraction(0), Fraction(1)}
    brackets: list = []
    polys = []
    for f in forms:
        alpha = [f.A, f.B]
        beta = [f.C, f.D]
        polys += [alpha, beta, [f.A + f.C, f.B + f.D]]
    for i in range(len(forms)):
        for j in range(i + 1, len(forms)):
            fi, fj = forms[i], forms[j]
            delta = _poly_sub(_poly_mul([fi.A, fi.B], [fj.C, fj.D]),
                              _poly_mul([fj.A, fj.B], [fi.C, fi.D]))
            polys.append(delta)
    for c in polys:
        _roots_in_unit(c, rationals, brackets)
    intervals = _isolate(brackets, rationals)
    # ordered anchors: rational points and isolating intervals
    items = [(r, r) for r in rationals] + list(intervals)
    items.sort()
    samples = sorted(rationals)
    for (_, prev_hi), (next_lo, _) in zip(items, items[1:]):
        if prev_hi < next_lo:
            samples.append((prev_hi + next_lo) / 2)
    return sorted(set(samples))


def decide_bilinear(system: BilinearSystem) -> tuple[Fraction, Fraction] | None:
    """Return a rational (p, q) in [0, 1]^2 satisfying every form, or None."""
    forms = system.forms
    # cheap corner probe first: most feasible systems are caught here
    for p in (Fraction(0), Fraction(1)):
        for q in (Fraction(0), Fraction(1)):
            if system.holds(p, q):
                return p, q
    for p in sample_points(forms):
        iv = _q_interval(forms, p)
        if iv is not None:
            q = _pick_q(iv)
            if system.holds(p, q):
                return p, q
            # an open interval's midpoint always satisfies; this is a guard
            q = (iv[0] + iv[2]) / 2
            if system.holds(p, q):
                return p, q
    return None


def form_from_block(g00, g01, g10, g11, rel=STRICT, shift=Fraction(0)) -> BilinearForm:
    """Form of ``sum g[a][b] x'_a y'_b + shift`` for the 2x2 block.

    Row weights are ``(p, 1-p)`` and column weights ``(q, 1-q)``; ``g01`` is
    the entry in the first row, second column.
    """
    A = g11 + shift
    B = g01 - g11
    C = g10 - g11
    D = g00 - g01 - g10 + g11
    return BilinearForm(Fraction(A), Fraction(B), Fraction(C), Fraction(D), rel)
