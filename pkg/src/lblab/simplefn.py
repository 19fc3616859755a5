"""Exact Lorentz-norm calculus for nonnegative simple functions.

A simple function is stored only through its distribution: a list of
``(value, mass)`` pairs with distinct values sorted strictly decreasing.
All norms in scope are rearrangement invariant, so the spatial layout is
never needed. Every integral is a power function integrated over an
interval, evaluated in closed form.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Sequence

from .errors import InvalidFactor, InvalidPiece, UnsupportedExponent

INF = math.inf


def is_inf(x: float) -> bool:
    return math.isinf(x)


@dataclass(frozen=True)
class LorentzExponents:
    """Exponent pair ``(p, q)`` of ``L^{p,q}``; ``q = INF`` selects the weak-type sup form."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0) or is_inf(self.p):
            raise UnsupportedExponent(f"p must lie in (0, inf), got {self.p}")
        if not (self.q > 0):
            raise UnsupportedExponent(f"q must lie in (0, inf], got {self.q}")


@dataclass(frozen=True)
class SimpleFunction:
    pieces: tuple[tuple[float, float], ...] = ()

    @classmethod
    def zero(cls) -> "SimpleFunction":
        return cls(())

    @property
    def values(self) -> list[float]:
        return [v for v, _ in self.pieces]

    @property
    def masses(self) -> list[float]:
        return [m for _, m in self.pieces]

    @property
    def cumulative_masses(self) -> list[float]:
        return list(accumulate(self.masses))

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def is_zero(self) -> bool:
        return not self.pieces

    def to_json(self) -> str:
        return json.dumps({"pieces": [[v, m] for v, m in self.pieces]})

    @classmethod
    def from_json(cls, text: str) -> "SimpleFunction":
        return normalize(json.loads(text)["pieces"])


def normalize(raw: Iterable[Sequence[float]]) -> SimpleFunction:
    """Drop zero values, merge equal values, sort by value descending."""
    merged: dict[float, float] = {}
    for value, mass in raw:
        value, mass = float(value), float(mass)
        if not value >= 0 or not math.isfinite(value):
            raise InvalidPiece(f"value must be finite and nonnegative, got {value}")
        if not mass > 0 or not math.isfinite(mass):
            raise InvalidPiece(f"mass must be finite and positive, got {mass}")
        if value == 0:
            continue
        merged[value] = merged.get(value, 0.0) + mass
    return SimpleFunction(tuple(sorted(merged.items(), key=lambda vm: -vm[0])))


def rearrangement(f: SimpleFunction, t: float) -> float:
    """Right-continuous decreasing rearrangement ``f*(t)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    cum = f.cumulative_masses
    i = bisect.bisect_right(cum, t)
    return f.pieces[i][0] if i < len(cum) else 0.0


def distribution(f: SimpleFunction, s: float) -> float:
    """``mu{|f| > s}``."""
    return math.fsum(m for v, m in f.pieces if v > s)


def lorentz_norm(f: SimpleFunction, e: LorentzExponents) -> float:
    p, q = e.p, e.q
    if f.is_zero():
        return 0.0
    cum = f.cumulative_masses
    if is_inf(q):
        return max(v * T ** (1.0 / p) for (v, _), T in zip(f.pieces, cum))
    s = q / p
    prev = 0.0
    terms = []
    for (v, _), T in zip(f.pieces, cum):
        terms.append(v**q * (T**s - prev**s))
        prev = T
    return ((p / q) * math.fsum(terms)) ** (1.0 / q)


def lorentz_norm_via_distribution(f: SimpleFunction, e: LorentzExponents) -> float:
    """Layer-cake form ``p^{1/q} (int t^{q-1} mu(t)^{q/p} dt)^{1/q}``, integrated over value levels."""
    p, q = e.p, e.q
    if is_inf(q):
        raise UnsupportedExponent("layer-cake form needs q < inf")
    if f.is_zero():
        return 0.0
    vals = f.values + [0.0]
    terms = []
    mu = 0.0
    for i, (_, m) in enumerate(f.pieces):
        mu += m
        # on [v_{i+1}, v_i) the distribution function equals the mass accumulated so far
        terms.append(mu ** (q / p) * (vals[i] ** q - vals[i + 1] ** q))
    return ((p / q) * math.fsum(terms)) ** (1.0 / q)


def lorentz_integral_window(f: SimpleFunction, e: LorentzExponents, t0: float, t1: float) -> float:
    """``int_{t0}^{t1} t^{q/p-1} f*(t)^q dt`` for finite q (no outer root)."""
    p, q = e.p, e.q
    if is_inf(q):
        raise UnsupportedExponent("window integral needs q < inf")
    if t1 <= t0:
        return 0.0
    s = q / p
    prev = 0.0
    terms = []
    for (v, _), T in zip(f.pieces, f.cumulative_masses):
        a, b = max(prev, t0), min(T, t1)
        if b > a:
            terms.append(v**q * (b**s - a**s))
        prev = T
        if prev >= t1:
            break
    return math.fsum(terms) / s


def window_sup(f: SimpleFunction, p: float, t0: float, t1: float) -> float:
    """``sup_{t0 <= t < t1} t^{1/p} f*(t)``."""
    best = 0.0
    prev = 0.0
    for (v, _), T in zip(f.pieces, f.cumulative_masses):
        a, b = max(prev, t0), min(T, t1)
        if b > a:
            best = max(best, v * b ** (1.0 / p))
        prev = T
    return best


def lp_norm(f: SimpleFunction, p: float) -> float:
    if f.is_zero():
        return 0.0
    if is_inf(p):
        return f.pieces[0][0]
    return math.fsum(v**p * m for v, m in f.pieces) ** (1.0 / p)


def dilate(f: SimpleFunction, a: float, b: float) -> SimpleFunction:
    """Scale values by ``a`` and masses by ``b``; the ``(p, q)`` norm scales by ``a * b**(1/p)``."""
    if not (a > 0 and b > 0):
        raise InvalidFactor(f"factors must be positive, got a={a}, b={b}")
    return SimpleFunction(tuple((a * v, b * m) for v, m in f.pieces))


def disjoint_sum(fs: Iterable[SimpleFunction]) -> SimpleFunction:
    return normalize(piece for f in fs for piece in f.pieces)


def indicator(mass: float, value: float = 1.0) -> SimpleFunction:
    return normalize([(value, mass)])


def indicator_norm(mass: float, e: LorentzExponents) -> float:
    """Closed form ``(p/q)^{1/q} a^{1/p}`` of the unit indicator of a set of measure ``a``."""
    if is_inf(e.q):
        return mass ** (1.0 / e.p)
    return (e.p / e.q) ** (1.0 / e.q) * mass ** (1.0 / e.p)
