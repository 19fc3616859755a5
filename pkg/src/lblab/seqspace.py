"""Truncated double sequence spaces ``l^q(l^p)``.

A double sequence is a plain 2-D numpy array: rows are the outer index
``j`` (levels), columns the inner index ``k`` (positions). Exponents below
one are supported everywhere; nothing here assumes convexity.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InadmissibleSpec, UnsupportedExponent, ZeroVector
from .simplefn import INF, is_inf

MAX_ROWS = 4096
MAX_COLS = 1 << 16


def as_double_sequence(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"double sequence must be a nonempty 2-D array, got shape {a.shape}")
    if a.shape[0] > MAX_ROWS or a.shape[1] > MAX_COLS:
        raise ValueError(f"window {a.shape} exceeds configured limits")
    if not np.all(np.isfinite(a)):
        raise ValueError("double sequence entries must be finite")
    return a


def _check_exponent(p: float) -> None:
    if not p > 0:
        raise UnsupportedExponent(f"exponent must lie in (0, inf], got {p}")


def lp(a: np.ndarray, p: float, axis=None) -> np.ndarray:
    """``l^p`` quasi-norm of ``|a|`` along ``axis``; scaled by the max entry to avoid under/overflow."""
    _check_exponent(p)
    a = np.abs(np.asarray(a, dtype=float))
    m = np.max(a, axis=axis, keepdims=True) if a.size else np.zeros(1)
    if is_inf(p):
        return np.squeeze(m, axis=axis) if axis is not None else float(np.max(a, initial=0.0))
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((a / safe) ** p, axis=axis, keepdims=True) ** (1.0 / p) * m
    return np.squeeze(s, axis=axis) if axis is not None else float(s.reshape(-1)[0])


def double_norm(x, p: float, q: float) -> float:
    """Inner ``l^p`` over each row, outer ``l^q`` over rows."""
    a = as_double_sequence(x)
    return float(lp(lp(a, p, axis=1), q))


def sup_norm(x) -> float:
    return float(np.max(np.abs(as_double_sequence(x))))


@dataclass(frozen=True)
class SeqEmbeddingSpec:
    """Embedding ``l^{q0}(l^{p0}) -> l^{q1}(l^{p1})``."""

    p0: float
    q0: float
    p1: float
    q1: float

    def __post_init__(self):
        for v in (self.p0, self.q0, self.p1, self.q1):
            _check_exponent(v)

    @property
    def admissible(self) -> bool:
        """Strict nesting ``p0 < p1`` and ``q0 < q1``, needed for the flat-vector bound."""
        return self.p0 < self.p1 and self.q0 < self.q1

    @property
    def theta(self) -> float:
        return max(_ratio(self.q0, self.q1), _ratio(self.p0, self.p1))

    @property
    def decay_exponent(self) -> float:
        return min(1.0 / self.p0, 1.0 / self.q0) * (1.0 - self.theta)

    def require_admissible(self) -> None:
        if not self.admissible:
            raise InadmissibleSpec(
                f"need p0 < p1 and q0 < q1, got ({self.p0},{self.q0}) -> ({self.p1},{self.q1})"
            )

    def to_json(self) -> str:
        return json.dumps({k: _enc(v) for k, v in asdict(self).items()}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SeqEmbeddingSpec":
        d = json.loads(text)
        return cls(**{k: _dec(d[k]) for k in ("p0", "q0", "p1", "q1")})


def _ratio(a: float, b: float) -> float:
    return 0.0 if is_inf(b) else a / b


def _enc(v: float):
    return "inf" if is_inf(v) else v


def _dec(v) -> float:
    return INF if v in ("inf", "Infinity") else float(v)


def holder_interpolation_gap(x, spec: SeqEmbeddingSpec) -> float:
    """RHS - LHS of ``|x|_{q1(p1)} <= |x|_{q0(p0)}^theta |x|_inf^(1-theta)``."""
    a = as_double_sequence(x)
    sup = sup_norm(a)
    if sup == 0:
        raise ZeroVector("Hoelder gap needs a nonzero vector")
    th = spec.theta
    lhs = double_norm(a, spec.p1, spec.q1)
    rhs = double_norm(a, spec.p0, spec.q0) ** th * sup ** (1.0 - th)
    return rhs - lhs


@dataclass(frozen=True)
class ConvolutionCheck:
    lhs: float
    rhs: float
    constant: float
    window: tuple[int, int]


def convolution_constant(delta: float, q: float) -> float:
    """``C(delta, q) = (sum_{m in Z} 2^{-delta |m| min(q,1)})^{1/min(q,1)}``."""
    t = 1.0 if is_inf(q) else min(q, 1.0)
    w = 2.0 ** (-delta * t)
    return ((1.0 + w) / (1.0 - w)) ** (1.0 / t)


def discrete_convolution_bound_check(alpha, delta: float, q: float) -> ConvolutionCheck:
    """Compare ``|2^{-delta|.|} * alpha|_q`` over all of Z against ``C(delta,q) |alpha|_q``.

    ``alpha`` is indexed ``0..N-1`` and zero elsewhere. Inside the hull of its
    support the convolution is summed directly; outside, it decays exactly
    geometrically from the hull endpoints and the tails are summed in closed form.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    _check_exponent(q)
    a = np.asarray(alpha, dtype=float).ravel()
    C = convolution_constant(delta, q)
    nz = np.flatnonzero(a)
    if nz.size == 0:
        return ConvolutionCheck(0.0, 0.0, C, (0, 0))
    lo, hi = int(nz[0]), int(nz[-1])
    idx = np.arange(lo, hi + 1)
    kern = 2.0 ** (-delta * np.abs(idx[:, None] - idx[None, :]))
    conv = np.abs(kern @ a[lo : hi + 1])
    rhs = C * lp(a, q)
    if is_inf(q):
        return ConvolutionCheck(float(conv.max()), rhs, C, (lo, hi))
    w = 2.0 ** (-delta * q)
    tail = (conv[0] ** q + conv[-1] ** q) * w / (1.0 - w)
    lhs = (math.fsum(conv**q) + tail) ** (1.0 / q)
    return ConvolutionCheck(lhs, rhs, C, (lo, hi))


def to_csv(x) -> str:
    a = as_double_sequence(x)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "k", "value"])
    for (j, k), v in np.ndenumerate(a):
        w.writerow([j, k, repr(float(v))])
    return buf.getvalue()


def from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.DictReader(io.StringIO(text))]
    J = max(int(r["j"]) for r in rows) + 1
    K = max(int(r["k"]) for r in rows) + 1
    a = np.zeros((J, K))
    for r in rows:
        a[int(r["j"]), int(r["k"])] = float(r["value"])
    return a
