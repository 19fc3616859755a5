"""Exponent bookkeeping, bound records and numerical max-min estimates of Bernstein numbers."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InadmissibleDelta, InadmissibleSpec, InvalidPoint
from .plichko import SubspaceBasis, certify_subspace, plichko_upper_bound
from .seqspace import SeqEmbeddingSpec, lp
from .simplefn import INF, is_inf

KINDS = ("certified-lower", "certified-upper", "heuristic")


def worker_count() -> int:
    try:
        cap = int(os.environ.get("LBLAB_THREADS", "0"))
    except ValueError:
        cap = 0
    n = os.cpu_count() or 1
    return max(1, min(cap, n) if cap > 0 else n)


@dataclass(frozen=True)
class SobolevSpec:
    """Parameters of ``W_0^m L^{p,q} -> L^{p*,r}`` in dimension ``d``."""

    d: int
    m: int
    p: float
    q: float
    r: float

    @property
    def pstar(self) -> float:
        return self.d * self.p / (self.d - self.m * self.p)

    def violations(self, strict: bool = True) -> list[str]:
        out = []
        if self.d < 1 or self.m < 1 or int(self.d) != self.d or int(self.m) != self.m:
            out.append("d and m must be positive integers")
        if self.m > self.d:
            out.append("m must not exceed d")
        if self.p < 1:
            out.append("p must be >= 1")
        if self.m * self.p >= self.d:
            out.append("p must be < d/m")
        if not self.q > 0 or not self.r > 0:
            out.append("q and r must be positive")
        if strict and not self.q < self.r:
            out.append("q < r required")
        if not strict and not self.q <= self.r:
            out.append("q <= r required")
        if self.p == 1 and self.q != 1:
            out.append("p=1 requires q=1")
        return out

    def validate(self, strict: bool = True) -> "SobolevSpec":
        v = self.violations(strict)
        if v:
            raise InadmissibleSpec("; ".join(v))
        return self

    @property
    def sharp_regime(self) -> bool:
        return self.p < self.q < self.r < self.pstar

    @classmethod
    def parse(cls, text: str) -> "SobolevSpec":
        d, m, p, q, r = (s.strip() for s in text.split(","))
        return cls(int(d), int(m), float(p), _exp(q), _exp(r))

    def as_dict(self) -> dict:
        return {k: ("inf" if isinstance(v, float) and is_inf(v) else v) for k, v in asdict(self).items()}


def _exp(s: str) -> float:
    return INF if s.lower() in ("inf", "infinity", "oo") else float(s)


def _inv(x: float) -> float:
    return 0.0 if is_inf(x) else 1.0 / x


@dataclass(frozen=True)
class ExponentReport:
    value: float
    limit: float
    sharp: float | None
    sharp_threshold: float | None


def main_exponent(spec: SobolevSpec, eps: float) -> ExponentReport:
    """Decay exponent ``min(1/(p+eps), 1/q) (1 - max(q/r, p/p* + eps))`` of the upper bound."""
    spec.validate(strict=False)
    if not eps > 0:
        raise InadmissibleSpec("eps must be positive")
    p, q, ps = spec.p, spec.q, spec.pstar
    qr = q * _inv(spec.r)
    if p / ps + eps >= 1:
        raise InadmissibleSpec(f"eps too large: p/p* + eps = {p / ps + eps} >= 1")
    value = min(1.0 / (p + eps), 1.0 / q) * (1.0 - max(qr, p / ps + eps))
    limit = min(1.0 / p, 1.0 / q) * (1.0 - max(qr, p / ps))
    sharp = threshold = None
    if spec.sharp_regime:
        sharp = 1.0 / q - _inv(spec.r)
        threshold = min(q - p, qr - p / ps)
    return ExponentReport(value, limit, sharp, threshold)


def delta_exponent(spec: SobolevSpec, delta: float) -> float:
    """Exponent of the sequence-space bound for ``l^q(l^{p+delta}) -> l^r(l^{p*-delta})``."""
    src, tgt = factorization_exponents(spec, delta)
    return SeqEmbeddingSpec(src.p, src.q, tgt.p, tgt.q).decay_exponent


@dataclass(frozen=True)
class BesovTriple:
    p: float
    q: float
    s: float


def factorization_exponents(spec: SobolevSpec, delta: float) -> tuple[BesovTriple, BesovTriple]:
    """Besov parameters of the two intermediate spaces for a perturbation ``delta``.

    Source ``(p+delta, q, m - d delta/(p(p+delta)))``; target
    ``(p*-delta, r, d delta/(p*(p*-delta)))``. Both sit on the same
    differential-dimension line: ``s0 - s1 = d/(p+delta) - d/(p*-delta)``.
    """
    spec.validate(strict=False)
    d, m, p, ps = spec.d, spec.m, spec.p, spec.pstar
    if not 0 <= delta < (ps - p) / 2:
        raise InadmissibleDelta(f"need 0 <= delta < (p*-p)/2 = {(ps - p) / 2}, got {delta}")
    src = BesovTriple(p + delta, spec.q, m - d * delta / (p * (p + delta)))
    tgt = BesovTriple(ps - delta, spec.r, d * delta / (ps * (ps - delta)))
    return src, tgt


def delta_for_eps(spec: SobolevSpec, eps: float) -> float:
    """Largest delta on a halving ladder with ``delta < eps`` and ``(p+delta)/(p*-delta) < p/p* + eps``."""
    p, ps = spec.p, spec.pstar
    delta = min(eps, (ps - p) / 2) / 2
    while (p + delta) / (ps - delta) >= p / ps + eps:
        delta /= 2
    return delta


# ---------------------------------------------------------------------------
# Bound records


@dataclass
class BoundRecord:
    n: int
    kind: str
    lo: float
    hi: float
    provenance: str
    witness: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.lo > self.hi:
            raise ValueError("lo must not exceed hi")

    @property
    def certified(self) -> bool:
        return self.kind != "heuristic"


def envelope(records: list[BoundRecord]) -> list[BoundRecord]:
    """Monotone envelope of a single-kind series, using that ``b_n`` is nonincreasing in ``n``.

    A lower bound for ``b_m`` is one for every ``b_n`` with ``n <= m`` (running max
    from the right); an upper bound for ``b_m`` is one for every ``b_n`` with
    ``n >= m`` (running min from the left). Presentation only.
    """
    kinds = {r.kind for r in records}
    if len(kinds) > 1:
        raise ValueError("envelope of a mixed series")
    recs = sorted(records, key=lambda r: r.n)
    out = [BoundRecord(r.n, r.kind, r.lo, r.hi, r.provenance, dict(r.witness)) for r in recs]
    if not out:
        return out
    if out[0].kind == "certified-upper":
        for a, b in zip(out, out[1:]):
            b.lo = b.hi = min(b.hi, a.hi)
    else:
        for a, b in zip(reversed(out[1:]), reversed(out[:-1])):
            b.lo = max(b.lo, a.lo)
            b.hi = max(b.hi, b.lo)
    return out


# ---------------------------------------------------------------------------
# Numerical max-min over candidate subspaces


def _dnorm(x: np.ndarray, p: float, q: float) -> float:
    return float(lp(lp(x, p, axis=1), q))


def candidate_subspaces(n: int, window: tuple[int, int], rng_seed: int, randoms: int = 2) -> list[tuple[str, np.ndarray]]:
    """Fixed zoo of n-dimensional subspaces of the ``J x K`` window."""
    J, K = window
    out = []
    if K >= n:
        v = np.zeros((n, J, K))
        for i in range(n):
            v[i, 0, i] = 1.0
        out.append(("row-block", v))
    if J >= n:
        v = np.zeros((n, J, K))
        for i in range(n):
            v[i, i, 0] = 1.0
        out.append(("spread-block", v))
        v = np.zeros((n, J, K))
        for i in range(n):
            v[i, i, :] = 1.0
        out.append(("flat-rows", v))
    if J * K >= n and K < n:
        v = np.zeros((n, J, K))
        for i in range(n):
            v[i, i // K, i % K] = 1.0
        out.append(("row-major-block", v))
    if J * K >= n and J < n:
        v = np.zeros((n, J, K))
        for i in range(n):
            v[i, i % J, i // J] = 1.0
        out.append(("column-major-block", v))
    for s in range(randoms):
        rng = np.random.default_rng([rng_seed, n, s])
        g = rng.standard_normal((J * K, n))
        qmat, _ = np.linalg.qr(g)
        out.append((f"random-{s}", qmat.T.reshape(n, J, K)))
    return out


def subspace_inf_ratio(
    basis: SubspaceBasis, spec: SeqEmbeddingSpec, starts: int = 3, maxfev: int = 400, seed: int = 0
) -> tuple[float, np.ndarray]:
    """Best found ``min |x|_target / |x|_source`` over the span, by multistart Powell descent.

    The flat witness is always a start, so when the flat-vector bound applies
    the result never exceeds it.
    """
    V = basis.vectors
    n = basis.n

    def ratio(c: np.ndarray) -> float:
        x = np.tensordot(c, V, axes=1)
        s = _dnorm(x, spec.p0, spec.q0)
        return _dnorm(x, spec.p1, spec.q1) / s if s > 0 else INF

    inits = []
    if spec.admissible:
        inits.append(certify_subspace(basis, spec).witness.coefficients)
    else:
        inits.append(np.eye(n)[0])
    for s in range(starts):
        inits.append(np.random.default_rng([seed, s]).standard_normal(n))

    def run(c0: np.ndarray) -> tuple[float, np.ndarray]:
        f0 = ratio(c0)
        if n == 1:
            return f0, c0
        res = minimize(ratio, c0, method="Powell", options={"maxfev": maxfev, "xtol": 1e-10, "ftol": 1e-14})
        return (float(res.fun), res.x) if res.fun < f0 else (f0, c0)

    with ThreadPoolExecutor(max_workers=worker_count()) as ex:
        results = list(ex.map(run, inits))
    return min(results, key=lambda t: t[0])


def heuristic_bn_lower(
    spec: SeqEmbeddingSpec,
    n: int,
    window: tuple[int, int] = (8, 8),
    budget: int = 400,
    seed: int = 0,
    randoms: int = 2,
) -> BoundRecord:
    """Max over the candidate zoo of the (estimated) infimum ratio on each subspace."""
    best = (-1.0, "", None)
    per = {}
    for tag, vecs in candidate_subspaces(n, window, seed, randoms):
        val, _ = subspace_inf_ratio(SubspaceBasis(vecs), spec, maxfev=budget, seed=seed)
        per[tag] = val
        if val > best[0]:
            best = (val, tag, vecs)
    return BoundRecord(n, "heuristic", best[0], best[0], f"maxmin:{best[1]}", {"candidates": per})


def plichko_record(n: int, spec: SeqEmbeddingSpec) -> BoundRecord:
    b = plichko_upper_bound(n, spec)
    return BoundRecord(n, "certified-upper", b, b, "plichko-flat-vector", {"exponent": spec.decay_exponent})


def slope_fit(points) -> tuple[float, float, float]:
    """Least-squares line through ``(log n, log value)``; returns slope, intercept, max |residual|."""
    pts = list(points)
    if len(pts) < 3:
        raise InvalidPoint("need at least 3 points")
    for n, v in pts:
        if not (v > 0 and n > 0):
            raise InvalidPoint(f"points must be positive, got ({n}, {v})")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))
