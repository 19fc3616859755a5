"""Extremal objects behind the Bernstein lower bounds.

Two constructions live here:

* the dyadic staircase ``f_alpha = sum_j alpha_j 2^{j/p} 1_[2^-j, 2^{1-j})`` on the
  half line, with the regularised majorant ``beta``, realising ``l^q`` inside
  ``L^{p,q}`` with explicit two-sided constants;
* the disjoint family of dilated pyramid bumps in the plane,
  ``u_j(x) = 2^{2j/p*} u(2^j (x - x_j))``, whose span gives certified lower
  bounds ``c n^{1/r - 1/q}`` for the Sobolev-Lorentz embedding.

A coefficient sequence lives on a window ``start .. start+len-1`` of Z and is
zero to the left of it. To the right it is zero too, unless ``tail_p`` is set:
then it continues as ``values[-1] * 2^{-(j - last)/tail_p}``. Regularised
sequences carry this tail; without it no finitely supported nonzero sequence
is p-decreasing, and the staircase of a p-decreasing sequence would not be
its own rearrangement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import InadmissibleSpec, PreconditionViolated, ZeroVector
from .seqspace import convolution_constant, lp
from .simplefn import (
    INF,
    LorentzExponents,
    SimpleFunction,
    dilate,
    disjoint_sum,
    is_inf,
    lorentz_integral_window,
    lorentz_norm,
    normalize,
    window_sup,
)

PROXY_LEVELS = 32


@dataclass(frozen=True)
class CoeffSequence:
    values: tuple[float, ...]
    start: int = 0
    tail_p: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("coefficients must be finite")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def indices(self) -> range:
        return range(self.start, self.start + len(self.values))

    def is_zero(self) -> bool:
        return not any(self.values)

    def shifted(self, m: int = 1) -> "CoeffSequence":
        """``tau_m``: the sequence ``j -> a_{j-m}``."""
        return CoeffSequence(self.values, self.start + m, self.tail_p)

    def lq_norm(self, q: float) -> float:
        """``l^q(Z)`` quasi-norm, geometric tail included."""
        a = np.abs(np.asarray(self.values))
        if a.size == 0:
            return 0.0
        if is_inf(q):
            return float(a.max())
        s = math.fsum(a**q)
        if self.tail_p is not None:
            w = 2.0 ** (-q / self.tail_p)
            s += a[-1] ** q * w / (1.0 - w)
        return s ** (1.0 / q)


def beta_regularize(alpha: CoeffSequence, p: float) -> CoeffSequence:
    """``beta_j = sup_{k <= j} 2^{(k-j)/p} |alpha_k|``; the result carries its p-tail."""
    if not p > 0:
        raise ValueError("p must be positive")
    if alpha.tail_p is not None and alpha.tail_p != p:
        raise PreconditionViolated("cannot regularise a sequence with a different tail exponent")
    w = 2.0 ** (-1.0 / p)
    out = []
    prev = 0.0
    for a in alpha.values:
        prev = max(abs(a), w * prev)
        out.append(prev)
    return CoeffSequence(tuple(out), alpha.start, p)


def is_p_decreasing(beta: CoeffSequence, p: float, rtol: float = 1e-12) -> bool:
    """Nonnegative with ``j -> 2^{j/p} beta_j`` nondecreasing on all of Z."""
    v = np.asarray(beta.values)
    if v.size == 0:
        return True
    if np.any(v < 0):
        return False
    # scale by 2^{(j-start)/p}; the common factor 2^{start/p} does not affect monotonicity
    g = v * 2.0 ** (np.arange(v.size) / p)
    if np.any(np.diff(g) < -rtol * np.maximum(g[1:], g[:-1])):
        return False
    if v[-1] == 0:
        return True
    return beta.tail_p == p


def staircase(alpha: CoeffSequence, p: float) -> SimpleFunction:
    """Distribution of ``f_alpha``: pieces ``(|alpha_j| 2^{j/p}, 2^{-j})``."""
    pieces = [(abs(a) * 2.0 ** (j / p), 2.0 ** (-j)) for j, a in zip(alpha.indices, alpha.values) if a != 0]
    if alpha.tail_p is not None and alpha.values and alpha.values[-1] != 0:
        if alpha.tail_p != p:
            raise PreconditionViolated("staircase of a tail needs tail_p == p")
        J = alpha.start + len(alpha) - 1
        # the tail pieces j > J all share the value of piece J; their masses sum to 2^{-J}
        pieces.append((abs(alpha.values[-1]) * 2.0 ** (J / p), 2.0 ** (-J)))
    return normalize(pieces)


def staircase_constant(p: float, q: float) -> float:
    """``((p/q)(2^{q/p} - 1))^{1/q}``, the norm of ``f_beta`` per unit ``|beta|_q`` for p-decreasing beta."""
    if is_inf(q):
        return 2.0 ** (1.0 / p)
    return ((p / q) * (2.0 ** (q / p) - 1.0)) ** (1.0 / q)


def staircase_norm_exact_decreasing(beta: CoeffSequence, p: float, q: float) -> float:
    if not is_p_decreasing(beta, p):
        raise PreconditionViolated("beta must be nonnegative and p-decreasing on Z (carry its p-tail)")
    return staircase_constant(p, q) * beta.lq_norm(q)


@dataclass(frozen=True)
class EquivalenceReport:
    norm_f: float
    lq: float
    ratio: float
    lower_const: float
    upper_const: float
    tight_lower: float
    tight_upper: float

    @property
    def within_derived(self) -> bool:
        return self.lower_const * (1 - 1e-12) <= self.ratio <= self.upper_const * (1 + 1e-12)

    @property
    def within_tight(self) -> bool:
        return self.tight_lower * (1 - 1e-12) <= self.ratio <= self.tight_upper * (1 + 1e-12)


def lorentzsum_constants(p: float, q: float) -> tuple[float, float, float]:
    """Return ``(C, tight_lower, tight_upper)`` for ``|f_alpha|_{p,q} / |alpha|_q``.

    ``C = 2^{1/p} K C_conv(1/p, q)`` chains the regularisation, the exact
    decreasing norm and the convolution estimate; the tight pair is
    ``[2^{-1/p} K, K (1 - 2^{-q/p})^{-1/q}]`` where the upper side replaces the
    convolution estimate by the bound ``max <= sum`` along each tail.
    """
    K = staircase_constant(p, q)
    C = 2.0 ** (1.0 / p) * K * convolution_constant(1.0 / p, q)
    tail = 1.0 if is_inf(q) else (1.0 - 2.0 ** (-q / p)) ** (-1.0 / q)
    return C, K * 2.0 ** (-1.0 / p), K * tail


def lorentzsum_equivalence_report(alpha: CoeffSequence, p: float, q: float) -> EquivalenceReport:
    if alpha.is_zero():
        raise ZeroVector("alpha must be nonzero")
    norm_f = lorentz_norm(staircase(alpha, p), LorentzExponents(p, q))
    lq = alpha.lq_norm(q)
    C, lo, hi = lorentzsum_constants(p, q)
    return EquivalenceReport(norm_f, lq, norm_f / lq, 1.0 / C, C, lo, hi)


# ---------------------------------------------------------------------------
# Dilated bump family in the plane


@dataclass(frozen=True)
class BumpFamily:
    rho: float
    height: float
    levels: int
    profile_grad: SimpleFunction
    profile_value_lower: SimpleFunction
    profile_value_upper: SimpleFunction
    d: int = 2
    m: int = 1
    n: int | None = None

    @property
    def support_area(self) -> float:
        return (2.0 * self.rho) ** self.d

    def descriptor(self) -> dict:
        return {
            "profile": "pyramid",
            "d": self.d,
            "m": self.m,
            "rho": self.rho,
            "height": self.height,
            "levels": self.levels,
            "n": self.n,
        }


def pyramid_level_area(t: float, rho: float, height: float) -> float:
    """Area of ``{u > t}`` for ``u(x) = h max(0, 1 - max(|x1|,|x2|)/rho)``."""
    if t <= 0:
        return 4.0 * rho * rho
    if t >= height:
        return 0.0
    return 4.0 * rho * rho * (1.0 - t / height) ** 2


def pyramid_profile(rho: float, height: float, levels: int) -> BumpFamily:
    """Pyramid on the sup-norm ball of radius ``rho``.

    ``|grad u| = h/rho`` almost everywhere on the support, so the gradient
    distribution is exact. The value distribution is sandwiched between the
    floor and ceiling quantisations at thresholds ``i h / L``.
    """
    if not (rho > 0 and height > 0) or levels < 1:
        raise ValueError("rho, height must be positive and levels >= 1")
    grad = normalize([(height / rho, 4.0 * rho * rho)])
    t = [i * height / levels for i in range(levels + 1)]
    bands = [pyramid_level_area(t[i], rho, height) - pyramid_level_area(t[i + 1], rho, height) for i in range(levels)]
    lower = normalize([(t[i], bands[i]) for i in range(levels) if bands[i] > 0])
    upper = normalize([(t[i + 1], bands[i]) for i in range(levels) if bands[i] > 0])
    return BumpFamily(rho, height, levels, grad, lower, upper)


def check_sobolev_exponents(p: float, q: float, r: float, pstar: float, d: int = 2, m: int = 1) -> None:
    expected = 1.0 / p - m / d
    if not expected > 0:
        raise InadmissibleSpec(f"need p < d/m, got p={p}, d={d}, m={m}")
    if abs(1.0 / pstar - expected) > 1e-12:
        raise InadmissibleSpec(f"p* must satisfy 1/p* = 1/p - m/d; got p*={pstar}, expected {1.0 / expected}")
    if p < 1:
        raise InadmissibleSpec(f"need p >= 1, got {p}")
    if p == 1 and q > 1:
        raise InadmissibleSpec("p=1 requires q<=1")
    if not (q > 0 and r > 0):
        raise InadmissibleSpec("q and r must be positive")


def grad_scale(j: int, pstar: float, d: int = 2) -> tuple[float, float]:
    """Value and mass factors taking ``|grad u|`` to ``|grad u_j|``."""
    return 2.0 ** (j * (d / pstar + 1.0)), 2.0 ** (-j * d)


def value_scale(j: int, pstar: float, d: int = 2) -> tuple[float, float]:
    return 2.0 ** (j * d / pstar), 2.0 ** (-j * d)


@dataclass(frozen=True)
class BumpNorms:
    grad_norm: float
    value_lo: float
    value_hi: float


def bump_norms(family: BumpFamily, p: float, q: float, r: float, pstar: float, j: int = 0) -> BumpNorms:
    check_sobolev_exponents(p, q, r, pstar, family.d, family.m)
    a, b = grad_scale(j, pstar, family.d)
    grad = lorentz_norm(dilate(family.profile_grad, a, b), LorentzExponents(p, q))
    a, b = value_scale(j, pstar, family.d)
    tgt = LorentzExponents(pstar, r)
    lo = lorentz_norm(dilate(family.profile_value_lower, a, b), tgt) if not family.profile_value_lower.is_zero() else 0.0
    hi = lorentz_norm(dilate(family.profile_value_upper, a, b), tgt)
    return BumpNorms(grad, lo, hi)


class _Pieces:
    """Per-bump (value, mass) arrays for fast norms of ``sum_j alpha_j u_j``."""

    def __init__(self, profile: SimpleFunction, n: int, pstar: float, d: int, grad: bool):
        vals, masses, owner = [], [], []
        scale = grad_scale if grad else value_scale
        for j in range(n):
            a, b = scale(j, pstar, d)
            for v, mass in profile.pieces:
                vals.append(a * v)
                masses.append(b * mass)
                owner.append(j)
        self.values = np.array(vals)
        self.masses = np.array(masses)
        self.owner = np.array(owner, dtype=int)

    def norm(self, alpha: np.ndarray, p: float, q: float) -> float:
        if self.values.size == 0:
            return 0.0
        return lorentz_norm_arrays(np.abs(alpha)[self.owner] * self.values, self.masses, p, q)


def lorentz_norm_arrays(values: np.ndarray, masses: np.ndarray, p: float, q: float) -> float:
    """Vectorised ``lorentz_norm`` for unsorted, unmerged pieces."""
    keep = values > 0
    v, m = values[keep], masses[keep]
    if v.size == 0:
        return 0.0
    order = np.argsort(-v, kind="stable")
    v, T = v[order], np.cumsum(m[order])
    if is_inf(q):
        return float(np.max(v * T ** (1.0 / p)))
    s = q / p
    Ts = T**s
    inc = np.diff(Ts, prepend=0.0)
    return float(((p / q) * np.sum(v**q * inc)) ** (1.0 / q))


@dataclass
class CertifiedBound:
    n: int
    lo: float
    hi: float
    constant: float
    tag: str = "pyramid-bumps"
    flagged: bool = False
    single_bump: tuple[float, float] = (0.0, 0.0)
    source_constant: float = 0.0
    target_constant: float = 0.0
    zeroth_order_ratio: float = 0.0
    witness: list[float] = field(default_factory=list)

    @property
    def predicted(self) -> float:
        return self.lo


def source_upper_constant(family: BumpFamily, p: float, q: float) -> float:
    """``C_S`` with ``|grad sum alpha_j u_j|_{p,q} <= C_S |alpha|_q``.

    With ``B = 2^d`` the gradient pieces are ``(v0 B^{j/p} |alpha_j|, A B^{-j})``.
    Laid out on ``[c B^{-j}, c B^{1-j})``, ``c = A/(B-1)``, the staircase of the
    regularised majorant is decreasing, with norm
    ``v0 c^{1/p} ((p/q)(B^{q/p}-1))^{1/q} |beta|_q``; and
    ``|beta|_q <= (1 - B^{-q/p})^{-1/q} |alpha|_q`` (sup bounded by sum).
    """
    if len(family.profile_grad.pieces) != 1:
        raise PreconditionViolated("source constant needs a single-piece gradient profile")
    (v0, A), = family.profile_grad.pieces
    B = 2.0**family.d
    c = A / (B - 1.0)
    if is_inf(q):
        return v0 * c ** (1.0 / p) * B ** (1.0 / p)
    K = v0 * c ** (1.0 / p) * ((p / q) * (B ** (q / p) - 1.0)) ** (1.0 / q)
    return K * (1.0 - B ** (-q / p)) ** (-1.0 / q)


def target_lower_constant(family: BumpFamily, r: float, pstar: float, grid: int = 64) -> float:
    """``c_T`` with ``|sum alpha_j u_j|_{p*,r} >= c_T |alpha|_r``.

    The rearrangement of the sum dominates each ``u_k*``; restricting the norm
    integral for bump ``k`` to ``[s B^{-k-1}, s B^{-k})`` and rescaling gives
    ``c_T^r = int_{s/B}^{s} t^{r/p* - 1} g*(t)^r dt`` with ``g`` the lower
    staircase of the profile. The shift ``s`` is maximised over a fixed grid.
    """
    g = family.profile_value_lower
    if g.is_zero():
        return 0.0
    A = g.total_mass
    B = 2.0**family.d
    shifts = [A * B ** (-i / grid) for i in range(grid)]
    if is_inf(r):
        return max(window_sup(g, pstar, s / B, s) for s in shifts)
    e = LorentzExponents(pstar, r)
    return max(lorentz_integral_window(g, e, s / B, s) for s in shifts) ** (1.0 / r)


def _upper_ratio_fn(family: BumpFamily, n: int, p: float, q: float, r: float, pstar: float):
    grad = _Pieces(family.profile_grad, n, pstar, family.d, grad=True)
    up = _Pieces(family.profile_value_upper, n, pstar, family.d, grad=False)

    def ratio(alpha: np.ndarray) -> float:
        s = grad.norm(alpha, p, q)
        return up.norm(alpha, pstar, r) / s if s > 0 else INF

    return ratio


@lru_cache(maxsize=256)
def _candidate_alphas(n: int, p: float, q: float, r: float, pstar: float, rho: float, height: float, budget: int):
    """Trial coefficient vectors, chosen independently of the sandwich resolution.

    Returns ``(candidates, converged)``.
    """
    cands = [np.eye(n)[0], np.ones(n)]
    if n == 1:
        return tuple(cands), True
    proxy = pyramid_profile(rho, height, PROXY_LEVELS)
    ratio = _upper_ratio_fn(proxy, n, p, q, r, pstar)
    converged = True
    # the objective is homogeneous of degree 0; square the parameters to stay in the positive cone
    starts = [np.ones(n), 2.0 ** (-np.arange(n) / max(q, 1.0)), 2.0 ** (np.arange(n) / n)]
    for z0 in starts:
        res = minimize(
            lambda z: ratio(z * z),
            np.sqrt(z0 / np.linalg.norm(z0)),
            method="L-BFGS-B",
            options={"maxiter": budget, "maxfun": budget * (n + 1) * 2},
        )
        converged = converged and bool(res.success)
        z = res.x * res.x
        if np.any(z > 0):
            cands.append(z / np.max(z))
    return tuple(cands), converged


def sobolev_lower_bound(
    n: int, family: BumpFamily, p: float, q: float, r: float, pstar: float, budget: int = 200
) -> CertifiedBound:
    """Certified interval for ``inf_{f in V_n} |f|_{L^{p*,r}} / |grad f|_{L^{p,q}}``.

    ``V_n`` spans the first ``n`` bumps. ``lo = (c_T / C_S) n^{1/r - 1/q}`` is a
    rigorous lower bound: ``|f| >= c_T |alpha|_r``, ``|grad f| <= C_S |alpha|_q``
    and ``|alpha|_r >= n^{1/r-1/q} |alpha|_q``. ``hi`` is the smallest upper
    sandwich ratio over a fixed set of trial coefficients, so it bounds the
    infimum from above. Both are valid bounds for the gradient seminorm.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if q > r:
        raise InadmissibleSpec(f"need q <= r, got q={q}, r={r}")
    check_sobolev_exponents(p, q, r, pstar, family.d, family.m)
    cS = source_upper_constant(family, p, q)
    cT = target_lower_constant(family, r, pstar)
    c = cT / cS
    decay = (0.0 if is_inf(r) else 1.0 / r) - 1.0 / q
    lo = c * float(n) ** decay
    single = bump_norms(family, p, q, r, pstar)
    cands, converged = _candidate_alphas(n, p, q, r, pstar, family.rho, family.height, budget)
    ratio = _upper_ratio_fn(family, n, p, q, r, pstar)
    vals = [ratio(a) for a in cands]
    best = int(np.argmin(vals))
    zeroth = lorentz_norm(family.profile_value_upper, LorentzExponents(p, q)) / single.grad_norm
    return CertifiedBound(
        n=n,
        lo=lo,
        hi=float(vals[best]),
        constant=c,
        flagged=not converged,
        single_bump=(single.value_lo / single.grad_norm, single.value_hi / single.grad_norm),
        source_constant=cS,
        target_constant=cT,
        zeroth_order_ratio=zeroth,
        witness=[float(v) for v in cands[best]],
    )


def sobolev_lower_series(
    nmax: int, p: float, q: float, r: float, levels: int = 64, rho: float = 1.0, height: float = 1.0, budget: int = 200
) -> list[CertifiedBound]:
    pstar = 1.0 / (1.0 / p - 0.5)
    fam = pyramid_profile(rho, height, levels)
    return [sobolev_lower_bound(n, fam, p, q, r, pstar, budget) for n in range(1, nmax + 1)]
