"""Desk-scale wavelet bridge from grid functions to ``l^q(l^p)``.

Samples on a ``2^J``-per-axis grid of the unit cube are read as a piecewise
constant function. Its orthonormal Haar coefficients are stacked into a
double sequence: row 0 holds the single scaling coefficient, row ``j >= 1``
holds the details of Haar level ``j-1`` (positions flattened, orientation
fastest), zero padded to a common width.

Haar wavelets only characterise Besov spaces for small smoothness, so the
weighted sequence norms here are proxies. No equivalence with the
Littlewood-Paley definition is claimed; see ``WEIGHT_CONVENTION``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bernstein import SobolevSpec, factorization_exponents
from .seqspace import double_norm, lp

WEIGHT_CONVENTION = {
    "basis": "orthonormal Haar on [0,1]^d",
    "rows": "row 0 = scaling coefficient, row j >= 1 = Haar level j-1 details",
    "weight": "row j scaled by 2^(j (s + d/2 - d/p))",
    "equivalence": "not claimed against the Littlewood-Paley Besov norm; Haar is reliable only for |s| < 1",
}

_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class DyadicGrid:
    samples: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=float)
        if a.ndim not in (1, 2):
            raise ValueError("only d = 1 or d = 2 grids are supported")
        side = a.shape[0]
        if side < 1 or side & (side - 1) or any(s != side for s in a.shape):
            raise ValueError(f"grid sides must be equal powers of two, got {a.shape}")
        object.__setattr__(self, "samples", a)

    @property
    def d(self) -> int:
        return self.samples.ndim

    @property
    def levels(self) -> int:
        return self.samples.shape[0].bit_length() - 1

    def l2_norm(self) -> float:
        return float(np.sqrt(np.mean(self.samples**2)))

    @classmethod
    def from_function(cls, fn, d: int, levels: int) -> "DyadicGrid":
        """Sample ``fn`` at cell centres."""
        n = 1 << levels
        c = (np.arange(n) + 0.5) / n
        if d == 1:
            return cls(fn(c))
        x1, x2 = np.meshgrid(c, c, indexing="ij")
        return cls(fn(x1, x2))


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float
    q: float
    d: int

    def __post_init__(self):
        if abs(self.s) >= 1:
            warnings.warn(f"Haar proxy used outside |s| < 1 (s={self.s})", stacklevel=2)


def _split_1d(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = c[0::2], c[1::2]
    return (a + b) / _SQ2, (a - b) / _SQ2


def _merge_1d(s: np.ndarray, w: np.ndarray) -> np.ndarray:
    out = np.empty(2 * s.size)
    out[0::2] = (s + w) / _SQ2
    out[1::2] = (s - w) / _SQ2
    return out


def _split_2d(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = c[0::2, 0::2], c[0::2, 1::2]
    e, f = c[1::2, 0::2], c[1::2, 1::2]
    s = (a + b + e + f) / 2
    details = np.stack([(a - b + e - f) / 2, (a + b - e - f) / 2, (a - b - e + f) / 2], axis=-1)
    return s, details.reshape(-1)


def _merge_2d(s: np.ndarray, w: np.ndarray) -> np.ndarray:
    h1, h2, h3 = np.moveaxis(w.reshape(s.shape + (3,)), -1, 0)
    out = np.empty((2 * s.shape[0], 2 * s.shape[1]))
    out[0::2, 0::2] = (s + h1 + h2 + h3) / 2
    out[0::2, 1::2] = (s - h1 + h2 - h3) / 2
    out[1::2, 0::2] = (s + h1 - h2 - h3) / 2
    out[1::2, 1::2] = (s - h1 - h2 + h3) / 2
    return out


def haar_transform(grid: DyadicGrid) -> np.ndarray:
    d, J = grid.d, grid.levels
    # coefficients of the finest scaling functions 2^{Jd/2} 1_cell
    c = grid.samples * 2.0 ** (-J * d / 2)
    split = _split_1d if d == 1 else _split_2d
    rows: list[np.ndarray] = []
    for _ in range(J):
        c, w = split(c)
        rows.append(w)
    rows.append(np.ravel(c))
    rows.reverse()
    K = max(r.size for r in rows)
    out = np.zeros((J + 1, K))
    for j, r in enumerate(rows):
        out[j, : r.size] = r
    return out


def inverse_haar_transform(coeffs: np.ndarray, d: int) -> DyadicGrid:
    coeffs = np.asarray(coeffs, dtype=float)
    J = coeffs.shape[0] - 1
    merge = _merge_1d if d == 1 else _merge_2d
    c = coeffs[0, :1].reshape((1,) * d)
    for lev in range(J):
        size = (2**d - 1) * 2 ** (lev * d)
        w = coeffs[lev + 1, :size]
        c = merge(c if d == 2 else c.ravel(), w)
    return DyadicGrid(c * 2.0 ** (J * d / 2))


def besov_weights(rows: int, bp: BesovParams) -> np.ndarray:
    return 2.0 ** (np.arange(rows) * (bp.s + bp.d / 2 - (0.0 if math.isinf(bp.p) else bp.d / bp.p)))


def besov_seq_norm(coeffs: np.ndarray, bp: BesovParams) -> float:
    a = np.asarray(coeffs, dtype=float)
    return float(lp(besov_weights(a.shape[0], bp) * lp(a, bp.p, axis=1), bp.q))


def _pyramid(center: float, width: float):
    return lambda x: np.maximum(0.0, 1.0 - np.abs(x - center) / width)


def _pyramid2(cx: float, cy: float, width: float):
    return lambda x, y: np.maximum(0.0, 1.0 - np.maximum(np.abs(x - cx), np.abs(y - cy)) / width)


def _smooth_field(d: int, seed: int):
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal((4, 4)) / (1.0 + np.add.outer(np.arange(4), np.arange(4))) ** 2
    if d == 1:
        return lambda x: sum(amps[k, 0] * np.sin(np.pi * (k + 1) * x) for k in range(4))
    return lambda x, y: sum(
        amps[k, l] * np.sin(np.pi * (k + 1) * x) * np.sin(np.pi * (l + 1) * y) for k in range(4) for l in range(4)
    )


def _staircase_fn(d: int):
    edges = [0.5, 0.25, 0.125]
    if d == 1:
        return lambda x: sum(np.where(x < e, 1.0, 0.0) for e in edges)
    return lambda x, y: sum(np.where(np.maximum(x, y) < e, 1.0, 0.0) for e in edges)


def corpus(d: int) -> dict[str, object]:
    """Fixed, named test functions on the unit cube (callables)."""
    if d == 1:
        out = {f"pyramid-w{w}": _pyramid(0.5, w) for w in (0.5, 0.25, 0.125)}
    else:
        out = {f"pyramid-w{w}": _pyramid2(0.5, 0.5, w) for w in (0.5, 0.25, 0.125)}
    out["staircase"] = _staircase_fn(d)
    for seed in (1, 2):
        out[f"smooth-{seed}"] = _smooth_field(d, seed)
    out["zero"] = (lambda x: 0.0 * x) if d == 1 else (lambda x, y: 0.0 * x)
    return out


@dataclass
class FactorizationReport:
    d: int
    levels: int
    source: dict
    target: dict
    ratios: dict[str, float | None] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        vals = [v for v in self.ratios.values() if v is not None]
        return max(vals) if vals else float("nan")

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "levels": self.levels,
            "source": self.source,
            "target": self.target,
            "ratios": self.ratios,
            "skipped": self.skipped,
            "max_ratio": self.max_ratio,
            "weight_convention": WEIGHT_CONVENTION,
        }


def proxy_params(spec: SobolevSpec, delta: float, d: int) -> tuple[BesovParams, BesovParams]:
    """Besov proxies of the factorisation; exponents from ``spec``, weights in the grid dimension ``d``."""
    src, tgt = factorization_exponents(spec, delta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return BesovParams(src.s, src.p, src.q, d), BesovParams(tgt.s, tgt.p, tgt.q, d)


def factorization_ratio(grid: DyadicGrid, spec: SobolevSpec, delta: float) -> tuple[float, float]:
    bs, bt = proxy_params(spec, delta, grid.d)
    coeffs = haar_transform(grid)
    return besov_seq_norm(coeffs, bs), besov_seq_norm(coeffs, bt)


def factorization_demo(spec: SobolevSpec, delta: float, d: int, levels: int, grids: dict | None = None) -> FactorizationReport:
    """Target/source proxy ratio over the corpus at one resolution."""
    bs, bt = proxy_params(spec, delta, d)
    fns = grids if grids is not None else corpus(d)
    rep = FactorizationReport(
        d, levels, {"s": bs.s, "p": bs.p, "q": bs.q}, {"s": bt.s, "p": bt.p, "q": bt.q}
    )
    for name, fn in fns.items():
        g = fn if isinstance(fn, DyadicGrid) else DyadicGrid.from_function(fn, d, levels)
        c = haar_transform(g)
        src = besov_seq_norm(c, bs)
        if src == 0:
            rep.ratios[name] = None
            rep.skipped.append(name)
            continue
        rep.ratios[name] = besov_seq_norm(c, bt) / src
    return rep


def refinement_stability(spec: SobolevSpec, delta: float, d: int, levels: int) -> dict:
    """Compare corpus ratios at ``levels`` and ``levels + 1``."""
    a = factorization_demo(spec, delta, d, levels)
    b = factorization_demo(spec, delta, d, levels + 1)
    per = {k: b.ratios[k] / a.ratios[k] for k in a.ratios if a.ratios[k] is not None and b.ratios[k] is not None}
    overall = b.max_ratio / a.max_ratio
    return {
        "d": d,
        "levels": [levels, levels + 1],
        "max_ratio": [a.max_ratio, b.max_ratio],
        "overall": overall,
        "per_grid": per,
        "skipped": a.skipped,
        "stable": 0.5 <= overall <= 2.0 and all(0.5 <= v <= 2.0 for v in per.values()),
    }


def dilated_bump_grid(j: int, levels: int, pstar: float, rho: float = 0.25) -> DyadicGrid:
    """``2^{2j/p*} u(2^j (x - x_j))`` for the planar pyramid, centred in a dyadic cell."""
    w = rho * 2.0**-j
    cx = cy = w  # the bump's support [0, 2w]^2 is a dyadic cube
    f = _pyramid2(cx, cy, w)
    return DyadicGrid.from_function(lambda x, y: 2.0 ** (2 * j / pstar) * f(x, y), 2, levels)


def parseval_check(grid: DyadicGrid) -> float:
    """Relative gap between grid L^2 norm and the coefficient l^2 norm."""
    c = haar_transform(grid)
    a, b = grid.l2_norm(), double_norm(c, 2, 2)
    return abs(a - b) / max(a, 1e-300)
