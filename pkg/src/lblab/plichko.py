"""Flat-vector witnesses in finite-dimensional subspaces of double sequences.

Every ``n``-dimensional subspace of a finite window contains a nonzero vector
whose absolute maximum is attained at ``n`` or more coordinates. Normalising
such a vector in the source norm and measuring it in the target norm gives a
computable certificate for the power-law upper bound on Bernstein numbers of
``l^{q0}(l^{p0}) -> l^{q1}(l^{p1})``.

The witness is found as a vertex of the polytope ``{c : |B c|_inf <= 1}``
(``B`` the basis matrix): at a vertex, at least ``n`` linearly independent
constraints ``|x_i| = 1`` are active. The vertex is reached by walking from
the origin along null-space directions of the active rows, which needs at
most ``n`` steps.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NoWitnessFound
from .seqspace import SeqEmbeddingSpec, as_double_sequence, double_norm, sup_norm

RANK_TOL = 1e-10
TIE_TOL = 1e-9


@dataclass(frozen=True)
class SubspaceBasis:
    vectors: np.ndarray  # shape (n, J, K)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim == 2:
            v = v[:, None, :]
        if v.ndim != 3 or v.shape[0] < 1:
            raise ValueError(f"expected (n, J, K) stack of vectors, got shape {v.shape}")
        for x in v:
            as_double_sequence(x)
        s = np.linalg.svd(v.reshape(v.shape[0], -1), compute_uv=False)
        if s[0] == 0 or s[-1] < RANK_TOL * s[0]:
            raise ValueError("basis vectors are linearly dependent")
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def window(self) -> tuple[int, int]:
        return self.vectors.shape[1], self.vectors.shape[2]

    @property
    def matrix(self) -> np.ndarray:
        """Ambient-by-n matrix whose columns are the flattened basis vectors."""
        return self.vectors.reshape(self.n, -1).T

    def combine(self, coefficients) -> np.ndarray:
        return np.tensordot(np.asarray(coefficients, dtype=float), self.vectors, axes=1)


@dataclass
class FlatWitness:
    coefficients: np.ndarray
    vector: np.ndarray
    tied_components: list[tuple[int, int]] = field(default_factory=list)


def tied_indices(x: np.ndarray, tol: float = TIE_TOL) -> list[tuple[int, int]]:
    a = np.abs(x)
    m = a.max()
    return [tuple(int(i) for i in ix) for ix in np.argwhere(a >= m * (1.0 - tol))]


def _null_direction(rows: np.ndarray, n: int) -> np.ndarray | None:
    if rows.shape[0] == 0:
        d = np.zeros(n)
        d[0] = 1.0
        return d
    _, s, vt = np.linalg.svd(rows)
    rank = int(np.sum(s > RANK_TOL * max(s[0], 1e-300)))
    if rank >= n:
        return None
    return vt[rank]


def find_flat_vector(basis: SubspaceBasis, tol: float = TIE_TOL, max_steps: int | None = None) -> FlatWitness:
    B = basis.matrix
    N, n = B.shape
    if N < n:
        raise NoWitnessFound("ambient dimension smaller than subspace dimension")
    c = np.zeros(n)
    max_steps = max_steps or 4 * n + 4
    for _ in range(max_steps):
        x = B @ c
        active = np.abs(x) >= 1.0 - tol
        d = _null_direction(B[active], n)
        if d is None:
            break
        g = B @ d
        # largest step keeping every inactive |x_i| <= 1
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(g > 0, (1.0 - x) / g, np.inf)
            dn = np.where(g < 0, (-1.0 - x) / g, np.inf)
        step = np.minimum(up, dn)
        step[active] = np.inf
        t = step.min()
        if not np.isfinite(t):
            raise NoWitnessFound("unbounded direction: basis is rank deficient")
        c = c + t * d
    else:
        raise NoWitnessFound(f"no vertex reached within {max_steps} steps")
    x = B @ c
    vec = x.reshape(basis.window)
    ties = tied_indices(vec, tol)
    if len(ties) < n:
        raise NoWitnessFound(f"vertex has only {len(ties)} tied components, need {n}")
    return FlatWitness(c, vec, ties)


def find_flat_vector_exhaustive(basis: SubspaceBasis, tol: float = TIE_TOL, budget: int = 200_000) -> FlatWitness:
    """Enumerate index subsets ``S`` of size n and sign patterns; solve ``sigma_i x_{s_i} = 1``.

    Exponential; kept as an independent check of :func:`find_flat_vector` on small windows.
    """
    B = basis.matrix
    N, n = B.shape
    tried = 0
    for S in itertools.combinations(range(N), n):
        BS = B[list(S)]
        if np.linalg.matrix_rank(BS, tol=RANK_TOL * max(np.abs(BS).max(), 1e-300)) < n:
            continue
        for tail in itertools.product((1.0, -1.0), repeat=n - 1):
            tried += 1
            if tried > budget:
                raise NoWitnessFound(f"exhaustive search exceeded budget {budget}")
            sigma = np.array((1.0,) + tail)
            c = np.linalg.solve(sigma[:, None] * BS, np.ones(n))
            x = B @ c
            if np.abs(x).max() <= 1.0 + tol:
                vec = x.reshape(basis.window)
                ties = tied_indices(vec, tol)
                if len(ties) >= n:
                    return FlatWitness(c, vec, ties)
    raise NoWitnessFound("no flat vector found; basis is rank deficient")


def plichko_upper_bound(n: int, spec: SeqEmbeddingSpec) -> float:
    """``n^{-min(1/p0, 1/q0) (1 - max(q0/q1, p0/p1))}``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    spec.require_admissible()
    e = spec.decay_exponent
    return 1.0 if e == 0 or n == 1 else float(n) ** (-e)


@dataclass
class Certificate:
    ratio: float
    bound: float
    witness: FlatWitness

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound * (1 + 1e-9)

    def to_json(self) -> str:
        return json.dumps(
            {
                "coefficients": [float(c) for c in self.witness.coefficients],
                "tied_components": [list(t) for t in self.witness.tied_components],
                "ratio": self.ratio,
                "bound": self.bound,
            }
        )


def certify_subspace(basis: SubspaceBasis, spec: SeqEmbeddingSpec) -> Certificate:
    w = find_flat_vector(basis)
    scale = double_norm(w.vector, spec.p0, spec.q0)
    w = FlatWitness(w.coefficients / scale, w.vector / scale, w.tied_components)
    ratio = double_norm(w.vector, spec.p1, spec.q1)
    return Certificate(ratio, plichko_upper_bound(basis.n, spec), w)


def flat_ratio_bound_check(witness: FlatWitness, spec: SeqEmbeddingSpec) -> tuple[float, float]:
    """``(|x|_inf, n^{-min(1/p0,1/q0)})`` for a source-normalised witness with n ties."""
    n = len(witness.tied_components)
    return sup_norm(witness.vector), float(n) ** (-min(1.0 / spec.p0, 1.0 / spec.q0))
