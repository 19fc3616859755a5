import math

import numpy as np
import pytest
from scipy.integrate import quad

from lblab.bernstein import slope_fit
from lblab.errors import InadmissibleSpec, PreconditionViolated, ZeroVector
from lblab.extremal import (
    CoeffSequence,
    _Pieces,
    beta_regularize,
    bump_norms,
    is_p_decreasing,
    lorentz_norm_arrays,
    lorentzsum_constants,
    lorentzsum_equivalence_report,
    pyramid_level_area,
    pyramid_profile,
    sobolev_lower_bound,
    sobolev_lower_series,
    source_upper_constant,
    staircase,
    staircase_constant,
    staircase_norm_exact_decreasing,
    target_lower_constant,
)
from lblab.simplefn import INF, LorentzExponents, lorentz_norm, lp_norm, normalize

PQ = [(1.0, 1.0), (1.5, 2.0), (2.0, 0.5)]
PSTAR = 6.0  # d=2, m=1, p=1.5


def random_alpha(rng, max_len=32):
    k = int(rng.integers(1, max_len + 1))
    v = rng.standard_normal(k) * (rng.random(k) < 0.8)
    v[int(rng.integers(0, k))] = rng.uniform(0.5, 2.0)
    return CoeffSequence(tuple(v), int(rng.integers(-5, 6)))


def truncated_tail_norm(beta, p, q, extra=400):
    """Oracle: expand the geometric tail into explicit pieces."""
    J = beta.start + len(beta) - 1
    vals = list(beta.values) + [beta.values[-1] * 2.0 ** (-(k + 1) / p) for k in range(extra)]
    pieces = [(abs(a) * 2.0 ** (j / p), 2.0 ** (-j)) for j, a in zip(range(beta.start, J + extra + 1), vals) if a]
    return lorentz_norm(normalize(pieces), LorentzExponents(p, q))


class TestBeta:
    def test_example(self):
        b = beta_regularize(CoeffSequence((1.0, 0.0, 0.0)), 1.0)
        assert b.values == (1.0, 0.5, 0.25) and b.tail_p == 1.0

    def test_dominates_and_decreasing(self, rng):
        for _ in range(100):
            a = random_alpha(rng)
            p = rng.uniform(0.5, 3)
            b = beta_regularize(a, p)
            assert all(bb >= abs(aa) for aa, bb in zip(a.values, b.values))
            assert is_p_decreasing(b, p)

    def test_idempotent(self, rng):
        b = beta_regularize(random_alpha(rng), 1.5)
        assert beta_regularize(b, 1.5).values == pytest.approx(b.values, rel=1e-15)

    def test_not_decreasing_without_tail(self):
        assert not is_p_decreasing(CoeffSequence((1.0,)), 1.0)
        assert is_p_decreasing(CoeffSequence((1.0,), tail_p=1.0), 1.0)
        assert not is_p_decreasing(CoeffSequence((1.0, 0.1), tail_p=1.0), 1.0)

    def test_lq_norm_includes_tail(self):
        b = CoeffSequence((1.0,), tail_p=1.0)
        assert b.lq_norm(1.0) == pytest.approx(2.0)
        assert b.lq_norm(INF) == 1.0


class TestStaircase:
    def test_example(self):
        assert staircase(CoeffSequence((1.0, 1.0)), 1.0).pieces == ((2.0, 0.5), (1.0, 1.0))

    def test_tail_piece(self):
        f = staircase(CoeffSequence((1.0,), tail_p=1.0), 1.0)
        assert f.pieces == ((1.0, 2.0),)

    def test_constant_values(self):
        assert staircase_constant(1, 1) == pytest.approx(1.0)
        assert staircase_constant(2, INF) == pytest.approx(math.sqrt(2))

    def test_exact_ratio_for_decreasing(self, rng):
        for p, q in PQ + [(3.0, INF)]:
            for _ in range(50):
                b = beta_regularize(random_alpha(rng), p)
                got = lorentz_norm(staircase(b, p), LorentzExponents(p, q))
                want = staircase_norm_exact_decreasing(b, p, q)
                assert abs(got - want) <= 1e-12 * want
                assert got == pytest.approx(truncated_tail_norm(b, p, q), rel=1e-10)

    def test_exact_requires_precondition(self):
        with pytest.raises(PreconditionViolated):
            staircase_norm_exact_decreasing(CoeffSequence((1.0, 0.1), tail_p=1.0), 1.0, 1.0)

    def test_shift_invariance(self, rng):
        for p, q in PQ:
            a = random_alpha(rng)
            r0 = lorentzsum_equivalence_report(a, p, q).ratio
            r1 = lorentzsum_equivalence_report(a.shifted(3), p, q).ratio
            assert r1 == pytest.approx(r0, rel=1e-12)

    def test_equivalence_random(self, rng):
        for p, q in PQ:
            C, lo, hi = lorentzsum_constants(p, q)
            assert 1 / C <= lo <= hi <= C
            for _ in range(300):
                rep = lorentzsum_equivalence_report(random_alpha(rng), p, q)
                assert rep.within_derived and rep.within_tight

    def test_single_spike_is_an_indicator(self):
        for p, q in PQ:
            rep = lorentzsum_equivalence_report(CoeffSequence((1.0,), start=2), p, q)
            assert rep.ratio == pytest.approx((p / q) ** (1 / q), rel=1e-12)

    def test_zero_rejected(self):
        with pytest.raises(ZeroVector):
            lorentzsum_equivalence_report(CoeffSequence((0.0, 0.0)), 1, 1)


def exact_pyramid_value_norm(rho, h, p, q):
    area = 4 * rho * rho
    ustar = lambda s: h * (1 - math.sqrt(s / area))
    return quad(lambda s: s ** (q / p - 1) * ustar(s) ** q, 0, area, epsrel=1e-12)[0] ** (1 / q)


class TestPyramid:
    def test_level_area(self):
        assert pyramid_level_area(0.5, 1.0, 1.0) == pytest.approx(1.0)
        assert pyramid_level_area(0.0, 1.0, 1.0) == 4.0
        assert pyramid_level_area(1.0, 1.0, 1.0) == 0.0

    def test_gradient_profile(self):
        fam = pyramid_profile(0.5, 2.0, 8)
        assert fam.profile_grad.pieces == ((4.0, 1.0),)
        assert lp_norm(fam.profile_grad, 1.5) == pytest.approx(4.0)

    def test_sandwich_contains_exact(self):
        p, q = 6.0, 4.0
        exact = exact_pyramid_value_norm(1.0, 1.0, p, q)
        fam = pyramid_profile(1.0, 1.0, 64)
        lo = lorentz_norm(fam.profile_value_lower, LorentzExponents(p, q))
        hi = lorentz_norm(fam.profile_value_upper, LorentzExponents(p, q))
        assert lo <= exact <= hi
        assert (hi - lo) / exact < 0.05

    def test_refinement_nests(self):
        e = LorentzExponents(6.0, 4.0)
        prev_lo, prev_hi = 0.0, INF
        for L in (4, 8, 16, 32, 64):
            fam = pyramid_profile(1.0, 1.0, L)
            lo = lorentz_norm(fam.profile_value_lower, e)
            hi = lorentz_norm(fam.profile_value_upper, e)
            assert prev_lo <= lo * (1 + 1e-14) and hi <= prev_hi * (1 + 1e-14)
            prev_lo, prev_hi = lo, hi

    def test_dilation_invariance(self):
        fam = pyramid_profile(1.0, 1.0, 16)
        base = bump_norms(fam, 1.5, 2.0, 4.0, PSTAR, 0)
        for j in range(1, 6):
            bj = bump_norms(fam, 1.5, 2.0, 4.0, PSTAR, j)
            assert bj.grad_norm == pytest.approx(base.grad_norm, rel=1e-12)
            assert bj.value_lo == pytest.approx(base.value_lo, rel=1e-12)
            assert bj.value_hi == pytest.approx(base.value_hi, rel=1e-12)

    def test_exponent_check(self):
        fam = pyramid_profile(1.0, 1.0, 4)
        with pytest.raises(InadmissibleSpec):
            bump_norms(fam, 1.5, 2.0, 4.0, 5.0)
        with pytest.raises(InadmissibleSpec):
            bump_norms(fam, 2.0, 2.0, 4.0, INF)


class TestCertifiedIngredients:
    def test_vectorised_norm_matches_scalar(self, rng):
        for _ in range(50):
            v, m = rng.uniform(0.1, 5, 10), rng.uniform(0.1, 2, 10)
            p, q = rng.uniform(0.5, 4), rng.choice([0.5, 2.0, INF])
            ref = lorentz_norm(normalize(zip(v, m)), LorentzExponents(p, q))
            assert lorentz_norm_arrays(v, m, p, q) == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("q", [2.0, 1.5])
    def test_source_constant_is_an_upper_bound(self, rng, q):
        fam = pyramid_profile(1.0, 1.0, 16)
        cS = source_upper_constant(fam, 1.5, q)
        for n in (1, 3, 8, 16):
            grad = _Pieces(fam.profile_grad, n, PSTAR, 2, grad=True)
            for _ in range(50):
                a = np.abs(rng.standard_normal(n)) * rng.random(n) ** 3
                a[0] += 1e-3
                lq = np.sum(a**q) ** (1 / q)
                assert grad.norm(a, 1.5, q) <= cS * lq * (1 + 1e-12)

    @pytest.mark.parametrize("r", [4.0, 2.0])
    def test_target_constant_is_a_lower_bound(self, rng, r):
        fam = pyramid_profile(1.0, 1.0, 16)
        cT = target_lower_constant(fam, r, PSTAR)
        for n in (1, 3, 8, 16):
            low = _Pieces(fam.profile_value_lower, n, PSTAR, 2, grad=False)
            for _ in range(50):
                a = np.abs(rng.standard_normal(n)) * rng.random(n) ** 3
                a[0] += 1e-3
                assert low.norm(a, PSTAR, r) >= cT * np.sum(a**r) ** (1 / r) * (1 - 1e-12)


class TestSobolevBound:
    def test_single_bump(self):
        fam = pyramid_profile(1.0, 1.0, 64)
        b = sobolev_lower_bound(1, fam, 1.5, 2.0, 4.0, PSTAR)
        assert 0 < b.lo <= b.single_bump[0] <= b.single_bump[1]
        assert b.hi == pytest.approx(b.single_bump[1], rel=1e-12)

    def test_q_greater_than_r_rejected(self):
        with pytest.raises(InadmissibleSpec):
            sobolev_lower_bound(2, pyramid_profile(1, 1, 4), 1.5, 4.0, 2.0, PSTAR)

    def test_series_intervals_and_slope(self):
        ser = sobolev_lower_series(12, 1.5, 2.0, 4.0, levels=32)
        assert all(b.lo <= b.hi for b in ser)
        slope, _, _ = slope_fit([(b.n, b.lo) for b in ser])
        assert slope == pytest.approx(-0.25, abs=1e-9)
        assert all(b.lo * b.n**0.25 == pytest.approx(ser[0].constant, rel=1e-12) for b in ser)

    def test_hi_independent_of_levels(self):
        a = sobolev_lower_bound(4, pyramid_profile(1, 1, 32), 1.5, 2.0, 4.0, PSTAR)
        b = sobolev_lower_bound(4, pyramid_profile(1, 1, 64), 1.5, 2.0, 4.0, PSTAR)
        assert b.hi <= a.hi * (1 + 1e-12) and b.lo >= a.lo * (1 - 1e-12)

    def test_equal_exponents_uniform(self):
        ser = sobolev_lower_series(8, 1.5, 2.0, 2.0, levels=32)
        assert max(b.lo for b in ser) <= min(b.hi for b in ser)
