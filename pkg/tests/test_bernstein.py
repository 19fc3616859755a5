import numpy as np
import pytest

from lblab.bernstein import (
    BoundRecord,
    SobolevSpec,
    candidate_subspaces,
    delta_exponent,
    delta_for_eps,
    envelope,
    factorization_exponents,
    heuristic_bn_lower,
    main_exponent,
    plichko_record,
    slope_fit,
    subspace_inf_ratio,
    worker_count,
)
from lblab.errors import InadmissibleDelta, InadmissibleSpec, InvalidPoint
from lblab.plichko import SubspaceBasis
from lblab.seqspace import SeqEmbeddingSpec
from lblab.simplefn import INF


class TestSpec:
    def test_pstar(self):
        assert SobolevSpec(2, 1, 1.5, 2, 4).pstar == pytest.approx(6.0)
        assert SobolevSpec(3, 1, 2, 3, 4).pstar == pytest.approx(6.0)

    @pytest.mark.parametrize(
        "spec,msg",
        [
            (SobolevSpec(2, 1, 1, 2, 4), "p=1 requires q=1"),
            (SobolevSpec(2, 1, 2, 3, 4), "p must be < d/m"),
            (SobolevSpec(3, 1, 3.5, 4, 5), "p must be < d/m"),
            (SobolevSpec(2, 1, 1.5, 4, 2), "q < r"),
            (SobolevSpec(2, 1, 0.5, 0.5, 1), "p must be >= 1"),
        ],
    )
    def test_rejections(self, spec, msg):
        with pytest.raises(InadmissibleSpec, match=msg):
            spec.validate()

    def test_non_strict(self):
        SobolevSpec(2, 1, 1.5, 2, 2).validate(strict=False)
        with pytest.raises(InadmissibleSpec):
            SobolevSpec(2, 1, 1.5, 2, 2).validate()

    def test_parse(self):
        s = SobolevSpec.parse("2, 1, 1.5, 2, inf")
        assert s == SobolevSpec(2, 1, 1.5, 2.0, INF)
        assert s.as_dict()["r"] == "inf"

    def test_worker_count(self, monkeypatch):
        monkeypatch.setenv("LBLAB_THREADS", "1")
        assert worker_count() == 1
        monkeypatch.setenv("LBLAB_THREADS", "junk")
        assert worker_count() >= 1


class TestExponents:
    def test_example_sharp(self):
        rep = main_exponent(SobolevSpec(3, 1, 2, 3, 4), 0.1)
        assert rep.value == pytest.approx(1 / 12, abs=1e-15)
        assert rep.sharp == pytest.approx(1 / 12)
        assert rep.sharp_threshold == pytest.approx(5 / 12)

    def test_example_endpoint(self):
        rep = main_exponent(SobolevSpec(2, 1, 1, 1, 2), 0.1)
        assert rep.value == pytest.approx((1 / 1.1) * 0.4, abs=1e-15)
        assert rep.sharp is None

    def test_eps_too_large(self):
        with pytest.raises(InadmissibleSpec):
            main_exponent(SobolevSpec(2, 1, 1.5, 2, 4), 0.8)

    def test_value_below_limit(self, rng):
        spec = SobolevSpec(2, 1, 1.5, 2, 4)
        for eps in np.linspace(1e-4, 0.7, 50):
            rep = main_exponent(spec, eps)
            assert rep.value <= rep.limit + 1e-15

    def test_factorization_example(self):
        src, tgt = factorization_exponents(SobolevSpec(2, 1, 1.5, 2, 4), 0.1)
        assert (src.p, src.q, tgt.p, tgt.q) == pytest.approx((1.6, 2, 5.9, 4))
        assert src.s == pytest.approx(1 - 0.2 / (1.5 * 1.6))
        assert tgt.s == pytest.approx(0.2 / (6 * 5.9))

    def test_factorization_balance(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 6))
            m = int(rng.integers(1, d))
            p = rng.uniform(1.01, d / m - 0.01)
            spec = SobolevSpec(d, m, p, p + 0.5, p + 1.0)
            delta = rng.uniform(0, (spec.pstar - p) / 2 * 0.999)
            src, tgt = factorization_exponents(spec, delta)
            assert src.s - d / src.p == pytest.approx(tgt.s - d / tgt.p, abs=1e-12)
            assert src.s - d / src.p == pytest.approx(m - d / p, abs=1e-12)

    def test_delta_rejected(self):
        with pytest.raises(InadmissibleDelta):
            factorization_exponents(SobolevSpec(2, 1, 1.5, 2, 4), 2.25)
        with pytest.raises(InadmissibleDelta):
            factorization_exponents(SobolevSpec(2, 1, 1.5, 2, 4), -0.1)

    def test_delta_for_eps(self):
        spec = SobolevSpec(2, 1, 1.5, 2, 4)
        for eps in (0.5, 0.1, 0.01):
            dl = delta_for_eps(spec, eps)
            assert 0 < dl < eps
            assert (spec.p + dl) / (spec.pstar - dl) < spec.p / spec.pstar + eps

    def test_delta_exponent_sharp(self):
        spec = SobolevSpec(2, 1, 1.5, 2, 4)
        assert delta_exponent(spec, 0.01) == pytest.approx(0.25, abs=1e-12)


class TestRecords:
    def test_kind_checked(self):
        with pytest.raises(ValueError):
            BoundRecord(1, "guess", 0, 1, "x")
        with pytest.raises(ValueError):
            BoundRecord(1, "heuristic", 2, 1, "x")

    def test_envelope_upper(self):
        recs = [BoundRecord(n, "certified-upper", v, v, "t") for n, v in [(1, 1.0), (2, 1.2), (3, 0.7)]]
        assert [r.hi for r in envelope(recs)] == [1.0, 1.0, 0.7]

    def test_envelope_lower(self):
        recs = [BoundRecord(n, "certified-lower", v, 2, "t") for n, v in [(1, 0.5), (2, 0.8), (3, 0.6)]]
        assert [r.lo for r in envelope(recs)] == [0.8, 0.8, 0.6]

    def test_envelope_mixed(self):
        with pytest.raises(ValueError):
            envelope([BoundRecord(1, "heuristic", 0, 0, "a"), BoundRecord(2, "certified-lower", 0, 0, "b")])

    def test_plichko_record(self):
        r = plichko_record(16, SeqEmbeddingSpec(2, 2, 6, 4))
        assert r.certified and r.hi == pytest.approx(0.5)


class TestHeuristic:
    def test_candidates_are_bases(self):
        for n in (1, 4, 9, 16):
            for tag, v in candidate_subspaces(n, (8, 8), 0):
                SubspaceBasis(v)
                assert v.shape == (n, 8, 8), tag

    def test_identity_row_block(self):
        spec = SeqEmbeddingSpec(2, 2, 4, 4)
        for n in (1, 2, 5, 8):
            v = np.zeros((n, 1, 8))
            v[np.arange(n), 0, np.arange(n)] = 1
            val, c = subspace_inf_ratio(SubspaceBasis(v), spec)
            assert val == pytest.approx(n ** (-0.25), rel=1e-12)

    def test_heuristic_below_certified_upper(self):
        spec = SeqEmbeddingSpec(2, 2, 6, 4)
        for n in (1, 2, 4, 8):
            h = heuristic_bn_lower(spec, n, window=(4, 4), budget=200)
            assert not h.certified
            assert h.lo <= plichko_record(n, spec).hi * (1 + 1e-9)

    def test_heuristic_attains_bound_small_n(self):
        spec = SeqEmbeddingSpec(2, 2, 6, 4)
        h = heuristic_bn_lower(spec, 4, window=(4, 4), budget=200)
        assert h.lo == pytest.approx(4 ** -0.25, rel=1e-6)


class TestSlopeFit:
    def test_exact_power(self):
        s, b, res = slope_fit([(n, 3 * n**-0.5) for n in range(1, 10)])
        assert s == pytest.approx(-0.5) and np.exp(b) == pytest.approx(3) and res < 1e-12

    def test_rejects(self):
        with pytest.raises(InvalidPoint):
            slope_fit([(1, 1), (2, 1)])
        with pytest.raises(InvalidPoint):
            slope_fit([(1, 1), (2, 0), (3, 1)])
