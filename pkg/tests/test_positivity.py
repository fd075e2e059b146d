from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ahdrr.kring import KClass, LineSum, SymKClass, pullback_coord_projection, rank
from ahdrr.positivity import (
    ChernObstruction,
    DistinctClasses,
    NoRuleFired,
    Status,
    ThresholdRule,
    Verdict,
    ZeroClass,
    decide_cancellation,
    decide_positive,
    decide_subequivalence,
    effective_factor_count,
    perforation_witness_search,
)
from strategies import kclasses, terms_of


def t(n, i):
    return KClass.generator(n, i)


def line_sum(n, m, r=0):
    return LineSum(m, r).expand(n)


@st.composite
def positive_by_construction(draw, max_n=6):
    """Trivial bundles plus pullbacks of external products of Hopf-type lines."""
    n = draw(st.integers(1, max_n))
    total = KClass.constant(n, draw(st.integers(0, 3)))
    for _ in range(draw(st.integers(0, 4))):
        mask = draw(st.integers(0, (1 << n) - 1))
        line = KClass.one(n)
        for i in range(n):
            if mask >> i & 1:
                line = line * (KClass.one(n) + t(n, i + 1))
        total = total + line
    return total


class TestDecidePositive:
    def test_zero(self):
        v = decide_positive(KClass.zero(3), 3)
        assert v == Verdict(Status.POSITIVE, ZeroClass())

    def test_hopf_pair_not_positive(self, frozen):
        v = decide_positive(line_sum(2, 2, -1), 2)
        assert v.not_positive
        cert = v.certificate
        assert isinstance(cert, ChernObstruction)
        assert (cert.degree, cert.rank, tuple(cert.monomial), cert.coefficient) == (2, 1, (1, 2), 1)
        assert frozen["chern_1_t1_t2"]["1,2"] == 1

    def test_threshold(self):
        v = decide_positive(line_sum(3, 3, 0), 3)
        assert v == Verdict(Status.POSITIVE, ThresholdRule(3, 3))

    def test_tensor_of_lines_is_unknown(self):
        a = KClass.from_terms(2, {(): 1, (1,): 1, (2,): 1, (1, 2): 1})
        assert decide_positive(a, 2) == Verdict(Status.UNKNOWN, NoRuleFired(1, 2))

    def test_negative_and_rank_zero(self):
        assert decide_positive(KClass.constant(2, -1), 2).certificate.__class__.__name__ == "NegativeRank"
        assert decide_positive(t(2, 1), 2).certificate.__class__.__name__ == "NonzeroRankZero"

    def test_coordinate_out_of_range(self):
        with pytest.raises(ValueError):
            decide_positive(t(3, 3), 2)
        with pytest.raises(ValueError):
            decide_positive(LineSum(5, 0), 4)

    def test_effective_factor_count_uses_support(self):
        a = line_sum(6, 2, 0)  # pulled back from the first two factors
        assert effective_factor_count(a) == 2
        assert decide_positive(a, 6).positive

    def test_structured_and_dense_agree(self):
        for m in range(2, 9):
            s, d = decide_positive(LineSum(m, -1), m), decide_positive(line_sum(m, m, -1), m)
            assert s.value is d.value is Status.NOT_POSITIVE
            assert s.certificate.degree == d.certificate.degree == m

    def test_symmetric_input(self):
        assert decide_positive(SymKClass(2, (1, 1, 0)), 2).not_positive

    def test_verdict_rejects_mismatched_certificate(self):
        with pytest.raises(ValueError):
            Verdict(Status.POSITIVE, NoRuleFired(0, 0))

    @given(kclasses(max_n=8, coeff=st.integers(-3, 3)))
    def test_rules_exclusive(self, a):
        # a class in the stable range never has Chern classes above its rank
        from ahdrr.kring import total_chern

        if rank(a) >= effective_factor_count(a) and rank(a) >= 0:
            c = total_chern(a)
            assert all(not c.degree_part(j) for j in range(rank(a) + 1, a.n + 1))

    @given(positive_by_construction())
    def test_positive_corpus_never_rejected(self, a):
        assert not decide_positive(a, a.n).not_positive

    @given(st.integers(2, 40))
    def test_y_corpus_never_accepted(self, m):
        assert not decide_positive(LineSum(m, -1), m).positive

    @given(positive_by_construction(), positive_by_construction())
    def test_certified_cone_is_additive(self, a, b):
        if a.n != b.n:
            return
        if decide_positive(a, a.n).positive and decide_positive(b, b.n).positive:
            assert decide_positive(a + b, a.n).positive

    @given(kclasses(max_n=4), st.randoms(use_true_random=False))
    def test_pullback_never_loses_positivity(self, a, rnd):
        if not decide_positive(a, a.n).positive:
            return
        target = a.n + 2
        b = pullback_coord_projection(a, target, rnd.sample(range(1, target + 1), a.n))
        assert not decide_positive(b, target).not_positive

    @given(kclasses(max_n=3, max_terms=4))
    def test_obstruction_matches_oracle(self, a):
        v = decide_positive(a, a.n)
        if isinstance(v.certificate, ChernObstruction):
            c = oracles.chern_product(a.n, terms_of(a))
            assert c[tuple(v.certificate.monomial)] == v.certificate.coefficient


class TestSubequivalence:
    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_trivial_line_below_hopf_product(self, m):
        v = decide_subequivalence(LineSum(0, 1), LineSum(m, 0), m)
        assert v.not_positive

    @given(positive_by_construction())
    def test_zero_below_anything_positive(self, y):
        if decide_positive(y, y.n).positive:
            assert decide_subequivalence(KClass.zero(y.n), y, y.n).positive

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_rank_gap(self, n):
        v = decide_subequivalence(KClass.one(n), KClass.constant(n, 1 + n), n)
        assert v.positive

    def test_genuine_upgrade(self):
        v = decide_subequivalence(KClass.constant(2, 2), KClass.constant(2, 5), 2)
        assert v.certificate == ThresholdRule(3, 0, genuine_subbundle=True)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            decide_subequivalence(KClass.one(2), KClass.one(3), 2)


class TestCancellation:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_equal_in_stable_range(self, n):
        p = line_sum(n, n, 0)  # n + t_1 + ... + t_n
        assert decide_cancellation(p, p, n).positive

    def test_below_threshold_unknown(self):
        assert decide_cancellation(KClass.one(2), KClass.one(2), 2).unknown

    def test_distinct(self):
        v = decide_cancellation(KClass.one(1), KClass.one(1) + t(1, 1), 1)
        assert v == Verdict(Status.NOT_POSITIVE, DistinctClasses())


class TestPerforation:
    def test_hopf_pair(self):
        x = line_sum(2, 2, -1)
        w = perforation_witness_search([x], 2, 4)
        assert w is not None and w.x == x and w.multiple == 2
        assert w.x_verdict.not_positive and w.multiple_verdict.positive

    def test_zero_classes(self):
        assert perforation_witness_search([KClass.zero(2)] * 3, 2, 4) is None

    def test_already_positive(self):
        assert perforation_witness_search([KClass.one(1) + t(1, 1)], 1, 4) is None

    def test_bad_bound(self):
        with pytest.raises(ValueError):
            perforation_witness_search([], 2, 1)
