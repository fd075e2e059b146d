from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ahdrr.cuntz import (
    MARKED,
    OUTSIDE,
    CuntzElementModel,
    MeasureModel,
    PartitionMismatchError,
    RegionPartition,
    almost_unperforated_check,
    almost_unperforation_witness,
    aup_amplify,
    check_r_comparison,
    cuntz_leq,
    ldf_pairing,
    point_masses,
    rc_witness_build,
    rc_witness_verify,
    three_region_partition,
    witness_amplify,
)
from ahdrr.positivity import Status

F = Fraction


@st.composite
def measures(draw, partition):
    raw = draw(st.lists(st.integers(0, 5), min_size=len(partition.regions), max_size=len(partition.regions)))
    if not any(raw):
        raw[0] = 1
    return MeasureModel(partition, tuple(F(x, sum(raw)) for x in raw))


class TestTypes:
    def test_duplicate_labels(self):
        with pytest.raises(ValueError):
            RegionPartition(("a", "a"), 3)

    def test_marked_dimension(self):
        with pytest.raises(ValueError):
            three_region_partition(4, 2)

    def test_restriction_rank_must_match(self):
        part = three_region_partition(5, 2)
        with pytest.raises(ValueError):
            CuntzElementModel(part, (0, 1, 1), (2, 0))

    def test_measure_normalised(self):
        part = three_region_partition(5, 2)
        with pytest.raises(ValueError):
            MeasureModel(part, (F(1, 2), F(1, 4), F(1, 8)))


class TestPairing:
    def test_constant_rank(self):
        part = three_region_partition(7, 3)
        e = CuntzElementModel(part, (4, 4, 4))
        for mu in point_masses(part):
            assert ldf_pairing(e, mu, 3) == F(4, 3)

    def test_witness_on_marked_point(self):
        w = rc_witness_build(9, 2)
        mu = MeasureModel.point_mass(w.partition, MARKED)
        assert ldf_pairing(w.a_plus_v, mu, 2) == F(w.m, 2)

    def test_b_outside(self):
        w = rc_witness_build(5, 1)
        assert ldf_pairing(w.b, MeasureModel.point_mass(w.partition, OUTSIDE), 1) == 0

    def test_mismatch(self):
        a, b = three_region_partition(5, 2), three_region_partition(7, 2)
        with pytest.raises(PartitionMismatchError):
            ldf_pairing(CuntzElementModel(a, (1, 1, 1)), point_masses(b)[0], 1)

    @given(st.data(), st.integers(5, 11), st.integers(1, 6))
    def test_affine_in_measure(self, data, n, R):
        w = rc_witness_build(n, R)
        mu, nu = data.draw(measures(w.partition)), data.draw(measures(w.partition))
        lam = data.draw(st.fractions(0, 1, max_denominator=9))
        mix = MeasureModel(w.partition, tuple(lam * a + (1 - lam) * b for a, b in zip(mu.weights, nu.weights)))
        for e in (w.a_plus_v, w.b):
            assert ldf_pairing(e, mix, R) == lam * ldf_pairing(e, mu, R) + (1 - lam) * ldf_pairing(e, nu, R)


class TestRcWitness:
    def test_dim5(self):
        w = rc_witness_build(5, 1)
        v = rc_witness_verify(w)
        assert (w.m, w.bound) == (2, 1) and v.verified
        assert len(v.gap_certificate) == 3 and all(g.gap >= 1 for g in v.gap_certificate)
        assert v.failure_certificate.difference == (1, 1)

    def test_dim9_rank2(self):
        w = rc_witness_build(9, 2)
        assert (w.m, w.bound) == (4, F(3, 2)) and rc_witness_verify(w).verified

    @pytest.mark.parametrize("R", [1, 3])
    def test_dim4_degenerate(self, R):
        w = rc_witness_build(4, R)
        assert (w.m, w.bound, w.degenerate) == (1, 0, True) and w.note

    def test_negative_control(self):
        w = rc_witness_build(5, 1)
        bad = replace(w, a_plus_v=CuntzElementModel(w.partition, w.a_plus_v.rank_per_region, (w.m, 0)))
        v = rc_witness_verify(bad)
        assert v.failure_certificate is None and not v.verified

    @given(st.integers(5, 11), st.integers(1, 6))
    def test_all_built_witnesses_verify(self, n, R):
        w = rc_witness_build(n, R)
        assert w.bound == F((n - 1) // 2 - 1, R)
        assert rc_witness_verify(w).verified

    def test_amplify(self):
        w = rc_witness_build(9, 1)
        assert witness_amplify(w, 3).bound == 1
        assert witness_amplify(w, 1) == w
        with pytest.raises(ValueError):
            witness_amplify(w, 0)

    @given(st.integers(5, 11), st.integers(1, 6), st.integers(1, 10))
    def test_amplify_keeps_verification(self, n, R, k):
        w = witness_amplify(rc_witness_build(n, R), k)
        assert w.bound == rc_witness_build(n, R).bound / k
        assert rc_witness_verify(w).verified

    @given(st.integers(5, 11), st.integers(1, 6), st.fractions(0, 1, max_denominator=10))
    def test_failure_radius_monotone(self, n, R, t):
        w = rc_witness_build(n, R)
        rho = min(g.gap for g in rc_witness_verify(w).gap_certificate)
        r = rho * t
        if r < rho:
            assert not check_r_comparison([w.b, w.a_plus_v], r, R).holds
        assert check_r_comparison([w.b, w.a_plus_v], rho, R).holds


class TestAlmostUnperforation:
    def test_standard(self):
        w = almost_unperforation_witness()
        assert w.verified and (w.m, w.n) == (4, 3)
        assert w.multiple_difference == (2, 3) and w.single_difference == (1, 1)
        cone = w.x.partition.cone()
        assert cone.contains((2, 3)) is Status.POSITIVE and cone.contains((1, 1)) is Status.NOT_POSITIVE

    def test_dim4_rejected(self):
        with pytest.raises(ValueError):
            almost_unperforation_witness(4)

    @given(st.integers(5, 12), st.integers(1, 8))
    def test_amplified_still_verified(self, dim, k):
        assert aup_amplify(almost_unperforation_witness(dim), k).verified

    def test_search_rediscovers(self):
        w = almost_unperforation_witness()
        found = almost_unperforated_check([w.y, w.x], 4)
        assert (found.x, found.y, found.m, found.n) == (w.x, w.y, 4, 3)
        assert almost_unperforated_check([w.y, w.x], 3) is None

    def test_constants_only(self):
        part = RegionPartition(("X",), 3)
        elements = [CuntzElementModel(part, (r,)) for r in (1, 2, 5)]
        assert almost_unperforated_check(elements, 6) is None

    def test_single(self):
        w = almost_unperforation_witness()
        assert almost_unperforated_check([w.x], 6) is None

    def test_unknown_never_witnesses(self):
        part = three_region_partition(5, 2)
        x = CuntzElementModel(part, (0, 1, 1))
        y = CuntzElementModel(part, (0, 2, 2), (2, 1))
        assert cuntz_leq(x, y) is Status.UNKNOWN
        assert almost_unperforated_check([x, y], 6) is None
