from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ahdrr.ah import ProjBlocks, drr_of_system
from ahdrr.positivity import ChernObstruction, decide_positive
from ahdrr.villadsen import (
    Stage,
    VilladsenParams,
    build_system,
    comparison_failure_radius,
    generate_params,
    push_forward_offset,
    pushed_y_class,
    rc_lower_bound_drr_half,
    track_y_class,
)

F = Fraction
targets = st.fractions(min_value=F(1, 7), max_value=6, max_denominator=7).filter(lambda c: c > 0)


class TestParams:
    def test_c2_one_stage(self):
        p = generate_params(2, 1)
        assert p.stages == (Stage(4, 0, 3),) and p.ratio(1) == F(4, 3)

    def test_c2_two_stages(self):
        p = generate_params(2, 2)
        assert p.stages[1] == Stage(4, 1, 15) and p.ratio(2) == F(16, 15)
        assert F(1) < p.ratio(2) < F(5, 4)

    def test_c1_one_stage(self):
        p = generate_params(1, 1)
        assert (p.stages[0].m, p.stages[0].n) == (2, 3)

    @pytest.mark.parametrize("c", ["1/2", "1", "2", "7/3"])
    def test_matches_bruteforce(self, frozen, c):
        p = generate_params(F(c), 4)
        assert [[s.m, s.s, s.n] for s in p.stages] == frozen["villadsen"][c]

    @given(targets, st.integers(1, 6))
    def test_interval_invariant(self, c, k):
        p = generate_params(c, k)
        for i in range(1, k + 1):
            assert c / 2 < p.ratio(i) < c / 2 + F(1, 2**i)
            if i > 1:
                assert p.stages[i - 1].s >= 1
                assert p.n(i) == p.n(i - 1) * (p.stages[i - 1].m + p.stages[i - 1].s)

    @given(targets, st.integers(1, 4))
    def test_deterministic(self, c, k):
        assert generate_params(c, k) == generate_params(c, k)
        assert generate_params(c, k + 1).stages[:k] == generate_params(c, k).stages

    @pytest.mark.parametrize("c", [0, -1, "-1/2"])
    def test_rejects_nonpositive(self, c):
        with pytest.raises(ValueError):
            generate_params(F(c), 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            VilladsenParams(F(2), (Stage(4, 0, 3), Stage(4, 1, 14)))
        with pytest.raises(ValueError):
            VilladsenParams(F(2), (Stage(3, 0, 3),))


class TestSystem:
    def test_c2_two_stages(self):
        p = generate_params(2, 2)
        s = build_system(p)
        blk = s.blocks[1].summands[0]
        assert (blk.space.n_factors, blk.unit_rank) == (16, 15)
        assert s.maps[0].eigenvalue_count() == 5
        assert s.maps[0].metadata["points"]

    def test_huge_stages_stay_compressed(self):
        p = generate_params(2, 8)
        s = build_system(p)
        (comp,) = s.maps[-1].components
        assert isinstance(comp[0], ProjBlocks) and comp[0].count == p.stages[-1].m

    @given(targets, st.integers(1, 5))
    def test_stage_ratios(self, c, k):
        p = generate_params(c, k)
        ratios = drr_of_system(build_system(p)).stage_ratios
        for i, r in enumerate(ratios, start=1):
            assert r == 2 * p.ratio(i)
            assert c < r < c + F(2, 2**i)


class TestYClass:
    def test_c2_stage2(self):
        y = track_y_class(generate_params(2, 2), 2)
        assert y.state == 1 and y.cls.m == 16 and y.cls.offset == -1

    @pytest.mark.parametrize("c", ["1/2", "1", "2", "7/3"])
    def test_not_positive_with_degree_P(self, c):
        p = generate_params(F(c), 6)
        for i in range(1, 7):
            y = track_y_class(p, i)
            if p.P(i) >= 2:
                assert y.verdict.not_positive
                assert isinstance(y.verdict.certificate, ChernObstruction)
                assert y.verdict.certificate.degree == p.P(i)
            assert abs(y.state - F(c) / 2) < F(1, 2**i) + F(1, p.n(i))

    def test_dense_agreement_small(self):
        for c in ("1/2", "1", "2", "7/3"):
            p = generate_params(F(c), 3)
            for i in range(1, 4):
                P = p.P(i)
                if P > 12:
                    continue
                dense = decide_positive(track_y_class(p, i).cls.expand(P), P)
                assert dense.value is track_y_class(p, i).verdict.value
                if P >= 2:
                    assert dense.certificate.degree == P

    def test_stage_out_of_range(self):
        with pytest.raises(IndexError):
            track_y_class(generate_params(2, 2), 3)

    @given(targets, st.integers(1, 5))
    def test_push_forward_consistent(self, c, k):
        p = generate_params(c, k + 1)
        img = pushed_y_class(p, k)
        nxt = track_y_class(p, k + 1).cls
        assert img.m == nxt.m and img.offset - nxt.offset == push_forward_offset(p, k)


class TestRadius:
    def test_c2_stage2(self):
        fr = comparison_failure_radius(generate_params(2, 2), 2)
        assert fr.radius == 1 and fr.state_gap == 1 and fr.verdict.not_positive

    def test_c1_stage1(self):
        assert comparison_failure_radius(generate_params(1, 1), 1).radius == F(1, 3)
        assert rc_lower_bound_drr_half(generate_params(1, 1)) == F(1, 3)

    @given(targets, st.integers(1, 6))
    def test_converges(self, c, k):
        p = generate_params(c, k)
        fr = comparison_failure_radius(p, k)
        assert abs(fr.radius - c / 2) < F(1, 2**k) + F(1, p.n(k))

    def test_fails_below_radius_only(self):
        fr = comparison_failure_radius(generate_params(2, 3), 3)
        assert fr.fails_at(fr.radius - F(1, 1000)) and fr.fails_at(0)
        assert not fr.fails_at(fr.radius)

    @given(targets, st.integers(1, 5))
    def test_lower_bound_monotone_in_stages(self, c, k):
        p = generate_params(c, k + 1)
        assert rc_lower_bound_drr_half(p, k) <= rc_lower_bound_drr_half(p, k + 1)
