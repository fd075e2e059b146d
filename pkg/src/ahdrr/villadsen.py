"""Villadsen-type systems with a prescribed dimension-rank ratio ``c``.

Stage ``i`` is ``M_{n_i}(C((S^2)^{P_i}))`` with ``P_i = m_1 ... m_i``.  The map to
stage ``i+1`` is diagonal with ``m_{i+1}`` coordinate projections and ``s_{i+1}``
point evaluations, so ``n_{i+1} = n_i (m_{i+1} + s_{i+1})`` and the parameters are
chosen with ``c/2 < P_k/n_k < c/2 + 2^-k`` at every stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .ah import BlockMap, BuildingBlock, Eval, InductiveSystem, ProjBlocks, induced_k0_map, sphere_summand
from .kring import LineSum
from .positivity import Verdict, decide_positive, decide_subequivalence

POINT_CHOICE_NOTE = (
    "evaluation points are opaque labels; the dense choice that makes the limit simple is not verified"
)


@dataclass(frozen=True)
class Stage:
    m: int
    s: int  # 0 at stage 1, where there is no incoming map
    n: int


@dataclass(frozen=True)
class VilladsenParams:
    c: Fraction
    stages: tuple[Stage, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not self.stages:
            raise ValueError("need at least one stage")
        for k, (prev, cur) in enumerate(zip(self.stages, self.stages[1:]), start=2):
            if cur.s < 1:
                raise ValueError(f"stage {k}: s must be at least 1")
            if cur.n != prev.n * (cur.m + cur.s):
                raise ValueError(f"stage {k}: n = {cur.n} breaks n_k = n_(k-1) (m_k + s_k)")
        for k in range(1, len(self.stages) + 1):
            lo, hi = self.bracket(k)
            if not lo < self.ratio(k) < hi:
                raise ValueError(f"stage {k}: P/n = {self.ratio(k)} outside ({lo}, {hi})")

    def __len__(self):
        return len(self.stages)

    def P(self, k: int) -> int:
        """``m_1 m_2 ... m_k``: the number of sphere factors at stage k."""
        out = 1
        for st in self.stages[:k]:
            out *= st.m
        return out

    def n(self, k: int) -> int:
        return self.stages[k - 1].n

    def ratio(self, k: int) -> Fraction:
        return Fraction(self.P(k), self.n(k))

    def bracket(self, k: int) -> tuple[Fraction, Fraction]:
        return self.c / 2, self.c / 2 + Fraction(1, 2**k)


def _parse_c(c) -> Fraction:
    c = Fraction(c)
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    return c


def generate_params(c, k_stages: int) -> VilladsenParams:
    """Deterministic parameters: minimal ``(n_1, m_1)`` first, then minimal ``s`` and ``m`` per stage."""
    c = _parse_c(c)
    if k_stages < 1:
        raise ValueError("k_stages must be at least 1")
    half = c / 2
    lo, hi = half, half + Fraction(1, 2)
    n1 = 1
    while True:
        # smallest integer m with m/n1 > lo
        m1 = floor(lo * n1) + 1
        if Fraction(m1, n1) < hi:
            break
        n1 += 1
    stages = [Stage(m1, 0, n1)]
    ratio = Fraction(m1, n1)
    for k in range(2, k_stages + 1):
        lo_q = half / ratio  # need m/(m+s) > lo_q
        hi_q = (half + Fraction(1, 2**k)) / ratio  # and m/(m+s) < hi_q
        if lo_q >= 1:
            raise ArithmeticError(f"stage {k}: ratio {ratio} already at or below c/2")
        s = 1
        while True:
            m = floor(lo_q * s / (1 - lo_q)) + 1
            if Fraction(m, m + s) < hi_q:
                break
            s += 1
            if s > 10**9:
                raise ArithmeticError(f"stage {k}: no (m, s) found for the interval ({lo_q}, {hi_q})")
        n = stages[-1].n * (m + s)
        stages.append(Stage(m, s, n))
        ratio = ratio * Fraction(m, m + s)
    return VilladsenParams(c, tuple(stages))


def stage_block(p: VilladsenParams, i: int) -> BuildingBlock:
    return BuildingBlock((sphere_summand(p.P(i), p.n(i)),))


def stage_map(p: VilladsenParams, i: int) -> BlockMap:
    """Connecting map from stage i to stage i+1."""
    src, tgt = stage_block(p, i), stage_block(p, i + 1)
    st = p.stages[i]
    maps = [ProjBlocks(0, st.m)]
    maps += [Eval(0, f"x_{i}^{j}") for j in range(1, st.s + 1)]
    return BlockMap(src, tgt, (tuple(maps),), metadata={"points": POINT_CHOICE_NOTE})


def build_system(p: VilladsenParams) -> InductiveSystem:
    blocks = [stage_block(p, i) for i in range(1, len(p) + 1)]
    maps = [stage_map(p, i) for i in range(1, len(p))]
    return InductiveSystem(tuple(blocks), tuple(maps))


def _check_stage(p: VilladsenParams, i: int) -> None:
    if not 1 <= i <= len(p):
        raise IndexError(f"stage {i} outside 1..{len(p)}")


@dataclass(frozen=True)
class YClass:
    stage: int
    cls: LineSum
    state: Fraction
    verdict: Verdict


def track_y_class(p: VilladsenParams, i: int) -> YClass:
    """``y_i = [xi^(x P_i)] - [theta_1]``, its normalised rank and its positivity verdict."""
    _check_stage(p, i)
    P = p.P(i)
    y = LineSum(P, -1)
    return YClass(i, y, Fraction(P - 1, p.n(i)), decide_positive(y, P))


def push_forward_offset(p: VilladsenParams, i: int) -> int:
    """Multiple of ``[theta_1]`` by which the image of ``y_i`` exceeds ``y_{i+1}``."""
    st = p.stages[i]
    return st.s * p.P(i) - st.m - st.s + 1


def pushed_y_class(p: VilladsenParams, i: int) -> LineSum:
    """Image of ``y_i`` under the connecting map, computed through the K_0 map."""
    (img,) = induced_k0_map(stage_map(p, i), [track_y_class(p, i).cls])
    return img


@dataclass(frozen=True)
class FailureRadius:
    stage: int
    radius: Fraction
    x: LineSum  # [theta_1]
    y: LineSum  # [xi^(x P_i)]
    state_gap: Fraction
    verdict: Verdict

    def fails_at(self, r) -> bool:
        """Whether this witness shows r-strict comparison failing at this stage."""
        return Fraction(r) < self.radius and self.verdict.not_positive


def comparison_failure_radius(p: VilladsenParams, i: int) -> FailureRadius:
    _check_stage(p, i)
    P, n = p.P(i), p.n(i)
    x, y = LineSum(0, 1), LineSum(P, 0)
    gap = Fraction(y.rank, n) - Fraction(x.rank, n)
    return FailureRadius(i, Fraction(P - 1, n), x, y, gap, decide_subequivalence(x, y, P))


def rc_lower_bound_drr_half(p: VilladsenParams, stages: int | None = None) -> Fraction:
    """Largest certified comparison-failure radius over the first ``stages`` stages.

    Projections embed order-faithfully into the Cuntz semigroup, so each radius is
    also a lower bound for the radius of comparison in the model.
    """
    k = len(p) if stages is None else stages
    if not 1 <= k <= len(p):
        raise ValueError(f"stages must be in 1..{len(p)}")
    best = Fraction(0)
    for i in range(1, k + 1):
        fr = comparison_failure_radius(p, i)
        if fr.verdict.not_positive:
            best = max(best, fr.radius)
    return best
