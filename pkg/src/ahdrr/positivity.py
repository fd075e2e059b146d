"""Three-valued positivity, subequivalence and cancellation over sphere products.

Positivity in K^0((S^2)^n) is not decidable with the two tools available here:
the stable-range rule (a rank gap of at least half the dimension forces a
sub-bundle) and the Chern obstruction (a nonzero ``c_j`` above the virtual rank
forbids a bundle).  Everything else is reported as ``UNKNOWN``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .kring import (
    KClass,
    LineSum,
    SymKClass,
    chern_of_structured,
    class_difference,
    coords_of,
    popcount,
    rank,
    total_chern,
)


class Status(enum.Enum):
    POSITIVE = "Positive"
    NOT_POSITIVE = "NotPositive"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ZeroClass:
    pass


@dataclass(frozen=True)
class ThresholdRule:
    rank: int
    threshold: int
    # set when the smaller class is itself in the stable range, so a genuine
    # sub-bundle exists and not just a stable one
    genuine_subbundle: bool = False


@dataclass(frozen=True)
class ChernObstruction:
    degree: int
    rank: int
    monomial: tuple[int, ...] | range  # 1-based coordinates of the witnessing monomial
    coefficient: int


@dataclass(frozen=True)
class NegativeRank:
    rank: int


@dataclass(frozen=True)
class NonzeroRankZero:
    pass


@dataclass(frozen=True)
class DistinctClasses:
    pass


@dataclass(frozen=True)
class NoRuleFired:
    rank: int
    threshold: int


Certificate = Union[
    ZeroClass, ThresholdRule, ChernObstruction, NegativeRank, NonzeroRankZero, DistinctClasses, NoRuleFired
]

_ALLOWED = {
    Status.POSITIVE: (ZeroClass, ThresholdRule),
    Status.NOT_POSITIVE: (ChernObstruction, NegativeRank, NonzeroRankZero, DistinctClasses),
    Status.UNKNOWN: (NoRuleFired,),
}


@dataclass(frozen=True)
class Verdict:
    value: Status
    certificate: Certificate

    def __post_init__(self):
        if not isinstance(self.certificate, _ALLOWED[self.value]):
            raise ValueError(f"{type(self.certificate).__name__} cannot certify {self.value}")

    @property
    def positive(self) -> bool:
        return self.value is Status.POSITIVE

    @property
    def not_positive(self) -> bool:
        return self.value is Status.NOT_POSITIVE

    @property
    def unknown(self) -> bool:
        return self.value is Status.UNKNOWN


def _as_dense(a):
    if isinstance(a, SymKClass):
        return a.expand()
    return a


def _max_coord(a) -> int:
    mask = a.support_mask()
    return mask.bit_length()


def effective_factor_count(a) -> int:
    """Number of coordinates that appear anywhere in the support of ``a``."""
    if isinstance(a, LineSum):
        return a.m  # avoids a 2^m-sized mask for huge stages
    return popcount(_as_dense(a).support_mask())


def decide_positive(a, n_factors: int) -> Verdict:
    """Decide whether ``a`` is the class of an honest bundle over ``(S^2)^n_factors``.

    Rules, first match wins: zero; negative rank; rank zero but nonzero; rank at
    least the effective factor count (stable range); a nonzero Chern class above
    the rank.  Otherwise UNKNOWN.
    """
    a = _as_dense(a)
    if not isinstance(a, (KClass, LineSum)):
        raise TypeError(f"cannot decide positivity of {type(a).__name__}")
    if isinstance(a, KClass) and a.n > n_factors and _max_coord(a) > n_factors:
        raise ValueError(f"class uses coordinate {_max_coord(a)} but only {n_factors} factors given")
    if isinstance(a, LineSum) and a.m > n_factors:
        raise ValueError(f"LineSum over {a.m} lines but only {n_factors} factors given")

    if a.is_zero():
        return Verdict(Status.POSITIVE, ZeroClass())
    r = rank(a)
    if r < 0:
        return Verdict(Status.NOT_POSITIVE, NegativeRank(r))
    if r == 0:
        return Verdict(Status.NOT_POSITIVE, NonzeroRankZero())
    k = effective_factor_count(a)
    if r >= k:
        return Verdict(Status.POSITIVE, ThresholdRule(r, k))
    obstruction = chern_obstruction(a)
    if obstruction is not None:
        return Verdict(Status.NOT_POSITIVE, obstruction)
    return Verdict(Status.UNKNOWN, NoRuleFired(r, k))


def chern_obstruction(a) -> ChernObstruction | None:
    """Highest-degree nonzero Chern class strictly above the virtual rank, if any."""
    r = rank(a)
    if isinstance(a, LineSum):
        top = chern_of_structured(a)
        if top > r:
            return ChernObstruction(top, r, range(1, top + 1), 1)
        return None
    c = total_chern(a)
    for j in range(c.top_degree(), r, -1):
        part = c.degree_part(j)
        if part:
            mono = min(part)
            return ChernObstruction(j, r, coords_of(mono), part[mono])
    return None


def decide_subequivalence(x, y, n_factors: int) -> Verdict:
    """Is ``x`` (equivalent to) a sub-bundle of ``y``?  Decided on ``y - x``."""
    _check_fits(x, n_factors)
    _check_fits(y, n_factors)
    verdict = decide_positive(class_difference(y, x, n_factors), n_factors)
    cert = verdict.certificate
    if isinstance(cert, ThresholdRule) and rank(x) >= n_factors:
        verdict = Verdict(Status.POSITIVE, ThresholdRule(cert.rank, cert.threshold, genuine_subbundle=True))
    return verdict


def _check_fits(a, n_factors: int) -> None:
    if isinstance(a, (KClass, SymKClass)) and a.n != n_factors:
        raise ValueError(f"class over {a.n} factors, expected {n_factors}")
    if isinstance(a, LineSum) and a.m > n_factors:
        raise ValueError(f"LineSum over {a.m} lines does not fit in {n_factors} factors")


def decide_cancellation(p_class, q_class, n_factors: int) -> Verdict:
    """Are projections with these classes Murray-von Neumann equivalent?

    Equal classes of rank at least ``n_factors`` (half the dimension) are; below
    that the stable-range theorem is silent.
    """
    _check_fits(p_class, n_factors)
    _check_fits(q_class, n_factors)
    if not class_difference(p_class, q_class, n_factors).is_zero():
        return Verdict(Status.NOT_POSITIVE, DistinctClasses())
    r = rank(p_class)
    if r >= n_factors:
        return Verdict(Status.POSITIVE, ThresholdRule(r, n_factors, genuine_subbundle=True))
    return Verdict(Status.UNKNOWN, NoRuleFired(r, n_factors))


@dataclass(frozen=True)
class PerforationWitness:
    x: KClass
    multiple: int
    x_verdict: Verdict
    multiple_verdict: Verdict


def perforation_witness_search(classes, n_factors: int, max_multiple: int) -> PerforationWitness | None:
    """First ``x`` (input order) and smallest ``k`` with ``k*x`` positive but ``x`` not."""
    if max_multiple < 2:
        raise ValueError("max_multiple must be at least 2")
    for x in classes:
        vx = decide_positive(x, n_factors)
        if not vx.not_positive:
            continue
        for k in range(2, max_multiple + 1):
            vk = decide_positive(x * k, n_factors)
            if vk.positive:
                return PerforationWitness(x, k, vx, vk)
    return None
