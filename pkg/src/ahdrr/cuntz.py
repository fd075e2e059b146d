"""Finite rank-function model of Cuntz comparison over a homogeneous algebra.

A positive element is recorded by its rank on each region of a fixed partition
of the base space, plus (optionally) the K-theory class it restricts to on a
marked region homeomorphic to ``S^{2m}``.  Comparison ``x <= y`` means: ranks
dominate regionwise, and on the marked region the class difference lies in the
positive cone of :class:`~ahdrr.ordered.SphereEven`.  This is the shape of every
failure argument the radius-of-comparison lower bound relies on; it is not the
analytic Cuntz relation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .ordered import CheckResult, SphereEven, _run
from .positivity import Status

OUTSIDE, COLLAR, MARKED = "X\\V", "V\\Y", "Y"


class PartitionMismatchError(ValueError):
    """Elements or measures defined over different region partitions."""


@dataclass(frozen=True)
class RegionPartition:
    regions: tuple[str, ...]
    ambient_dim: int
    marked_region: str | None = None
    marked_m: int | None = None  # the marked region is S^(2 * marked_m)

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if len(set(self.regions)) != len(self.regions):
            raise ValueError(f"duplicate region labels in {self.regions}")
        if self.ambient_dim < 0:
            raise ValueError("ambient_dim must be nonnegative")
        if (self.marked_region is None) != (self.marked_m is None):
            raise ValueError("marked_region and marked_m go together")
        if self.marked_region is not None:
            if self.marked_region not in self.regions:
                raise ValueError(f"marked region {self.marked_region!r} is not a region")
            if self.marked_m < 0 or 2 * self.marked_m >= self.ambient_dim:
                raise ValueError(f"need 0 <= 2m < {self.ambient_dim}, got m = {self.marked_m}")

    def index(self, label: str) -> int:
        return self.regions.index(label)

    def cone(self) -> SphereEven:
        if self.marked_m is None:
            raise ValueError("partition has no marked region")
        return SphereEven(self.marked_m, 1)


def three_region_partition(ambient_dim: int, m: int) -> RegionPartition:
    """``X\\V``, a collar ``V\\Y`` and the marked sphere ``Y = S^{2m}``."""
    return RegionPartition((OUTSIDE, COLLAR, MARKED), ambient_dim, MARKED, m)


@dataclass(frozen=True)
class CuntzElementModel:
    partition: RegionPartition
    rank_per_region: tuple[int, ...]
    restriction_class: tuple[int, int] | None = None  # (rank, Bott coordinate) on the marked region

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.rank_per_region)
        object.__setattr__(self, "rank_per_region", ranks)
        if len(ranks) != len(self.partition.regions):
            raise ValueError(f"{len(ranks)} ranks for {len(self.partition.regions)} regions")
        if any(r < 0 for r in ranks):
            raise ValueError("ranks must be nonnegative")
        if self.restriction_class is not None:
            cls = tuple(int(v) for v in self.restriction_class)
            object.__setattr__(self, "restriction_class", cls)
            if self.partition.marked_region is None:
                raise ValueError("restriction class given but the partition has no marked region")
            marked_rank = ranks[self.partition.index(self.partition.marked_region)]
            if len(cls) != 2 or cls[0] != marked_rank:
                raise ValueError(f"restriction class {cls} disagrees with marked-region rank {marked_rank}")

    def scale(self, k: int) -> CuntzElementModel:
        """``k``-fold direct sum of the element with itself."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        cls = None if self.restriction_class is None else tuple(k * v for v in self.restriction_class)
        return CuntzElementModel(self.partition, tuple(k * r for r in self.rank_per_region), cls)


@dataclass(frozen=True)
class MeasureModel:
    partition: RegionPartition
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(Fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != len(self.partition.regions):
            raise ValueError(f"{len(w)} weights for {len(self.partition.regions)} regions")
        if any(x < 0 for x in w) or sum(w) != 1:
            raise ValueError(f"weights {w} are not a probability vector")

    @classmethod
    def point_mass(cls, partition: RegionPartition, label: str) -> MeasureModel:
        i = partition.index(label)
        return cls(partition, tuple(Fraction(int(j == i)) for j in range(len(partition.regions))))


def point_masses(partition: RegionPartition) -> list[MeasureModel]:
    """Extreme points of the measure simplex."""
    return [MeasureModel.point_mass(partition, label) for label in partition.regions]


def ldf_pairing(e: CuntzElementModel, mu: MeasureModel, unit_rank: int) -> Fraction:
    """``d_mu(e) = sum_regions mu(region) * rank(e on region) / unit_rank``."""
    if e.partition != mu.partition:
        raise PartitionMismatchError("element and measure live on different partitions")
    if unit_rank < 1:
        raise ValueError("unit_rank must be at least 1")
    return sum((w * r for w, r in zip(mu.weights, e.rank_per_region)), Fraction(0)) / unit_rank


def cuntz_leq(x: CuntzElementModel, y: CuntzElementModel) -> Status:
    """Three-valued ``x <= y``: regionwise ranks, then the marked-region cone."""
    if x.partition != y.partition:
        raise PartitionMismatchError("elements live on different partitions")
    if any(a > b for a, b in zip(x.rank_per_region, y.rank_per_region)):
        return Status.NOT_POSITIVE
    if x.partition.marked_region is None:
        return Status.POSITIVE
    if x.restriction_class is None or y.restriction_class is None:
        return Status.UNKNOWN  # ranks alone do not settle the marked region
    diff = tuple(b - a for a, b in zip(x.restriction_class, y.restriction_class))
    return x.partition.cone().contains(diff)


# ---------------------------------------------------------------------------
# radius-of-comparison witnesses


DEGENERATE_NOTE = "m <= 1: the bound is 0, which every algebra satisfies"


@dataclass(frozen=True)
class RcWitness:
    partition: RegionPartition
    a_plus_v: CuntzElementModel
    b: CuntzElementModel
    m: int
    unit_rank: int
    bound: Fraction
    degenerate: bool = False
    note: str = ""


def rc_witness_build(ambient_dim: int, unit_rank: int) -> RcWitness:
    """Pair ``b <= a + v`` failing by rank gap ``(m-1)/unit_rank``, with ``m`` the largest ``2m < dim``.

    Regions are ``X\\V``, ``V\\Y``, ``Y``.  Ranks: ``a + v = (n, m + n, m)`` and
    ``b = (0, 1, 1)``; on ``Y`` the classes are ``[xi_m] = (m, 1)`` and ``[theta_1] = (1, 0)``.
    """
    n = ambient_dim
    if n < 1 or unit_rank < 1:
        raise ValueError("need ambient_dim >= 1 and unit_rank >= 1")
    m = (n - 1) // 2
    part = three_region_partition(n, m)
    a_plus_v = CuntzElementModel(part, (n, m + n, m), (m, 1))
    b = CuntzElementModel(part, (0, 1, 1), (1, 0))
    degenerate = m <= 1
    bound = Fraction(0) if degenerate else Fraction(m - 1, unit_rank)
    return RcWitness(part, a_plus_v, b, m, unit_rank, bound, degenerate, DEGENERATE_NOTE if degenerate else "")


@dataclass(frozen=True)
class GapCertificate:
    region: str
    gap: Fraction  # d(a + v) - d(b) at the point mass on ``region``


@dataclass(frozen=True)
class ConeFailure:
    difference: tuple[int, int]  # class of a + v minus class of b on the marked region
    m: int


@dataclass(frozen=True)
class WitnessVerification:
    verified: bool
    gap_certificate: tuple[GapCertificate, ...]
    failure_certificate: ConeFailure | None
    note: str = ""


def rc_witness_verify(w: RcWitness) -> WitnessVerification:
    """Every point mass sees a gap of at least ``bound``, yet ``b <= a + v`` fails on ``Y``.

    Pairing is affine in the measure, so point masses cover every probability measure.
    """
    if w.a_plus_v.partition != w.partition or w.b.partition != w.partition:
        raise PartitionMismatchError("witness elements do not share the witness partition")
    if w.partition.marked_region is None:
        raise ValueError("malformed witness: no marked region")
    gaps = tuple(
        GapCertificate(label, ldf_pairing(w.a_plus_v, mu, w.unit_rank) - ldf_pairing(w.b, mu, w.unit_rank))
        for label, mu in zip(w.partition.regions, point_masses(w.partition))
    )
    if w.degenerate:
        return WitnessVerification(True, gaps, None, DEGENERATE_NOTE)
    gaps_ok = all(g.gap >= w.bound for g in gaps)
    failure = None
    if cuntz_leq(w.b, w.a_plus_v) is Status.NOT_POSITIVE:
        diff = tuple(p - q for p, q in zip(w.a_plus_v.restriction_class, w.b.restriction_class))
        failure = ConeFailure(diff, w.m)
    return WitnessVerification(gaps_ok and failure is not None, gaps, failure)


def witness_amplify(w: RcWitness, k: int) -> RcWitness:
    """Same witness inside ``M_k``: unit rank times ``k``, bound divided by ``k``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return replace(w, unit_rank=w.unit_rank * k, bound=w.bound / k)


def check_r_comparison(elements, r, unit_rank: int) -> CheckResult:
    """r-comparison over all ordered pairs: a gap ``> r`` at every point mass must force ``x <= y``."""
    r = Fraction(r)
    elements = list(elements)
    pairs = [(x, y) for i, x in enumerate(elements) for j, y in enumerate(elements) if i != j]

    def gap_exceeds(p):
        x, y = p
        return all(
            ldf_pairing(y, mu, unit_rank) - ldf_pairing(x, mu, unit_rank) > r for mu in point_masses(x.partition)
        )

    return _run(pairs, gap_exceeds, lambda p: cuntz_leq(*p))


# ---------------------------------------------------------------------------
# almost unperforation


@dataclass(frozen=True)
class AupWitness:
    x: CuntzElementModel  # b = theta_1 cut down to V
    y: CuntzElementModel  # a = xi_2 cut down to V
    m: int  # m * x <= n * y with m > n ...
    n: int
    multiple_difference: tuple[int, int]  # n[a] - m[b] on the marked region
    single_difference: tuple[int, int]  # [a] - [b]
    verified: bool
    unit_rank: int = 1


def almost_unperforation_witness(ambient_dim: int = 5, unit_rank: int = 1) -> AupWitness:
    """``4<b> <= 3<a>`` while ``<b> <= <a>`` fails, over a marked ``S^4``."""
    if ambient_dim < 5:
        raise ValueError(f"need ambient dimension at least 5 to carry S^4, got {ambient_dim}")
    if unit_rank < 1:
        raise ValueError("unit_rank must be at least 1")
    part = three_region_partition(ambient_dim, 2)
    a = CuntzElementModel(part, (0, 2, 2), (2, 1))
    b = CuntzElementModel(part, (0, 1, 1), (1, 0))
    return _verify_aup(b, a, 4, 3, unit_rank)


def _verify_aup(x, y, m, n, unit_rank) -> AupWitness:
    multiple = tuple(n * q - m * p for p, q in zip(x.restriction_class, y.restriction_class))
    single = tuple(q - p for p, q in zip(x.restriction_class, y.restriction_class))
    ok = (
        m > n
        and cuntz_leq(x.scale(m), y.scale(n)) is Status.POSITIVE
        and cuntz_leq(x, y) is Status.NOT_POSITIVE
    )
    return AupWitness(x, y, m, n, multiple, single, ok, unit_rank)


def aup_amplify(w: AupWitness, k: int) -> AupWitness:
    """Re-verify the witness inside ``M_k``; comparison ignores the unit, so it survives."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return _verify_aup(w.x, w.y, w.m, w.n, w.unit_rank * k)


@dataclass(frozen=True)
class PerforationPair:
    x: CuntzElementModel
    y: CuntzElementModel
    m: int
    n: int


def almost_unperforated_check(elements, max_mn: int) -> PerforationPair | None:
    """First ``(x, y, m, n)`` with ``m > n``, ``m x <= n y`` certified and ``x <= y`` certified false.

    Pairs are visited in input order, then ``m`` ascending, then ``n`` ascending.
    UNKNOWN comparisons never produce a witness.
    """
    elements = list(elements)
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            if i == j or cuntz_leq(x, y) is not Status.NOT_POSITIVE:
                continue
            for m in range(2, max_mn + 1):
                for n in range(1, m):
                    if cuntz_leq(x.scale(m), y.scale(n)) is Status.POSITIVE:
                        return PerforationPair(x, y, m, n)
    return None
