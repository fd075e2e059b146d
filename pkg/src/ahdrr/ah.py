"""Semi-homogeneous building blocks, diagonal connecting maps and their invariants."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Union

from .kring import (
    BlockEmbedding,
    KClass,
    LineSum,
    SymKClass,
    UnsupportedVariantError,
    _check_embedding,
    pullback_coord_projection,
    rank,
)

# ProjBlocks families larger than this are never expanded into explicit maps
MAX_EXPANDED_PROJECTIONS = 100_000


@dataclass(frozen=True)
class SphereProduct:
    n_factors: int

    def __post_init__(self):
        if self.n_factors < 0:
            raise ValueError("n_factors must be nonnegative")

    @property
    def dim(self) -> int:
        return 2 * self.n_factors


@dataclass(frozen=True)
class AbstractCW:
    """A finite CW complex known only through its dimension; no K-theory attached."""

    dim: int

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("dim must be nonnegative")


Space = Union[SphereProduct, AbstractCW]


@dataclass(frozen=True)
class Summand:
    """``p (C(X) (x) K) p`` with ``rank(p) = unit_rank``."""

    space: Space
    unit_rank: int

    def __post_init__(self):
        if self.unit_rank < 1:
            raise ValueError("unit_rank must be at least 1")

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.dim, self.unit_rank)


def sphere_summand(n_factors: int, unit_rank: int) -> Summand:
    return Summand(SphereProduct(n_factors), unit_rank)


def cw_summand(dim: int, unit_rank: int) -> Summand:
    return Summand(AbstractCW(dim), unit_rank)


@dataclass(frozen=True)
class BuildingBlock:
    summands: tuple[Summand, ...]

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(self.summands))
        if not self.summands:
            raise ValueError("a building block needs at least one summand")

    def __len__(self):
        return len(self.summands)


@dataclass(frozen=True)
class Proj:
    """Eigenvalue map ``f -> f o pi`` for a coordinate projection onto ``embedding``."""

    source: int
    embedding: Sequence[int]  # 1-based target coordinate of each source coordinate

    def __post_init__(self):
        if not isinstance(self.embedding, (range, BlockEmbedding)):
            object.__setattr__(self, "embedding", tuple(self.embedding))


@dataclass(frozen=True)
class ProjBlocks:
    """``count`` coordinate projections onto consecutive blocks of the target.

    Projection ``j`` sends the source's coordinates onto target coordinates
    ``offset + j*L + 1 .. offset + (j+1)*L`` where ``L`` is the source factor
    count.  This keeps maps with astronomically many eigenvalues representable.
    """

    source: int
    count: int
    offset: int = 0

    def __post_init__(self):
        if self.count < 1 or self.offset < 0:
            raise ValueError("count must be positive and offset nonnegative")

    def embedding(self, j: int, source_n: int) -> BlockEmbedding:
        return BlockEmbedding(self.offset + j * source_n, source_n)

    def expand(self, source_n: int) -> list[Proj]:
        if self.count > MAX_EXPANDED_PROJECTIONS:
            raise UnsupportedVariantError(f"refusing to expand {self.count} projections")
        return [Proj(self.source, self.embedding(j, source_n)) for j in range(self.count)]


@dataclass(frozen=True)
class Eval:
    """Eigenvalue map ``f -> f(x)`` at a point; the label is opaque."""

    source: int
    point: str = ""


EigenvalueMap = Union[Proj, ProjBlocks, Eval]


def multiplicity(e: EigenvalueMap) -> int:
    return e.count if isinstance(e, ProjBlocks) else 1


@dataclass(frozen=True)
class BlockMap:
    """Diagonal map between building blocks: one list of eigenvalue maps per target summand."""

    source: BuildingBlock
    target: BuildingBlock
    components: tuple[tuple[EigenvalueMap, ...], ...]
    unital: bool = True
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        comps = tuple(tuple(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != len(self.target):
            raise ValueError(f"{len(comps)} component lists for {len(self.target)} target summands")
        for t, (summand, maps) in enumerate(zip(self.target.summands, comps)):
            total = 0
            for e in maps:
                if not 0 <= e.source < len(self.source):
                    raise ValueError(f"target {t}: source summand {e.source} does not exist")
                src = self.source.summands[e.source]
                total += src.unit_rank * multiplicity(e)
                if isinstance(e, (Proj, ProjBlocks)):
                    if not isinstance(src.space, SphereProduct) or not isinstance(summand.space, SphereProduct):
                        raise ValueError(f"target {t}: coordinate projections need sphere-product spaces")
                if isinstance(e, Proj):
                    _check_embedding(src.space.n_factors, summand.space.n_factors, e.embedding)
                elif isinstance(e, ProjBlocks):
                    end = e.offset + e.count * src.space.n_factors
                    if end > summand.space.n_factors:
                        raise ValueError(f"target {t}: projection blocks reach coordinate {end}")
            if self.unital and total != summand.unit_rank:
                raise ValueError(f"target {t}: eigenvalue ranks sum to {total}, unit rank is {summand.unit_rank}")
            if not self.unital and total > summand.unit_rank:
                raise ValueError(f"target {t}: eigenvalue ranks {total} exceed unit rank {summand.unit_rank}")

    def eigenvalue_count(self, target: int = 0) -> int:
        return sum(multiplicity(e) for e in self.components[target])


@dataclass(frozen=True)
class InductiveSystem:
    blocks: tuple[BuildingBlock, ...]
    maps: tuple[BlockMap, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.blocks:
            raise ValueError("an inductive system needs at least one block")
        if len(self.maps) != len(self.blocks) - 1:
            raise ValueError(f"{len(self.blocks)} blocks need {len(self.blocks) - 1} maps, got {len(self.maps)}")
        for i, m in enumerate(self.maps):
            if m.source != self.blocks[i] or m.target != self.blocks[i + 1]:
                raise ValueError(f"map {i} does not connect blocks {i} and {i + 1}")


# ---------------------------------------------------------------------------
# dimension-rank ratio and stable rank


def drr_of_block(b: BuildingBlock) -> Fraction:
    """``max_j dim(X_j) / rank(p_j)``."""
    return max(s.ratio for s in b.summands)


@dataclass(frozen=True)
class SystemDrr:
    stage_ratios: tuple[Fraction, ...]
    tail_from: int
    reported_limsup: Fraction  # an upper bound for drr of the limit, not the limit invariant itself


def drr_of_system(s: InductiveSystem, tail_from: int = 0) -> SystemDrr:
    ratios = tuple(drr_of_block(b) for b in s.blocks)
    if not 0 <= tail_from < len(ratios):
        raise ValueError(f"tail_from {tail_from} outside 0..{len(ratios) - 1}")
    return SystemDrr(ratios, tail_from, max(ratios[tail_from:]))


def direct_sum(a: BuildingBlock, b: BuildingBlock) -> BuildingBlock:
    return BuildingBlock(a.summands + b.summands)


def matrix_amplify(b: BuildingBlock, k: int) -> BuildingBlock:
    if k < 1:
        raise ValueError("k must be at least 1")
    return BuildingBlock(tuple(Summand(s.space, s.unit_rank * k) for s in b.summands))


def _product_space(x: Space, y: Space) -> Space:
    if isinstance(x, SphereProduct) and isinstance(y, SphereProduct):
        return SphereProduct(x.n_factors + y.n_factors)
    return AbstractCW(x.dim + y.dim)


def tensor_blocks(a: BuildingBlock, b: BuildingBlock) -> BuildingBlock:
    """All pairs ``C(X x Y)`` with ranks multiplied."""
    return BuildingBlock(
        tuple(
            Summand(_product_space(s.space, t.space), s.unit_rank * t.unit_rank)
            for s in a.summands
            for t in b.summands
        )
    )


def nistor_stable_rank(b: BuildingBlock) -> int:
    """``max_j ceil(floor(dim_j / 2) / rank_j) + 1``."""
    return max(ceil(Fraction(s.dim // 2, s.unit_rank)) + 1 for s in b.summands)


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    drr: Fraction
    half_sr_minus_one: Fraction


def drr_sr_bound_check(b: BuildingBlock) -> BoundCheck:
    """Compare ``drr(b)`` with ``sr(b)/2 - 1``."""
    d = drr_of_block(b)
    rhs = Fraction(nistor_stable_rank(b), 2) - 1
    return BoundCheck(d >= rhs, d, rhs)


# ---------------------------------------------------------------------------
# K_0


def _line_intervals(embedding, m: int) -> list[tuple[int, int]]:
    """Image of coordinates ``1..m`` under ``embedding`` as closed intervals."""
    if m == 0:
        return []
    if isinstance(embedding, BlockEmbedding):
        return [embedding.interval(m)]
    if isinstance(embedding, range) and embedding.step == 1:
        return [(embedding.start, embedding.start + m - 1)]
    coords = sorted(embedding[i] for i in range(m))
    out = [[coords[0], coords[0]]]
    for c in coords[1:]:
        if c == out[-1][1] + 1:
            out[-1][1] = c
        else:
            out.append([c, c])
    return [tuple(iv) for iv in out]


def _dense(cls, source_n: int):
    if isinstance(cls, SymKClass):
        cls = cls.expand()
    if cls.n != source_n:
        raise ValueError(f"class over {cls.n} factors on a {source_n}-factor summand")
    return cls


def induced_k0_map(m: BlockMap, classes: Sequence) -> list:
    """Push per-source-summand classes through a diagonal map.

    A projection contributes a coordinate pullback; a point evaluation contributes
    ``rank(x)`` copies of the trivial line.  LineSum inputs stay structured when
    their pulled-back lines tile the target's coordinates exactly.
    """
    if len(classes) != len(m.source):
        raise ValueError(f"{len(classes)} classes for {len(m.source)} source summands")
    for s, cls in zip(m.source.summands, classes):
        if isinstance(s.space, AbstractCW):
            raise ValueError("K_0 is not modelled over abstract CW summands")
        if isinstance(cls, LineSum) and cls.m > s.space.n_factors:
            raise ValueError(f"LineSum over {cls.m} lines on {s.space.n_factors} factors")
    out = []
    for summand, maps in zip(m.target.summands, m.components):
        target_n = summand.space.n_factors
        constant = 0
        lines: list[tuple[int, int]] = []
        dense: list[KClass] = []
        for e in maps:
            cls = classes[e.source]
            if isinstance(e, Eval):
                constant += rank(cls)
                continue
            src_n = m.source.summands[e.source].space.n_factors
            if isinstance(cls, LineSum):
                constant += multiplicity(e) * (cls.rank - cls.m)
                if isinstance(e, ProjBlocks):
                    if cls.m == src_n:
                        if cls.m:
                            lines.append((e.offset + 1, e.offset + e.count * src_n))
                    else:
                        for p in e.expand(src_n):
                            lines += _line_intervals(p.embedding, cls.m)
                else:
                    lines += _line_intervals(e.embedding, cls.m)
                continue
            cls = _dense(cls, src_n)
            projs = e.expand(src_n) if isinstance(e, ProjBlocks) else [e]
            dense += [pullback_coord_projection(cls, target_n, p.embedding) for p in projs]
        out.append(_assemble(target_n, constant, lines, dense))
    return out


def _assemble(n: int, constant: int, lines: list[tuple[int, int]], dense: list[KClass]):
    ordered = sorted(lines)
    tiles = not dense
    nxt = 1
    for lo, hi in ordered:
        if lo != nxt:
            tiles = False
            break
        nxt = hi + 1
    if tiles:
        # constant + t_1 + ... + t_M  ==  LineSum(M, constant)
        return LineSum(nxt - 1, constant)
    # each line [L_i] = 1 + t_i carries its own trivial summand
    total = KClass.constant(n, constant + sum(hi - lo + 1 for lo, hi in ordered))
    for lo, hi in ordered:
        total = total + KClass(n, {1 << (i - 1): 1 for i in range(lo, hi + 1)})
    for d in dense:
        total = total + d
    return total


def summand_state_spread(b: BuildingBlock, classes: Sequence, global_state) -> Fraction:
    """``max_l |rank(x_l)/rank(p_l) - s(x)|``."""
    g = Fraction(global_state)
    if len(classes) != len(b):
        raise ValueError(f"{len(classes)} classes for {len(b)} summands")
    return max(abs(Fraction(rank(c), s.unit_rank) - g) for s, c in zip(b.summands, classes))


def compose_maps(first: BlockMap, second: BlockMap) -> BlockMap:
    """``second o first`` as a diagonal map (eigenvalue lists multiply out)."""
    if first.target != second.source:
        raise ValueError("maps are not composable")

    def explicit(block: BuildingBlock, maps):
        out = []
        for e in maps:
            if isinstance(e, ProjBlocks):
                out += e.expand(block.summands[e.source].space.n_factors)
            else:
                out.append(e)
        return out

    comps = []
    for maps in second.components:
        new = []
        for e in explicit(first.target, maps):
            for f in explicit(first.source, first.components[e.source]):
                if isinstance(e, Eval):
                    new.append(Eval(f.source, f"{e.point}|{getattr(f, 'point', '')}"))
                elif isinstance(f, Eval):
                    new.append(Eval(f.source, f.point))
                else:
                    new.append(Proj(f.source, tuple(e.embedding[j - 1] for j in f.embedding)))
        comps.append(tuple(new))
    return BlockMap(first.source, second.target, tuple(comps), unital=first.unital and second.unital)

