"""Exact arithmetic in K^0((S^2)^n) = Z[t_1..t_n]/(t_i^2) and its cohomology twin.

Monomials are squarefree, so a monomial is a subset of {1..n}; we store it as a
bitmask (bit ``i-1`` for coordinate ``i``).  Coefficients are Python ints.

Two cheaper encodings ride alongside the dense one:

* :class:`SymKClass` keeps one coefficient per subset size, for classes invariant
  under coordinate permutations.
* :class:`LineSum` is ``r*[theta_1] + [L_1] + ... + [L_m]``, i.e. the class
  ``(r + m) + t_1 + ... + t_m``, which is all the inductive-limit stages need.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from math import comb, factorial

MAX_DENSE_FACTORS = 63


class DimensionMismatchError(ValueError):
    """Operands live over different numbers of sphere factors."""


class UnsupportedVariantError(TypeError):
    """An operation received a class representation it cannot handle."""


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(subset: Iterable[int]) -> int:
    """Bitmask for a collection of 1-based coordinates."""
    mask = 0
    for i in subset:
        if i < 1:
            raise ValueError(f"coordinates are 1-based, got {i}")
        mask |= 1 << (i - 1)
    return mask


def coords_of(mask: int) -> tuple[int, ...]:
    """1-based coordinates of a bitmask, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


class _SquareFree:
    """Shared machinery for elements of Z[x_1..x_n]/(x_i^2)."""

    __slots__ = ("n", "_coeffs", "_hash")

    _symbol = "x"

    def __init__(self, n: int, coeffs: Mapping[int, int] | None = None):
        if n < 0:
            raise ValueError("number of factors must be nonnegative")
        if n > MAX_DENSE_FACTORS:
            raise ValueError(
                f"dense classes support at most {MAX_DENSE_FACTORS} factors, got {n}; "
                "use SymKClass or LineSum"
            )
        full = (1 << n) - 1
        clean = {}
        for mask, c in (coeffs or {}).items():
            mask = int(mask)
            if mask < 0 or mask & ~full:
                raise ValueError(f"monomial {coords_of(mask)} outside {n} factors")
            if c:
                clean[mask] = int(c)
        self.n = n
        self._coeffs = clean
        self._hash = None

    # construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, n: int):
        return cls(n)

    @classmethod
    def constant(cls, n: int, value: int):
        return cls(n, {0: value})

    @classmethod
    def one(cls, n: int):
        return cls(n, {0: 1})

    @classmethod
    def generator(cls, n: int, i: int):
        if not 1 <= i <= n:
            raise ValueError(f"generator index {i} outside 1..{n}")
        return cls(n, {1 << (i - 1): 1})

    @classmethod
    def from_terms(cls, n: int, terms: Mapping[Iterable[int], int]):
        """Build from ``{(1, 2): 3, (): 1}``-style terms with 1-based coordinates."""
        coeffs: dict[int, int] = {}
        for subset, c in terms.items():
            subset = tuple(subset)
            if len(set(subset)) != len(subset):
                raise ValueError(f"repeated coordinate in {subset}")
            mask = mask_of(subset)
            coeffs[mask] = coeffs.get(mask, 0) + c
        return cls(n, coeffs)

    # accessors -------------------------------------------------------------

    @property
    def coeffs(self) -> dict[int, int]:
        return dict(self._coeffs)

    def coeff(self, subset: Iterable[int] | int) -> int:
        mask = subset if isinstance(subset, int) else mask_of(subset)
        return self._coeffs.get(mask, 0)

    def items(self):
        return sorted(self._coeffs.items())

    def support_mask(self) -> int:
        """Union of every coordinate that appears in a nonzero monomial."""
        out = 0
        for mask in self._coeffs:
            out |= mask
        return out

    def degree_part(self, k: int) -> dict[int, int]:
        return {m: c for m, c in self._coeffs.items() if popcount(m) == k}

    def top_degree(self) -> int:
        """Largest subset size with a nonzero coefficient (-1 for zero)."""
        return max((popcount(m) for m in self._coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self._coeffs

    # arithmetic ------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, type(self)):
            return NotImplemented
        if other.n != self.n:
            raise DimensionMismatchError(f"{self.n} factors vs {other.n} factors")
        return other

    def __add__(self, other):
        if isinstance(other, int):
            other = type(self).constant(self.n, other)
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            out[m] = out.get(m, 0) + c
        return type(self)(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)(self.n, {m: -c for m, c in self._coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = type(self).constant(self.n, other)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return type(self)(self.n, {m: c * other for m, c in self._coeffs.items()})
        if self._check(other) is NotImplemented:
            return NotImplemented
        return type(self)(self.n, _disjoint_convolve(self.n, self._coeffs, other._coeffs))

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = type(self).one(self.n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self):
        """Inverse of a unit with constant term +-1, via the nilpotent geometric series."""
        c0 = self._coeffs.get(0, 0)
        if c0 not in (1, -1):
            raise ValueError("only elements with constant term +-1 are invertible")
        nil = self * c0 - 1  # x = c0*self - 1 is nilpotent; self^-1 = c0 * (1+x)^-1
        out = type(self).one(self.n)
        term = type(self).one(self.n)
        for _ in range(self.n):
            term = term * (-nil)
            if term.is_zero():
                break
            out = out + term
        return out * c0

    def __eq__(self, other):
        if isinstance(other, int):
            return self._coeffs == ({0: other} if other else {})
        if not isinstance(other, type(self)):
            return NotImplemented
        return self.n == other.n and self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__, self.n, frozenset(self._coeffs.items())))
        return self._hash

    def __repr__(self):
        if not self._coeffs:
            return f"{type(self).__name__}(n={self.n}, 0)"
        parts = []
        for mask, c in self.items():
            mono = "".join(f"{self._symbol}{i}" for i in coords_of(mask))
            parts.append(f"{c}{'*' + mono if mono else ''}")
        return f"{type(self).__name__}(n={self.n}, {' + '.join(parts)})"


def _disjoint_convolve(n: int, a: Mapping[int, int], b: Mapping[int, int]) -> dict[int, int]:
    """out[U] = sum over disjoint S | T = U of a[S] * b[T]."""
    out: dict[int, int] = {}
    if len(a) > len(b):
        a, b = b, a
    full = (1 << n) - 1
    b_items = list(b.items())
    for s, x in a.items():
        free = full & ~s
        # walk whichever is shorter: b's support or the submasks of the complement
        if len(b_items) <= (1 << (n - popcount(s))):
            for t, y in b_items:
                if not s & t:
                    u = s | t
                    out[u] = out.get(u, 0) + x * y
        else:
            for t in submasks(free):
                y = b.get(t)
                if y:
                    u = s | t
                    out[u] = out.get(u, 0) + x * y
    return {u: c for u, c in out.items() if c}


class KClass(_SquareFree):
    """Element of K^0((S^2)^n); the monomial ``t_S`` is the product of Bott elements over S."""

    __slots__ = ()
    _symbol = "t"


class CohClass(_SquareFree):
    """Element of H^even((S^2)^n; Z); a size-k monomial sits in degree 2k."""

    __slots__ = ()
    _symbol = "u"

    def chern(self, j: int) -> dict[int, int]:
        """The degree-2j component."""
        return self.degree_part(j)


def kclass_mul(a: KClass, b: KClass) -> KClass:
    return a * b


def rank(a) -> int:
    """Virtual dimension: the constant coefficient (or ``m + r`` for a LineSum)."""
    if isinstance(a, LineSum):
        return a.rank
    if isinstance(a, SymKClass):
        return a.by_size[0]
    return a.coeff(0)


# ---------------------------------------------------------------------------
# symmetric classes


@dataclass(frozen=True)
class SymKClass:
    """Permutation-invariant class: every size-k monomial has coefficient ``by_size[k]``."""

    n: int
    by_size: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("number of factors must be nonnegative")
        by_size = tuple(int(c) for c in self.by_size)
        if len(by_size) != self.n + 1:
            raise ValueError(f"by_size needs {self.n + 1} entries, got {len(by_size)}")
        object.__setattr__(self, "by_size", by_size)

    def expand(self) -> KClass:
        coeffs = {}
        for mask in range(1 << self.n):
            c = self.by_size[popcount(mask)]
            if c:
                coeffs[mask] = c
        return KClass(self.n, coeffs)

    @classmethod
    def compress(cls, a: KClass) -> SymKClass:
        by_size = [None] * (a.n + 1)
        for mask in range(1 << a.n):
            k = popcount(mask)
            c = a.coeff(mask)
            if by_size[k] is None:
                by_size[k] = c
            elif by_size[k] != c:
                raise ValueError("class is not invariant under coordinate permutations")
        return cls(a.n, tuple(by_size))

    def __add__(self, other: SymKClass) -> SymKClass:
        _same_n(self, other)
        return SymKClass(self.n, tuple(x + y for x, y in zip(self.by_size, other.by_size)))

    def __mul__(self, other: SymKClass) -> SymKClass:
        return sym_mul(self, other)


def _same_n(a, b):
    if a.n != b.n:
        raise DimensionMismatchError(f"{a.n} factors vs {b.n} factors")


def sym_mul(a: SymKClass, b: SymKClass) -> SymKClass:
    # a size-k monomial splits as S | T with |S| = i in C(k, i) ways
    _same_n(a, b)
    n = a.n
    out = [0] * (n + 1)
    for k in range(n + 1):
        out[k] = sum(comb(k, i) * a.by_size[i] * b.by_size[k - i] for i in range(k + 1))
    return SymKClass(n, tuple(out))


# ---------------------------------------------------------------------------
# structured classes


@dataclass(frozen=True)
class LineSum:
    """``offset*[theta_1] + [L_1] + ... + [L_m]``: the class ``(offset + m) + t_1 + ... + t_m``.

    ``LineSum(m, 0)`` is the external product of m Hopf bundles; ``LineSum(m, -1)``
    is the non-positive stage class of the Villadsen construction.
    """

    m: int
    offset: int = 0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("line count must be nonnegative")

    @property
    def rank(self) -> int:
        return self.m + self.offset

    def is_zero(self) -> bool:
        return self.m == 0 and self.offset == 0

    def support_mask(self) -> int:
        return (1 << self.m) - 1

    def expand(self, n: int | None = None) -> KClass:
        n = self.m if n is None else n
        if n < self.m:
            raise DimensionMismatchError(f"LineSum over {self.m} lines does not fit in {n} factors")
        coeffs = {0: self.rank}
        for i in range(self.m):
            coeffs[1 << i] = 1
        return KClass(n, coeffs)

    def to_sym(self) -> SymKClass:
        """Symmetric encoding; valid over exactly ``m`` factors."""
        by_size = [0] * (self.m + 1)
        by_size[0] = self.rank
        if self.m:
            by_size[1] = 1
        return SymKClass(self.m, tuple(by_size))

    def __add__(self, other):
        if isinstance(other, int):
            return LineSum(self.m, self.offset + other)
        if isinstance(other, LineSum) and other.m == 0:
            return LineSum(self.m, self.offset + other.offset)
        if isinstance(other, LineSum) and self.m == 0:
            return LineSum(other.m, self.offset + other.offset)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            return LineSum(self.m, self.offset - other)
        if isinstance(other, LineSum):
            if other.m == 0:
                return LineSum(self.m, self.offset - other.offset)
            if other.m == self.m:
                return LineSum(0, self.rank - other.rank)
        return NotImplemented


def class_difference(y, x, n: int):
    """``y - x`` keeping the LineSum encoding when possible, else dense over n factors."""
    if isinstance(y, LineSum) and isinstance(x, LineSum):
        diff = y.__sub__(x)
        if diff is not NotImplemented:
            return diff
    if isinstance(y, LineSum):
        y = y.expand(n)
    if isinstance(x, LineSum):
        x = x.expand(n)
    if isinstance(y, SymKClass):
        y = y.expand()
    if isinstance(x, SymKClass):
        x = x.expand()
    return y - x


# ---------------------------------------------------------------------------
# line-bundle basis and total Chern class


def line_basis_decompose(a: KClass) -> dict[int, int]:
    """Coefficients alpha with ``a = sum_S alpha_S [L_S]``, ``[L_S] = prod_{i in S}(1 + t_i)``.

    Moebius inversion on the subset lattice:
    ``alpha_S = sum_{T >= S} (-1)^{|T - S|} a_T``.
    """
    alpha: dict[int, int] = {}
    for t, c in a._coeffs.items():
        for s in submasks(t):
            sign = -1 if popcount(t ^ s) & 1 else 1
            alpha[s] = alpha.get(s, 0) + sign * c
    return {s: c for s, c in alpha.items() if c}


def line_basis_compose(n: int, alpha: Mapping[int, int]) -> KClass:
    """Inverse of :func:`line_basis_decompose`."""
    coeffs: dict[int, int] = {}
    for s, c in alpha.items():
        for u in submasks(s):
            coeffs[u] = coeffs.get(u, 0) + c
    return KClass(n, coeffs)


def total_chern(a: KClass) -> CohClass:
    """Total Chern class ``prod_S (1 + u(S))^{alpha_S}``.

    Evaluated through its logarithm: in the squarefree ring ``u(S)^k = k! e_k(u_S)``,
    so ``log c(a)`` has coefficient ``(-1)^{k+1} (k-1)! a_U`` on each nonempty
    monomial U with |U| = k (the alpha sum over supersets of U collapses back to
    ``a_U``).  Exponentiating a squarefree nilpotent is a sum over set partitions,
    which stays in the integers.  :func:`total_chern_product` is the literal
    product and serves as the cross-check.
    """
    log = {}
    for u, c in a._coeffs.items():
        k = popcount(u)
        if k:
            log[u] = (-1 if k % 2 == 0 else 1) * factorial(k - 1) * c
    return CohClass(a.n, _exp_squarefree(log))


def _exp_squarefree(log: Mapping[int, int]) -> dict[int, int]:
    # exp(L)_W = sum over set partitions of W into blocks B of prod L_B;
    # recurse on the block holding the lowest coordinate of W.
    blocks = list(log.items())
    memo: dict[int, int] = {0: 1}

    def value(w: int) -> int:
        if w in memo:
            return memo[w]
        low = w & -w
        total = 0
        for b, c in blocks:
            if b & low and not b & ~w:
                total += c * value(w & ~b)
        memo[w] = total
        return total

    # only unions of pairwise disjoint blocks can be nonzero
    reachable = {0}
    for b, _ in blocks:
        reachable |= {w | b for w in reachable if not w & b}
    out = {}
    for w in reachable:
        v = value(w)
        if v:
            out[w] = v
    return out


def total_chern_product(a: KClass) -> CohClass:
    """Total Chern class as the literal product over the line-bundle basis."""
    out = CohClass.one(a.n)
    for s, alpha in sorted(line_basis_decompose(a).items()):
        if s == 0:
            continue
        factor = CohClass(a.n, {0: 1, **{1 << (i - 1): 1 for i in coords_of(s)}})
        out = out * factor**alpha
    return out


def chern_of_structured(a) -> int:
    """Top nonvanishing Chern degree of a LineSum, without expanding it.

    ``c(LineSum(m, r)) = prod_{i<=m} (1 + u_i)``, whose top term is ``u_1...u_m``.
    """
    if not isinstance(a, LineSum):
        raise UnsupportedVariantError(f"closed-form Chern degree needs a LineSum, got {type(a).__name__}")
    return a.m


# ---------------------------------------------------------------------------
# coordinate pullbacks


@dataclass(frozen=True)
class BlockEmbedding:
    """Lazy injective embedding sending coordinate ``i`` to ``offset + i``.

    Used where the factor counts are far too large to list coordinate by coordinate.
    """

    offset: int
    length: int

    def __post_init__(self):
        if self.offset < 0 or self.length < 0:
            raise ValueError("offset and length must be nonnegative")

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return self.offset + i + 1

    def __iter__(self):
        for i in range(self.length):
            yield self.offset + i + 1

    def interval(self, m: int | None = None) -> tuple[int, int]:
        """Image of coordinates ``1..m`` as a closed interval."""
        m = self.length if m is None else m
        return self.offset + 1, self.offset + m


def embedding_size(embedding) -> int:
    if isinstance(embedding, BlockEmbedding):
        return embedding.length
    return len(embedding)


def _check_embedding(source_n: int, target_n: int, embedding) -> None:
    if isinstance(embedding, BlockEmbedding):
        if embedding.length != source_n or embedding.offset + embedding.length > target_n:
            raise ValueError(f"{embedding} does not embed {source_n} factors into {target_n}")
        return
    if len(embedding) != source_n:
        raise ValueError(f"embedding has {len(embedding)} entries for {source_n} factors")
    if len(set(embedding)) != len(embedding):
        raise ValueError("embedding is not injective")
    for j in embedding:
        if not 1 <= j <= target_n:
            raise ValueError(f"embedding target {j} outside 1..{target_n}")


def pullback_coord_projection(a: KClass, target_n: int, embedding: Sequence[int]) -> KClass:
    """Pull ``a`` back along the projection onto the coordinates ``embedding``.

    Coordinate ``i`` of the source goes to coordinate ``embedding[i-1]`` of the target.
    """
    _check_embedding(a.n, target_n, embedding)
    coeffs = {}
    for mask, c in a._coeffs.items():
        coeffs[mask_of(embedding[i - 1] for i in coords_of(mask))] = c
    return KClass(target_n, coeffs)
