"""Finite models of ordered abelian groups with order unit, and the r-property checkers.

Elements are integer tuples in the model's ambient group Z^d.  Cone membership is
three-valued (:class:`~ahdrr.positivity.Status`); an UNKNOWN membership never
counts as a failure of any property.

States are carried as a finite list of extreme states (linear functionals).  A
condition quantified over every state is affine in the state, so checking the
extreme ones is enough.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import sympy

from .kring import KClass
from .positivity import Status, decide_cancellation, decide_positive, decide_subequivalence

Vector = tuple[int, ...]
Functional = tuple[Fraction, ...]


class NoUniqueStateError(ValueError):
    """The model does not carry a single designated state."""


class NotInConeError(ValueError):
    """An element required to be positive is not certified positive."""


def _vec(x) -> Vector:
    return tuple(int(v) for v in x)


def _sub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def _scale(k: int, a: Vector) -> Vector:
    return tuple(k * x for x in a)


def _pair(f: Functional, x: Vector) -> Fraction:
    return sum((c * v for c, v in zip(f, x)), Fraction(0))


def _all(statuses) -> Status:
    statuses = list(statuses)
    if any(s is Status.NOT_POSITIVE for s in statuses):
        return Status.NOT_POSITIVE
    if all(s is Status.POSITIVE for s in statuses):
        return Status.POSITIVE
    return Status.UNKNOWN


# ---------------------------------------------------------------------------
# models


class OrderedGroupModel:
    """Common interface: ambient rank ``dim``, order ``unit``, cone oracle, extreme states."""

    dim: int
    unit: Vector

    def contains(self, x: Sequence[int]) -> Status:
        raise NotImplementedError

    def states(self) -> tuple[Functional, ...]:
        raise NotImplementedError

    def equivalent(self, p: Sequence[int], q: Sequence[int]) -> Status:
        """Would projections with these classes be Murray-von Neumann equivalent?"""
        return Status.NOT_POSITIVE if _vec(p) != _vec(q) else Status.UNKNOWN

    def subequivalent(self, p: Sequence[int], q: Sequence[int]) -> Status:
        """Is ``p`` equivalent to a subprojection of ``q``?  Defaults to ``q - p`` in the cone."""
        return self.contains(_sub(_vec(q), _vec(p)))

    def leq(self, x: Sequence[int], y: Sequence[int]) -> Status:
        return self.contains(_sub(_vec(y), _vec(x)))


@dataclass(frozen=True)
class SphereEven(OrderedGroupModel):
    """K_0 of a homogeneous algebra over S^{2m}: Z^2 = (rank, Bott coordinate).

    The cone is ``{(x, 0) : x >= 0}`` together with everything of rank at least m.
    """

    m: int
    unit_rank: int

    def __post_init__(self):
        if self.m < 0 or self.unit_rank < 1:
            raise ValueError("need m >= 0 and unit_rank >= 1")

    @property
    def dim(self) -> int:
        return 2

    @property
    def unit(self) -> Vector:
        return (self.unit_rank, 0)

    def contains(self, x) -> Status:
        r, y = _vec(x)
        ok = (y == 0 and r >= 0) or r >= self.m
        return Status.POSITIVE if ok else Status.NOT_POSITIVE

    def states(self):
        return ((Fraction(1, self.unit_rank), Fraction(0)),)

    def equivalent(self, p, q) -> Status:
        p, q = _vec(p), _vec(q)
        if p != q:
            return Status.NOT_POSITIVE
        if p[1] == 0 or p[0] >= self.m:
            return Status.POSITIVE
        return Status.UNKNOWN


@dataclass(frozen=True)
class FreeWithOracle(OrderedGroupModel):
    """Z^d with a positivity oracle; ``state_functionals`` lists the extreme states."""

    dim: int
    oracle: Callable[[Vector], Status]
    unit: Vector
    state_functionals: tuple[Functional, ...] = ()
    equivalence: Callable[[Vector, Vector], Status] | None = field(default=None, compare=False)
    subequivalence: Callable[[Vector, Vector], Status] | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "unit", _vec(self.unit))
        if len(self.unit) != self.dim:
            raise ValueError("unit has the wrong length")

    def contains(self, x) -> Status:
        x = _vec(x)
        if len(x) != self.dim:
            raise ValueError(f"element of length {len(x)} in a rank-{self.dim} model")
        return self.oracle(x)

    def states(self):
        return self.state_functionals

    def equivalent(self, p, q) -> Status:
        if self.equivalence is None:
            return super().equivalent(p, q)
        return self.equivalence(_vec(p), _vec(q))

    def subequivalent(self, p, q) -> Status:
        if self.subequivalence is None:
            return super().subequivalent(p, q)
        return self.subequivalence(_vec(p), _vec(q))


@dataclass(frozen=True)
class ProductCone(OrderedGroupModel):
    """Direct sum of models with the coordinatewise order; elements are concatenated."""

    factors: tuple[OrderedGroupModel, ...]

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    @property
    def unit(self) -> Vector:
        return tuple(itertools.chain.from_iterable(f.unit for f in self.factors))

    def split(self, x) -> list[Vector]:
        x = _vec(x)
        if len(x) != self.dim:
            raise ValueError(f"element of length {len(x)} in a rank-{self.dim} model")
        out, i = [], 0
        for f in self.factors:
            out.append(x[i : i + f.dim])
            i += f.dim
        return out

    def contains(self, x) -> Status:
        return _all(f.contains(part) for f, part in zip(self.factors, self.split(x)))

    def states(self):
        # extreme states of a direct sum live on one summand at a time
        out = []
        offset = 0
        for f in self.factors:
            for s in f.states():
                out.append((Fraction(0),) * offset + tuple(s) + (Fraction(0),) * (self.dim - offset - f.dim))
            offset += f.dim
        return tuple(out)

    def equivalent(self, p, q) -> Status:
        return _all(f.equivalent(a, b) for f, a, b in zip(self.factors, self.split(p), self.split(q)))

    def subequivalent(self, p, q) -> Status:
        return _all(f.subequivalent(a, b) for f, a, b in zip(self.factors, self.split(p), self.split(q)))


def kclass_to_vector(a: KClass) -> Vector:
    return tuple(a.coeff(mask) for mask in range(1 << a.n))


def vector_to_kclass(n: int, v: Sequence[int]) -> KClass:
    return KClass(n, {mask: c for mask, c in enumerate(v)})


def sphere_product_model(n_factors: int, unit_rank: int) -> FreeWithOracle:
    """K_0 of ``M_R(C((S^2)^n))`` as Z^(2^n) in the monomial basis, decided by the positivity rules."""

    def oracle(v):
        return decide_positive(vector_to_kclass(n_factors, v), n_factors).value

    def equivalence(p, q):
        return decide_cancellation(vector_to_kclass(n_factors, p), vector_to_kclass(n_factors, q), n_factors).value

    def subequivalence(p, q):
        return decide_subequivalence(vector_to_kclass(n_factors, p), vector_to_kclass(n_factors, q), n_factors).value

    d = 1 << n_factors
    unit = (unit_rank,) + (0,) * (d - 1)
    state = (Fraction(1, unit_rank),) + (Fraction(0),) * (d - 1)
    return FreeWithOracle(
        d, oracle, unit, (state,), equivalence, subequivalence, label=f"M_{unit_rank}(C((S^2)^{n_factors}))"
    )


# ---------------------------------------------------------------------------
# states


def state_eval(model: OrderedGroupModel, x) -> Fraction:
    """The unique (geometric) state: normalised rank."""
    states = model.states()
    if len(states) != 1:
        raise NoUniqueStateError(f"model has {len(states)} extreme states, not a unique one")
    return _pair(states[0], _vec(x))


def _state_range(model: OrderedGroupModel, x) -> tuple[Fraction, Fraction]:
    states = model.states()
    if not states:
        raise NoUniqueStateError("model carries no state functionals")
    vals = [_pair(s, _vec(x)) for s in states]
    return min(vals), max(vals)


def gap_exceeds(model: OrderedGroupModel, x, y, r) -> bool:
    """``s(x) + r < s(y)`` for every state ``s``."""
    lo, _ = _state_range(model, _sub(_vec(y), _vec(x)))
    return lo > Fraction(r)


@dataclass(frozen=True)
class StateBracket:
    lo: Fraction
    hi: Fraction | None  # None: no upper witness inside the search range
    lo_witness: tuple[int, int]  # (k, m) with k*u <= m*x
    hi_witness: tuple[int, int] | None  # (l, n) with n*x <= l*u

    @property
    def width(self) -> Fraction | None:
        return None if self.hi is None else self.hi - self.lo


def state_bounds_infsup(model: OrderedGroupModel, x, search_bound: int) -> StateBracket:
    """Bracket the state of a positive ``x`` by order-unit comparisons.

    ``hi = min l/n`` over certified ``n x <= l u`` and ``lo = max k/m`` over
    certified ``k u <= m x``, with ``1 <= n, m <= search_bound`` and the ratios
    ``l/n, k/m`` at most ``search_bound``.
    """
    x = _vec(x)
    if model.contains(x) is not Status.POSITIVE:
        raise NotInConeError(f"{x} is not certified positive")
    if search_bound < 1:
        raise ValueError("search_bound must be at least 1")
    u = model.unit
    best_hi, hi_w = None, None
    best_lo, lo_w = Fraction(0), (0, 1)
    for n in range(1, search_bound + 1):
        nx = _scale(n, x)
        # l*u - n*x positive is upward closed in l, so the first hit is the best for this n
        for l in range(0, n * search_bound + 1):
            if best_hi is not None and Fraction(l, n) >= best_hi:
                break
            if model.contains(_sub(_scale(l, u), nx)) is Status.POSITIVE:
                best_hi, hi_w = Fraction(l, n), (l, n)
                break
        # k*u <= m*x is downward closed in k
        m = n
        mx = nx
        k = 0
        while k + 1 <= m * search_bound and model.contains(_sub(mx, _scale(k + 1, u))) is Status.POSITIVE:
            k += 1
        if Fraction(k, m) > best_lo:
            best_lo, lo_w = Fraction(k, m), (k, m)
    return StateBracket(best_lo, best_hi, lo_w, hi_w)


# ---------------------------------------------------------------------------
# r-property checkers


@dataclass(frozen=True)
class CheckResult:
    """Outcome of an r-property check over a finite test set.

    ``holds`` means no certified failure; ``inconclusive`` lists items whose
    decisive order question came back UNKNOWN.
    """

    holds: bool
    failures: tuple = ()
    inconclusive: tuple = ()
    exercised: int = 0
    skipped: tuple = ()

    @property
    def witness(self):
        return self.failures[0] if self.failures else None


def _run(items, hypothesis, decide) -> CheckResult:
    failures, unknown, skipped = [], [], []
    exercised = 0
    for item in items:
        pre = hypothesis(item)
        if pre is None:
            skipped.append(item)
            continue
        if not pre:
            continue
        exercised += 1
        status = decide(item)
        if status is Status.NOT_POSITIVE:
            failures.append(item)
        elif status is Status.UNKNOWN:
            unknown.append(item)
    return CheckResult(not failures, tuple(failures), tuple(unknown), exercised, tuple(skipped))


def check_r_strict_comparison(model: OrderedGroupModel, r, test_pairs) -> CheckResult:
    """State gap ``> r`` must force ``x <= y``; failures are pairs with ``y - x`` certified outside the cone."""
    r = Fraction(r)
    pairs = [(_vec(x), _vec(y)) for x, y in test_pairs]
    return _run(pairs, lambda p: gap_exceeds(model, p[0], p[1], r), lambda p: model.leq(p[0], p[1]))


def _certified_positive(model, *elements) -> bool | None:
    statuses = [model.contains(e) for e in elements]
    if all(s is Status.POSITIVE for s in statuses):
        return True
    return None


def check_r_cancellation(model: OrderedGroupModel, r, pairs) -> CheckResult:
    """Equal classes with every state above ``r`` must be certified equivalent."""
    r = Fraction(r)
    pairs = [(_vec(p), _vec(q)) for p, q in pairs]

    def hypothesis(pq):
        p, q = pq
        if _certified_positive(model, p, q) is None:
            return None
        lo, _ = _state_range(model, p)
        return p == q and lo > r

    return _run(pairs, hypothesis, lambda pq: model.equivalent(*pq))


def check_r_fcq(model: OrderedGroupModel, r, pairs) -> CheckResult:
    """A state gap ``> r`` between projection classes must be certified as subequivalence."""
    r = Fraction(r)
    pairs = [(_vec(p), _vec(q)) for p, q in pairs]

    def hypothesis(pq):
        p, q = pq
        if _certified_positive(model, p, q) is None:
            return None
        return gap_exceeds(model, p, q, r)

    return _run(pairs, hypothesis, lambda pq: model.subequivalent(*pq))


@dataclass(frozen=True)
class InterpolationResult:
    status: str  # "interpolant", "no_interpolant", "not_applicable", "inconclusive"
    z: Vector | None = None
    box: int = 0
    reason: str = ""

    @property
    def holds(self) -> bool | None:
        """True when the property is not violated by this quadruple, None when undecided."""
        if self.status in ("interpolant", "not_applicable"):
            return True
        if self.status == "no_interpolant":
            return False
        return None


def check_r_interpolation(model: OrderedGroupModel, r, quadruple, search_box: int) -> InterpolationResult:
    """Search ``[-search_box, search_box]^d`` for ``z`` with ``x_i <= z <= y_j``.

    Candidates are visited closest-first to the average of the four elements, so a
    rank-midpoint interpolant is the one reported when several exist.  A
    ``no_interpolant`` answer covers the box only.
    """
    r = Fraction(r)
    x1, x2, y1, y2 = (_vec(v) for v in quadruple)
    xs, ys = (x1, x2), (y1, y2)
    for x in xs:
        for y in ys:
            if model.leq(x, y) is not Status.POSITIVE:
                return InterpolationResult("not_applicable", box=search_box, reason=f"{x} <= {y} not certified")
            if not gap_exceeds(model, x, y, r):
                return InterpolationResult("not_applicable", box=search_box, reason=f"state gap {x} -> {y} not > {r}")
    d = model.dim
    centre = [Fraction(a + b + c + e, 4) for a, b, c, e in zip(x1, x2, y1, y2)]
    axis = range(-search_box, search_box + 1)
    candidates = sorted(
        itertools.product(axis, repeat=d),
        key=lambda z: (sum(abs(zi - ci) for zi, ci in zip(z, centre)), z),
    )
    undecided = False
    for z in candidates:
        statuses = [model.leq(x, z) for x in xs] + [model.leq(z, y) for y in ys]
        if all(s is Status.POSITIVE for s in statuses):
            return InterpolationResult("interpolant", z=z, box=search_box)
        if not any(s is Status.NOT_POSITIVE for s in statuses):
            undecided = True
    if undecided:
        return InterpolationResult("inconclusive", box=search_box, reason="some candidates undecided")
    return InterpolationResult("no_interpolant", box=search_box)


# ---------------------------------------------------------------------------
# concrete semigroups and their Grothendieck envelopes


@dataclass(frozen=True)
class ConcreteSemigroup:
    """Subsemigroup of N^d generated by ``generators``, algebraically ordered.

    ``unit`` defaults to the sum of the generators, which is always an order unit.
    """

    generators: tuple[Vector, ...]
    unit: Vector | None = None

    def __post_init__(self):
        gens = tuple(_vec(g) for g in self.generators)
        if not gens:
            raise ValueError("need at least one generator")
        d = len(gens[0])
        if any(len(g) != d for g in gens) or any(v < 0 for g in gens for v in g):
            raise ValueError("generators must be vectors in N^d of a common length")
        gens = tuple(g for g in gens if any(g))
        if not gens:
            raise ValueError("need a nonzero generator")
        object.__setattr__(self, "generators", gens)
        unit = _vec(self.unit) if self.unit is not None else tuple(map(sum, zip(*gens)))
        object.__setattr__(self, "unit", unit)
        if not self.contains(unit):
            raise ValueError(f"unit {unit} is not in the semigroup")
        for g in gens:
            if not any(self.contains(_sub(_scale(k, unit), g)) for k in range(1, 65)):
                raise ValueError(f"unit {unit} does not dominate generator {g}")

    @property
    def dim(self) -> int:
        return len(self.generators[0])

    def contains(self, v) -> bool:
        return _in_span(self.generators, _vec(v))

    def elements_below(self, bound: Vector) -> frozenset[Vector]:
        """Every semigroup element coordinatewise at most ``bound`` (breadth-first closure)."""
        bound = _vec(bound)
        seen = {(0,) * self.dim}
        frontier = list(seen)
        while frontier:
            nxt = []
            for v in frontier:
                for g in self.generators:
                    w = _add(v, g)
                    if w not in seen and all(a <= b for a, b in zip(w, bound)):
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        return frozenset(seen)

    def leq(self, x, y) -> bool:
        """Algebraic order: ``x + z = y`` for some semigroup element ``z``."""
        x, y = _vec(x), _vec(y)
        return _sub(y, x) in self.elements_below(y)

    def states(self) -> tuple[Functional, ...]:
        return cone_state_vertices(self.generators, self.unit)


@lru_cache(maxsize=4096)
def _in_span_cached(gens: tuple[Vector, ...], v: Vector) -> bool:
    if not any(v):
        return True
    if any(c < 0 for c in v):
        return False
    if not gens:
        return False
    g, rest = gens[0], gens[1:]
    k = 0
    w = v
    while all(c >= 0 for c in w):
        if _in_span_cached(rest, w):
            return True
        w = _sub(w, g)
        k += 1
    return False


def _in_span(gens, v) -> bool:
    return _in_span_cached(tuple(gens), tuple(v))


def _to_fraction(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def cone_state_vertices(generators, unit) -> tuple[Functional, ...]:
    """Extreme points of ``{f : f(g) >= 0 for all generators, f(unit) = 1}`` on the span.

    Returned as ambient functionals (the minimum-norm extension off the span).
    """
    gens = [list(g) for g in generators]
    basis: list[list[int]] = []
    for g in gens:
        if sympy.Matrix(basis + [g]).rank() > len(basis):
            basis.append(g)
    k = len(basis)
    B = sympy.Matrix(basis).T  # d x k
    gram_inv = (B.T * B).inv()

    def coords(v):
        return gram_inv * B.T * sympy.Matrix(list(v))

    lam = [coords(g) for g in gens]
    lam_u = coords(unit)
    vertices = []
    for tight in itertools.combinations(range(len(gens)), k - 1):
        rows = [list(lam[i]) for i in tight] + [list(lam_u)]
        A = sympy.Matrix(rows)
        if A.det() == 0:
            continue
        phi = A.LUsolve(sympy.Matrix([0] * (k - 1) + [1]))
        if all((lg.T * phi)[0] >= 0 for lg in lam):
            F = B * gram_inv * phi
            f = tuple(_to_fraction(c) for c in F)
            if f not in vertices:
                vertices.append(f)
    return tuple(sorted(vertices))


@dataclass(frozen=True)
class Envelope:
    group: FreeWithOracle
    lattice_basis: tuple[Vector, ...]
    semigroup: ConcreteSemigroup

    def iota(self, x) -> Vector:
        """The Grothendieck map; semigroup elements already sit inside Z^d."""
        x = _vec(x)
        if not self.semigroup.contains(x):
            raise ValueError(f"{x} is not a semigroup element")
        return x

    def in_group(self, v) -> bool:
        """Is ``v`` in the subgroup of Z^d generated by the semigroup?"""
        basis = sympy.Matrix([list(b) for b in self.lattice_basis]).T
        try:
            sol, params = basis.gauss_jordan_solve(sympy.Matrix(list(_vec(v))))
        except ValueError:  # not even in the rational span
            return False
        if params.shape[0]:
            sol = sol.subs({p: 0 for p in params})
        return all(c.is_integer for c in sol)


def grothendieck_envelope(s: ConcreteSemigroup) -> Envelope:
    """The enveloping group with positive cone ``iota(M)`` and order unit ``iota(v)``."""
    from sympy.matrices.normalforms import hermite_normal_form

    hnf = hermite_normal_form(sympy.Matrix([list(g) for g in s.generators]).T)
    basis = tuple(tuple(int(c) for c in hnf.col(j)) for j in range(hnf.shape[1]) if any(hnf.col(j)))

    def oracle(v):
        return Status.POSITIVE if s.contains(v) else Status.NOT_POSITIVE

    group = FreeWithOracle(s.dim, oracle, s.unit, s.states(), label="Grothendieck envelope")
    return Envelope(group, basis, s)


def semigroup_strict_comparison(s: ConcreteSemigroup, r, pairs) -> CheckResult:
    """r-strict comparison evaluated inside the semigroup with its algebraic order."""
    r = Fraction(r)
    states = s.states()
    pairs = [(_vec(x), _vec(y)) for x, y in pairs]

    def hypothesis(p):
        x, y = p
        return min(_pair(f, y) - _pair(f, x) for f in states) > r

    def decide(p):
        return Status.POSITIVE if s.leq(*p) else Status.NOT_POSITIVE

    return _run(pairs, hypothesis, decide)
