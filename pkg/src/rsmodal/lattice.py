"""Concept lattices of polarities and the finite duality with irreducibles.

Concepts are stable (extent, intent) pairs ordered by extent inclusion.  The
canonical order of a lattice is ascending extent bit pattern (object index 0
is the least significant bit), which makes every downstream output, from DOT
diagrams to counterexample reports, reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Iterator, Sequence

from . import rscheck
from .context import (
    FeatureSet,
    FormalContext,
    ObjectSet,
    closure_ext_mask,
    down_mask,
    up_mask,
)
from .errors import (
    ContractViolation,
    DegenerateLatticeError,
    PreconditionError,
    SizeLimitError,
)

DEFAULT_MAX_OBJECTS = 20
DUALITY_MAX_SIZE = 6


@dataclass(frozen=True)
class Concept:
    """A stable pair: who belongs (extent) and what describes it (intent)."""

    extent: ObjectSet
    intent: FeatureSet


def format_concept(ctx: FormalContext, concept: Concept) -> str:
    ext = ", ".join(ctx.object_names(concept.extent))
    intl = ", ".join(ctx.feature_names(concept.intent))
    return "{%s} | {%s}" % (ext, intl)


class ConceptLattice:
    """All concepts of one context, in canonical extent order."""

    def __init__(self, ctx: FormalContext, concepts: Sequence[Concept]):
        self._ctx = ctx
        self._concepts = tuple(concepts)
        self._extents = tuple(c.extent.mask for c in self._concepts)
        self._intents = tuple(c.intent.mask for c in self._concepts)
        if list(self._extents) != sorted(set(self._extents)):
            raise ContractViolation("concepts must be unique and in canonical order")
        self._by_extent = {mask: i for i, mask in enumerate(self._extents)}

    @property
    def ctx(self) -> FormalContext:
        return self._ctx

    @property
    def concepts(self) -> tuple[Concept, ...]:
        return self._concepts

    def __len__(self) -> int:
        return len(self._concepts)

    def __iter__(self) -> Iterator[Concept]:
        return iter(self._concepts)

    def __getitem__(self, index: int) -> Concept:
        return self._concepts[index]

    @property
    def bottom(self) -> Concept:
        return self._concepts[0]

    @property
    def top(self) -> Concept:
        return self._concepts[-1]

    def index_of(self, concept: Concept) -> int:
        idx = self._by_extent.get(concept.extent.mask)
        if idx is None or self._concepts[idx] != concept:
            raise ContractViolation("concept does not belong to this lattice")
        return idx

    def concept_from_extent(self, extent: ObjectSet) -> Concept:
        idx = self._by_extent.get(extent.mask)
        if idx is None:
            raise ContractViolation("object set is not a stable extent of this lattice")
        return self._concepts[idx]

    def leq(self, u: Concept, v: Concept) -> bool:
        self.index_of(u)
        self.index_of(v)
        return u.extent.mask & ~v.extent.mask == 0

    def leq_by_index(self, i: int, j: int) -> bool:
        return self._extents[i] & ~self._extents[j] == 0

    @cached_property
    def leq_matrix(self) -> tuple[int, ...]:
        """Row i has bit j set iff concept i <= concept j."""
        rows = []
        for i in range(len(self)):
            mask = 0
            for j in range(len(self)):
                if self.leq_by_index(i, j):
                    mask |= 1 << j
            rows.append(mask)
        return tuple(rows)

    @cached_property
    def geq_matrix(self) -> tuple[int, ...]:
        """Row j has bit i set iff concept i <= concept j."""
        leq = self.leq_matrix
        rows = []
        for j in range(len(self)):
            mask = 0
            for i in range(len(self)):
                if leq[i] >> j & 1:
                    mask |= 1 << i
            rows.append(mask)
        return tuple(rows)

    def meet_indices(self, i: int, j: int) -> int:
        return self._by_extent[self._extents[i] & self._extents[j]]

    def join_indices(self, i: int, j: int) -> int:
        intent = self._intents[i] & self._intents[j]
        return self._by_extent[down_mask(self._ctx, intent)]

    @cached_property
    def meet_table(self) -> tuple[tuple[int, ...], ...]:
        n = len(self)
        return tuple(tuple(self.meet_indices(i, j) for j in range(n)) for i in range(n))

    @cached_property
    def join_table(self) -> tuple[tuple[int, ...], ...]:
        n = len(self)
        return tuple(tuple(self.join_indices(i, j) for j in range(n)) for i in range(n))

    @cached_property
    def jirr_indices(self) -> tuple[int, ...]:
        # direct definition: u differs from the join of everything strictly below
        out = []
        for i in range(len(self)):
            below = 0
            for j in range(len(self)):
                if j != i and self.leq_by_index(j, i):
                    below |= self._extents[j]
            if closure_ext_mask(self._ctx, below) != self._extents[i]:
                out.append(i)
        return tuple(out)

    @cached_property
    def mirr_indices(self) -> tuple[int, ...]:
        out = []
        full = (1 << self._ctx.n_objects) - 1
        for i in range(len(self)):
            above = full
            for j in range(len(self)):
                if j != i and self.leq_by_index(i, j):
                    above &= self._extents[j]
            if above != self._extents[i]:
                out.append(i)
        return tuple(out)

    def object_concept(self, name: str) -> Concept:
        """The concept generated by a single object."""
        i = self._ctx.object_index(name)
        return self.concept_from_extent(
            ObjectSet(closure_ext_mask(self._ctx, 1 << i)))

    def feature_concept(self, name: str) -> Concept:
        """The concept generated by a single feature."""
        x = self._ctx.feature_index(name)
        return self.concept_from_extent(ObjectSet(self._ctx.col_masks[x]))

    def covers(self) -> tuple[tuple[int, int], ...]:
        """All (lower, upper) cover pairs of the order, sorted."""
        leq = self.leq_matrix
        geq = self.geq_matrix
        out = []
        for i in range(len(self)):
            strictly_above = leq[i] & ~(1 << i)
            rest = strictly_above
            while rest:
                low = rest & -rest
                j = low.bit_length() - 1
                rest ^= low
                between = strictly_above & (geq[j] & ~(1 << j))
                if between == 0:
                    out.append((i, j))
        return tuple(out)

    def to_dot(self) -> str:
        """Hasse diagram in DOT form, deterministic node and edge order."""
        lines = ["digraph concept_lattice {", "  rankdir=BT;", "  node [shape=box];"]
        for i, c in enumerate(self._concepts):
            lines.append(f'  c{i} [label="{format_concept(self._ctx, c)}"];')
        for lo, hi in self.covers():
            lines.append(f"  c{lo} -> c{hi};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def enumerate_concepts(ctx: FormalContext,
                       max_objects: int = DEFAULT_MAX_OBJECTS) -> ConceptLattice:
    """All stable (extent, intent) pairs of ``ctx``, each exactly once.

    Extents are generated by saturating singleton additions under the closure
    operator, starting from the closure of the empty set, so the cost scales
    with the number of concepts rather than with 2**objects.
    """
    if ctx.n_objects > max_objects:
        raise SizeLimitError(
            f"context has {ctx.n_objects} objects, limit is {max_objects}")
    bottom = closure_ext_mask(ctx, 0)
    seen = {bottom}
    stack = [bottom]
    all_mask = (1 << ctx.n_objects) - 1
    while stack:
        extent = stack.pop()
        free = all_mask & ~extent
        while free:
            low = free & -free
            free ^= low
            grown = closure_ext_mask(ctx, extent | low)
            if grown not in seen:
                seen.add(grown)
                stack.append(grown)
    extents = sorted(seen)
    concepts = [Concept(ObjectSet(e), FeatureSet(up_mask(ctx, e))) for e in extents]
    return ConceptLattice(ctx, concepts)


def enumerate_concepts_naive(ctx: FormalContext,
                             max_objects: int = 16) -> ConceptLattice:
    """Oracle enumeration: scan every subset of the objects for stability."""
    if ctx.n_objects > max_objects:
        raise SizeLimitError(
            f"naive enumeration over 2**{ctx.n_objects} subsets refused")
    extents = [m for m in range(1 << ctx.n_objects)
               if closure_ext_mask(ctx, m) == m]
    concepts = [Concept(ObjectSet(e), FeatureSet(up_mask(ctx, e))) for e in extents]
    return ConceptLattice(ctx, concepts)


def meet(lat: ConceptLattice, u: Concept, v: Concept) -> Concept:
    return lat[lat.meet_indices(lat.index_of(u), lat.index_of(v))]


def join(lat: ConceptLattice, u: Concept, v: Concept) -> Concept:
    return lat[lat.join_indices(lat.index_of(u), lat.index_of(v))]


def meet_all(lat: ConceptLattice, items: Iterable[Concept]) -> Concept:
    """N-ary meet; the empty meet is the top concept."""
    extent = (1 << lat.ctx.n_objects) - 1
    for c in items:
        lat.index_of(c)
        extent &= c.extent.mask
    return lat.concept_from_extent(ObjectSet(extent))


def join_all(lat: ConceptLattice, items: Iterable[Concept]) -> Concept:
    """N-ary join; the empty join is the bottom concept."""
    union = 0
    for c in items:
        lat.index_of(c)
        union |= c.extent.mask
    return lat.concept_from_extent(ObjectSet(closure_ext_mask(lat.ctx, union)))


def irreducibles(lat: ConceptLattice) -> tuple[tuple[Concept, ...], tuple[Concept, ...]]:
    """(completely join-irreducible, completely meet-irreducible) concepts."""
    jirr = tuple(lat[i] for i in lat.jirr_indices)
    mirr = tuple(lat[i] for i in lat.mirr_indices)
    return jirr, mirr


class AbstractLattice:
    """A finite lattice given abstractly by element labels and an order matrix."""

    def __init__(self, elements: Sequence[str], leq: Sequence[Sequence[object]]):
        self._elements = tuple(elements)
        if len(set(self._elements)) != len(self._elements) or not self._elements:
            raise ContractViolation("element labels must be non-empty and distinct")
        n = len(self._elements)
        rows = []
        leq = list(leq)
        if len(leq) != n:
            raise ContractViolation("order matrix size does not match element count")
        for row in leq:
            cells = list(row)
            if len(cells) != n:
                raise ContractViolation("order matrix must be square")
            mask = 0
            for j, cell in enumerate(cells):
                if cell:
                    mask |= 1 << j
            rows.append(mask)
        self._leq = tuple(rows)
        self._validate_partial_order()
        self._meet, self._join = self._build_tables()

    def _validate_partial_order(self) -> None:
        n = len(self._elements)
        for i in range(n):
            if not self._leq[i] >> i & 1:
                raise ContractViolation(f"order is not reflexive at {self._elements[i]!r}")
            for j in range(n):
                if i != j and self._leq[i] >> j & 1 and self._leq[j] >> i & 1:
                    raise ContractViolation(
                        f"order is not antisymmetric at "
                        f"{self._elements[i]!r}, {self._elements[j]!r}")
                if self._leq[i] >> j & 1 and self._leq[j] & ~self._leq[i]:
                    raise ContractViolation(
                        f"order is not transitive at "
                        f"{self._elements[i]!r}, {self._elements[j]!r}")

    def _bound(self, i: int, j: int, kind: str) -> int:
        n = len(self._elements)
        if kind == "join":
            common = self._leq[i] & self._leq[j]          # upper bounds of both
            candidates = [k for k in range(n) if common >> k & 1]
            for k in candidates:
                if common & ~self._leq[k] == 0:           # k below every upper bound
                    return k
        else:
            common = 0
            for k in range(n):
                if self._leq[k] >> i & 1 and self._leq[k] >> j & 1:
                    common |= 1 << k
            for k in range(n):
                if common >> k & 1 and common & ~self._lower_masks[k] == 0:
                    return k
        raise ContractViolation(
            f"not a lattice: {self._elements[i]!r} and {self._elements[j]!r} "
            f"have no {'least upper' if kind == 'join' else 'greatest lower'} bound")

    @cached_property
    def _lower_masks(self) -> tuple[int, ...]:
        n = len(self._elements)
        out = []
        for k in range(n):
            mask = 0
            for i in range(n):
                if self._leq[i] >> k & 1:
                    mask |= 1 << i
            out.append(mask)
        return tuple(out)

    def _build_tables(self):
        n = len(self._elements)
        meet = [[0] * n for _ in range(n)]
        joint = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                m = self._bound(i, j, "meet")
                v = self._bound(i, j, "join")
                meet[i][j] = meet[j][i] = m
                joint[i][j] = joint[j][i] = v
        return (tuple(tuple(r) for r in meet), tuple(tuple(r) for r in joint))

    @classmethod
    def from_concept_lattice(cls, lat: ConceptLattice,
                             labels: Sequence[str] | None = None) -> "AbstractLattice":
        if labels is None:
            labels = [f"c{i}" for i in range(len(lat))]
        matrix = [[lat.leq_by_index(i, j) for j in range(len(lat))]
                  for i in range(len(lat))]
        return cls(labels, matrix)

    @property
    def elements(self) -> tuple[str, ...]:
        return self._elements

    def __len__(self) -> int:
        return len(self._elements)

    def leq(self, i: int, j: int) -> bool:
        return bool(self._leq[i] >> j & 1)

    def meet(self, i: int, j: int) -> int:
        return self._meet[i][j]

    def join(self, i: int, j: int) -> int:
        return self._join[i][j]

    @cached_property
    def bottom(self) -> int:
        return reduce(self.meet, range(len(self)))

    @cached_property
    def top(self) -> int:
        return reduce(self.join, range(len(self)))

    @cached_property
    def jirr_indices(self) -> tuple[int, ...]:
        out = []
        for i in range(len(self)):
            below = [j for j in range(len(self)) if j != i and self.leq(j, i)]
            folded = reduce(self.join, below, self.bottom)
            if folded != i:
                out.append(i)
        return tuple(out)

    @cached_property
    def mirr_indices(self) -> tuple[int, ...]:
        out = []
        for i in range(len(self)):
            above = [j for j in range(len(self)) if j != i and self.leq(i, j)]
            folded = reduce(self.meet, above, self.top)
            if folded != i:
                out.append(i)
        return tuple(out)


def dual_polarity(lat: AbstractLattice) -> FormalContext:
    """Polarity of a lattice: join-irreducibles against meet-irreducibles.

    Incidence holds where the lattice order does.  A one-element lattice has
    no irreducibles of either kind and is rejected, since contexts require
    non-empty sorts.
    """
    jirr = lat.jirr_indices
    mirr = lat.mirr_indices
    if not jirr or not mirr:
        raise DegenerateLatticeError(
            "lattice has no join- or meet-irreducible elements; "
            "its polarity would have an empty sort")
    objects = [lat.elements[i] for i in jirr]
    features = [lat.elements[i] for i in mirr]
    matrix = [[lat.leq(i, j) for j in mirr] for i in jirr]
    return FormalContext(objects, features, matrix)


def find_context_isomorphism(
        ctx1: FormalContext, ctx2: FormalContext
) -> tuple[dict[str, str], dict[str, str]] | None:
    """Bijections (objects, features) carrying one incidence onto the other.

    Backtracks over degree-compatible object assignments; the feature
    bijection is then forced by matching the permuted columns.
    """
    if (ctx1.n_objects != ctx2.n_objects
            or ctx1.n_features != ctx2.n_features):
        return None
    n, m = ctx1.n_objects, ctx1.n_features

    def obj_signature(ctx, a):
        col_counts = sorted(ctx.col_masks[x].bit_count()
                            for x in range(ctx.n_features)
                            if ctx.row_masks[a] >> x & 1)
        return (ctx.row_masks[a].bit_count(), tuple(col_counts))

    sig1 = [obj_signature(ctx1, a) for a in range(n)]
    sig2 = [obj_signature(ctx2, b) for b in range(n)]
    if sorted(sig1) != sorted(sig2):
        return None
    candidates = [[b for b in range(n) if sig2[b] == sig1[a]] for a in range(n)]
    order = sorted(range(n), key=lambda a: len(candidates[a]))

    def feature_map_for(perm: list[int]) -> dict[int, int] | None:
        # permute ctx1's columns through the object bijection, then match
        available: dict[int, list[int]] = {}
        for y in range(m):
            available.setdefault(ctx2.col_masks[y], []).append(y)
        mapping = {}
        for x in range(m):
            permuted = 0
            col = ctx1.col_masks[x]
            while col:
                low = col & -col
                permuted |= 1 << perm[low.bit_length() - 1]
                col ^= low
            bucket = available.get(permuted)
            if not bucket:
                return None
            mapping[x] = bucket.pop()
        return mapping

    assignment: dict[int, int] = {}
    used: set[int] = set()

    def backtrack(k: int) -> dict[int, int] | None:
        if k == n:
            perm = [assignment[a] for a in range(n)]
            return feature_map_for(perm)
        a = order[k]
        for b in candidates[a]:
            if b in used:
                continue
            ok = True
            for a2, b2 in assignment.items():
                if ctx1.obj_leq(a, a2) != ctx2.obj_leq(b, b2) \
                        or ctx1.obj_leq(a2, a) != ctx2.obj_leq(b2, b):
                    ok = False
                    break
            if not ok:
                continue
            assignment[a] = b
            used.add(b)
            feat = backtrack(k + 1)
            if feat is not None:
                return feat
            del assignment[a]
            used.remove(b)
        return None

    feat_map = backtrack(0)
    if feat_map is None:
        return None
    obj_out = {ctx1.objects[a]: ctx2.objects[assignment[a]] for a in range(n)}
    feat_out = {ctx1.features[x]: ctx2.features[feat_map[x]] for x in range(m)}
    return obj_out, feat_out


def find_order_isomorphism(lat1: AbstractLattice,
                           lat2: AbstractLattice) -> dict[str, str] | None:
    """An order-preserving bijection between two finite lattices, if any."""
    if len(lat1) != len(lat2):
        return None
    n = len(lat1)

    def signatures(lat):
        down = [sum(lat.leq(j, i) for j in range(n)) for i in range(n)]
        upward = [sum(lat.leq(i, j) for j in range(n)) for i in range(n)]
        jset = set(lat.jirr_indices)
        mset = set(lat.mirr_indices)
        return [(down[i], upward[i], i in jset, i in mset) for i in range(n)]

    sig1 = signatures(lat1)
    sig2 = signatures(lat2)
    if sorted(sig1) != sorted(sig2):
        return None
    candidates = [[b for b in range(n) if sig2[b] == sig1[a]] for a in range(n)]
    order = sorted(range(n), key=lambda a: len(candidates[a]))
    assignment: dict[int, int] = {}
    used: set[int] = set()

    def backtrack(k: int) -> bool:
        if k == n:
            return True
        a = order[k]
        for b in candidates[a]:
            if b in used:
                continue
            if any(lat1.leq(a, a2) != lat2.leq(b, b2)
                   or lat1.leq(a2, a) != lat2.leq(b2, b)
                   for a2, b2 in assignment.items()):
                continue
            assignment[a] = b
            used.add(b)
            if backtrack(k + 1):
                return True
            del assignment[a]
            used.remove(b)
        return False

    if not backtrack(0):
        return None
    return {lat1.elements[a]: lat2.elements[b] for a, b in assignment.items()}


@dataclass(frozen=True)
class DualityReport:
    """Outcome of rebuilding a context from its concept lattice."""

    isomorphic: bool
    object_map: tuple[tuple[str, str], ...] | None
    feature_map: tuple[tuple[str, str], ...] | None
    dual: FormalContext


def duality_roundtrip(ctx: FormalContext,
                      max_size: int = DUALITY_MAX_SIZE) -> DualityReport:
    """Check that the polarity of the concept lattice is isomorphic to ``ctx``.

    Only defined for RS contexts; for anything else the offending conditions
    are named in the raised error.
    """
    if ctx.n_objects > max_size or ctx.n_features > max_size:
        raise SizeLimitError(
            f"duality round trip limited to {max_size}x{max_size} contexts")
    report = rscheck.is_rs(ctx)
    if not report.is_rs:
        raise PreconditionError(
            f"context is not an RS-polarity: {report.summary()}")
    lat = enumerate_concepts(ctx)
    dual = dual_polarity(AbstractLattice.from_concept_lattice(lat))
    iso = find_context_isomorphism(ctx, dual)
    if iso is None:
        return DualityReport(False, None, None, dual)
    obj_map, feat_map = iso
    return DualityReport(
        True,
        tuple(sorted(obj_map.items())),
        tuple(sorted(feat_map.items())),
        dual,
    )
