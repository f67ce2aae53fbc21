"""Finite object-feature polarities and their Galois connection machinery.

A polarity (formal context) is a triple of named objects, named features, and
an incidence relation between them.  Subsets of either sort are fixed-width
bit masks indexed by list position, so the derived operations below reduce to
a handful of integer bit operations and stay cheap enough for the exhaustive
searches used throughout the test suite.

Contexts are immutable after construction.  Derived data (column masks,
specialization preorders) is cached lazily; the caches are not observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import ContractViolation, UnknownNameError


@dataclass(frozen=True)
class _IndexSet:
    """A subset of positions 0..n-1 packed into an int (bit i = member i)."""

    mask: int = 0

    def __post_init__(self):
        if self.mask < 0:
            raise ContractViolation("set mask must be non-negative")

    @classmethod
    def from_indices(cls, indices: Iterable[int]):
        mask = 0
        for i in indices:
            if i < 0:
                raise ContractViolation(f"negative index {i} in {cls.__name__}")
            mask |= 1 << i
        return cls(mask)

    def indices(self) -> tuple[int, ...]:
        return tuple(self)

    def __iter__(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __contains__(self, index: int) -> bool:
        return index >= 0 and bool(self.mask >> index & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def _same_sort(self, other) -> None:
        if type(other) is not type(self):
            raise TypeError(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )

    def union(self, other):
        self._same_sort(other)
        return type(self)(self.mask | other.mask)

    def intersection(self, other):
        self._same_sort(other)
        return type(self)(self.mask & other.mask)

    def difference(self, other):
        self._same_sort(other)
        return type(self)(self.mask & ~other.mask)

    def issubset(self, other) -> bool:
        self._same_sort(other)
        return self.mask & ~other.mask == 0

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __le__ = issubset


class ObjectSet(_IndexSet):
    """Subset of a context's objects."""


class FeatureSet(_IndexSet):
    """Subset of a context's features."""


def _unique_names(names: Sequence[str], sort: str) -> tuple[str, ...]:
    out = []
    seen = set()
    for name in names:
        if not isinstance(name, str) or not name:
            raise ContractViolation(f"{sort} names must be non-empty strings")
        if "\n" in name or "\r" in name:
            raise ContractViolation(f"{sort} name {name!r} contains a line break")
        if name in seen:
            raise ContractViolation(f"duplicate {sort} name {name!r}")
        seen.add(name)
        out.append(name)
    if not out:
        raise ContractViolation(f"a context needs at least one {sort}")
    return tuple(out)


class FormalContext:
    """Immutable polarity: named objects, named features, incidence rows."""

    def __init__(self, objects: Sequence[str], features: Sequence[str],
                 incidence: Iterable[Iterable[object]]):
        self._objects = _unique_names(objects, "object")
        self._features = _unique_names(features, "feature")
        rows = []
        incidence = list(incidence)
        if len(incidence) != len(self._objects):
            raise ContractViolation(
                f"incidence has {len(incidence)} rows, expected {len(self._objects)}")
        for r, row in enumerate(incidence):
            cells = list(row)
            if len(cells) != len(self._features):
                raise ContractViolation(
                    f"incidence row {r} has {len(cells)} cells, "
                    f"expected {len(self._features)}")
            mask = 0
            for c, cell in enumerate(cells):
                if cell:
                    mask |= 1 << c
            rows.append(mask)
        self._rows = tuple(rows)

    @classmethod
    def from_row_masks(cls, objects: Sequence[str], features: Sequence[str],
                       row_masks: Sequence[int]) -> "FormalContext":
        width = len(features)
        for mask in row_masks:
            if mask < 0 or mask >> width:
                raise ContractViolation(f"row mask {mask:#x} exceeds {width} features")
        matrix = [[mask >> c & 1 for c in range(width)] for mask in row_masks]
        return cls(objects, features, matrix)

    @classmethod
    def from_pairs(cls, objects: Sequence[str], features: Sequence[str],
                   pairs: Iterable[tuple[str, str]]) -> "FormalContext":
        ctx = cls(objects, features, [[0] * len(features) for _ in objects])
        rows = list(ctx._rows)
        for obj, feat in pairs:
            rows[ctx.object_index(obj)] |= 1 << ctx.feature_index(feat)
        return cls.from_row_masks(objects, features, rows)

    # -- basic access -------------------------------------------------------

    @property
    def objects(self) -> tuple[str, ...]:
        return self._objects

    @property
    def features(self) -> tuple[str, ...]:
        return self._features

    @property
    def n_objects(self) -> int:
        return len(self._objects)

    @property
    def n_features(self) -> int:
        return len(self._features)

    @property
    def row_masks(self) -> tuple[int, ...]:
        return self._rows

    @cached_property
    def col_masks(self) -> tuple[int, ...]:
        cols = [0] * self.n_features
        for r, row in enumerate(self._rows):
            while row:
                low = row & -row
                cols[low.bit_length() - 1] |= 1 << r
                row ^= low
        return tuple(cols)

    def incident(self, a: int, x: int) -> bool:
        self._check_object_index(a)
        self._check_feature_index(x)
        return bool(self._rows[a] >> x & 1)

    def row(self, a: int) -> FeatureSet:
        self._check_object_index(a)
        return FeatureSet(self._rows[a])

    def col(self, x: int) -> ObjectSet:
        self._check_feature_index(x)
        return ObjectSet(self.col_masks[x])

    def _check_object_index(self, a: int) -> None:
        if not 0 <= a < self.n_objects:
            raise ContractViolation(f"object index {a} out of range")

    def _check_feature_index(self, x: int) -> None:
        if not 0 <= x < self.n_features:
            raise ContractViolation(f"feature index {x} out of range")

    # -- names --------------------------------------------------------------

    @cached_property
    def _object_lookup(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self._objects)}

    @cached_property
    def _feature_lookup(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self._features)}

    def object_index(self, name: str) -> int:
        try:
            return self._object_lookup[name]
        except KeyError:
            raise UnknownNameError(f"unknown object name {name!r}") from None

    def feature_index(self, name: str) -> int:
        try:
            return self._feature_lookup[name]
        except KeyError:
            raise UnknownNameError(f"unknown feature name {name!r}") from None

    def object_set(self, *names: str) -> ObjectSet:
        return ObjectSet.from_indices(self.object_index(n) for n in names)

    def feature_set(self, *names: str) -> FeatureSet:
        return FeatureSet.from_indices(self.feature_index(n) for n in names)

    def object_names(self, members: ObjectSet) -> tuple[str, ...]:
        check_object_set(self, members)
        return tuple(self._objects[i] for i in members)

    def feature_names(self, members: FeatureSet) -> tuple[str, ...]:
        check_feature_set(self, members)
        return tuple(self._features[i] for i in members)

    @property
    def all_objects(self) -> ObjectSet:
        return ObjectSet((1 << self.n_objects) - 1)

    @property
    def all_features(self) -> FeatureSet:
        return FeatureSet((1 << self.n_features) - 1)

    # -- specialization preorders -------------------------------------------

    @cached_property
    def _obj_upper(self) -> tuple[int, ...]:
        # bit b of entry a set iff a <= b, i.e. row(a) contains row(b)
        rows = self._rows
        out = []
        for a in range(self.n_objects):
            mask = 0
            for b in range(self.n_objects):
                if rows[b] & ~rows[a] == 0:
                    mask |= 1 << b
            out.append(mask)
        return tuple(out)

    @cached_property
    def _obj_lower(self) -> tuple[int, ...]:
        # bit a of entry b set iff a <= b
        upper = self._obj_upper
        out = []
        for b in range(self.n_objects):
            mask = 0
            for a in range(self.n_objects):
                if upper[a] >> b & 1:
                    mask |= 1 << a
            out.append(mask)
        return tuple(out)

    @cached_property
    def _feat_upper(self) -> tuple[int, ...]:
        # bit y of entry x set iff x <= y, i.e. col(x) is contained in col(y)
        cols = self.col_masks
        out = []
        for x in range(self.n_features):
            mask = 0
            for y in range(self.n_features):
                if cols[x] & ~cols[y] == 0:
                    mask |= 1 << y
            out.append(mask)
        return tuple(out)

    @cached_property
    def _feat_lower(self) -> tuple[int, ...]:
        upper = self._feat_upper
        out = []
        for y in range(self.n_features):
            mask = 0
            for x in range(self.n_features):
                if upper[x] >> y & 1:
                    mask |= 1 << x
            out.append(mask)
        return tuple(out)

    def obj_leq(self, a: int, b: int) -> bool:
        self._check_object_index(a)
        self._check_object_index(b)
        return bool(self._obj_upper[a] >> b & 1)

    def feat_leq(self, x: int, y: int) -> bool:
        self._check_feature_index(x)
        self._check_feature_index(y)
        return bool(self._feat_upper[x] >> y & 1)

    # -- value semantics ------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalContext):
            return NotImplemented
        return (self._objects == other._objects
                and self._features == other._features
                and self._rows == other._rows)

    def __hash__(self) -> int:
        return hash((self._objects, self._features, self._rows))

    def __repr__(self) -> str:
        return (f"FormalContext({self.n_objects}x{self.n_features}, "
                f"objects={list(self._objects)}, features={list(self._features)})")


def check_object_set(ctx: FormalContext, members: ObjectSet) -> None:
    if not isinstance(members, ObjectSet):
        raise ContractViolation(f"expected ObjectSet, got {type(members).__name__}")
    if members.mask >> ctx.n_objects:
        raise ContractViolation("object set refers to indices outside the context")


def check_feature_set(ctx: FormalContext, members: FeatureSet) -> None:
    if not isinstance(members, FeatureSet):
        raise ContractViolation(f"expected FeatureSet, got {type(members).__name__}")
    if members.mask >> ctx.n_features:
        raise ContractViolation("feature set refers to indices outside the context")


# -- mask-level fast paths (index arithmetic, no wrapper objects) -------------

def up_mask(ctx: FormalContext, obj_mask: int) -> int:
    result = (1 << ctx.n_features) - 1
    rows = ctx.row_masks
    while obj_mask:
        low = obj_mask & -obj_mask
        result &= rows[low.bit_length() - 1]
        obj_mask ^= low
    return result


def down_mask(ctx: FormalContext, feat_mask: int) -> int:
    result = (1 << ctx.n_objects) - 1
    cols = ctx.col_masks
    while feat_mask:
        low = feat_mask & -feat_mask
        result &= cols[low.bit_length() - 1]
        feat_mask ^= low
    return result


def closure_ext_mask(ctx: FormalContext, obj_mask: int) -> int:
    return down_mask(ctx, up_mask(ctx, obj_mask))


def closure_int_mask(ctx: FormalContext, feat_mask: int) -> int:
    return up_mask(ctx, down_mask(ctx, feat_mask))


# -- the Galois connection ----------------------------------------------------

def up(ctx: FormalContext, members: ObjectSet) -> FeatureSet:
    """Features shared by every object in the set (all features for the empty set)."""
    check_object_set(ctx, members)
    return FeatureSet(up_mask(ctx, members.mask))


def down(ctx: FormalContext, members: FeatureSet) -> ObjectSet:
    """Objects having every feature in the set (all objects for the empty set)."""
    check_feature_set(ctx, members)
    return ObjectSet(down_mask(ctx, members.mask))


def closure_ext(ctx: FormalContext, members: ObjectSet) -> ObjectSet:
    """Down-of-up closure on object sets."""
    check_object_set(ctx, members)
    return ObjectSet(closure_ext_mask(ctx, members.mask))


def closure_int(ctx: FormalContext, members: FeatureSet) -> FeatureSet:
    """Up-of-down closure on feature sets."""
    check_feature_set(ctx, members)
    return FeatureSet(closure_int_mask(ctx, members.mask))


def is_stable_ext(ctx: FormalContext, members: ObjectSet) -> bool:
    check_object_set(ctx, members)
    return closure_ext_mask(ctx, members.mask) == members.mask


def is_stable_int(ctx: FormalContext, members: FeatureSet) -> bool:
    check_feature_set(ctx, members)
    return closure_int_mask(ctx, members.mask) == members.mask


# -- specialization preorders --------------------------------------------------

def obj_preorder(ctx: FormalContext) -> tuple[ObjectSet, ...]:
    """Entry a is the set of all b with a <= b (a has every feature b has)."""
    return tuple(ObjectSet(mask) for mask in ctx._obj_upper)


def feat_preorder(ctx: FormalContext) -> tuple[FeatureSet, ...]:
    """Entry x is the set of all y with x <= y (every object with x has y)."""
    return tuple(FeatureSet(mask) for mask in ctx._feat_upper)


def up_set_of_feature(ctx: FormalContext, name: str) -> FeatureSet:
    """All features above the named one in the specialization preorder."""
    return FeatureSet(ctx._feat_upper[ctx.feature_index(name)])


def down_set_of_object(ctx: FormalContext, name: str) -> ObjectSet:
    """All objects below the named one in the specialization preorder."""
    return ObjectSet(ctx._obj_lower[ctx.object_index(name)])
