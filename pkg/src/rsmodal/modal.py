"""Agent relations over a context and the box/diamond operators they induce.

An agent's attributions form a relation R between objects and features; aRx
reads "object a has feature x according to the agent".  When every column
preimage and every row image of R is Galois-stable (RS-compatibility), R
induces a meet-preserving box and a join-preserving diamond on the concept
lattice:

    extent(box v)      = intersection of R^-1[x] over x in intent(v)
    intent(diamond u)  = intersection of R[a]    over a in extent(u)

Empty intersections follow the bounded-lattice conventions (everything).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from . import rscheck
from .context import (
    FeatureSet,
    FormalContext,
    ObjectSet,
    closure_ext_mask,
    closure_int_mask,
    down_mask,
    up_mask,
)
from .errors import ContractViolation, PreconditionError, UnknownNameError
from .lattice import Concept, ConceptLattice, enumerate_concepts


class AgentRelation:
    """One agent's object-feature attributions over a fixed context."""

    def __init__(self, ctx: FormalContext, agent_id: int, rows: Iterable[int]):
        if not isinstance(agent_id, int) or agent_id < 0:
            raise ContractViolation(f"agent id must be a non-negative int, got {agent_id!r}")
        rows = tuple(rows)
        if len(rows) != ctx.n_objects:
            raise ContractViolation(
                f"relation has {len(rows)} rows, expected {ctx.n_objects}")
        for mask in rows:
            if mask < 0 or mask >> ctx.n_features:
                raise ContractViolation("relation row exceeds the feature count")
        self._ctx = ctx
        self._agent_id = agent_id
        self._rows = rows

    @classmethod
    def from_pairs(cls, ctx: FormalContext, agent_id: int,
                   pairs: Iterable[tuple[str, str]]) -> "AgentRelation":
        rows = [0] * ctx.n_objects
        for obj, feat in pairs:
            rows[ctx.object_index(obj)] |= 1 << ctx.feature_index(feat)
        return cls(ctx, agent_id, rows)

    @classmethod
    def from_bools(cls, ctx: FormalContext, agent_id: int,
                   matrix: Iterable[Iterable[object]]) -> "AgentRelation":
        rows = []
        for row in matrix:
            mask = 0
            for c, cell in enumerate(row):
                if cell:
                    mask |= 1 << c
            rows.append(mask)
        return cls(ctx, agent_id, rows)

    @classmethod
    def incidence_copy(cls, ctx: FormalContext, agent_id: int) -> "AgentRelation":
        """The fully informed agent: attributions equal to the incidence."""
        return cls(ctx, agent_id, ctx.row_masks)

    @classmethod
    def empty(cls, ctx: FormalContext, agent_id: int) -> "AgentRelation":
        return cls(ctx, agent_id, [0] * ctx.n_objects)

    @property
    def ctx(self) -> FormalContext:
        return self._ctx

    @property
    def agent_id(self) -> int:
        return self._agent_id

    @property
    def rows(self) -> tuple[int, ...]:
        return self._rows

    @cached_property
    def preimages(self) -> tuple[int, ...]:
        """Column masks: entry x is R^-1[x] as an object mask."""
        cols = [0] * self._ctx.n_features
        for r, mask in enumerate(self._rows):
            while mask:
                low = mask & -mask
                cols[low.bit_length() - 1] |= 1 << r
                mask ^= low
        return tuple(cols)

    def has(self, a: int, x: int) -> bool:
        return bool(self._rows[a] >> x & 1)

    def has_named(self, obj: str, feat: str) -> bool:
        return self.has(self._ctx.object_index(obj), self._ctx.feature_index(feat))

    def row(self, a: int) -> FeatureSet:
        return FeatureSet(self._rows[a])

    def preimage(self, x: int) -> ObjectSet:
        return ObjectSet(self.preimages[x])

    def pairs(self) -> tuple[tuple[str, str], ...]:
        out = []
        for a in range(self._ctx.n_objects):
            for x in FeatureSet(self._rows[a]):
                out.append((self._ctx.objects[a], self._ctx.features[x]))
        return tuple(out)

    # lazily computed status flags; idempotent, so racing readers agree
    @cached_property
    def compatible(self) -> bool:
        return check_compatible(self._ctx, self).ok

    @cached_property
    def factive(self) -> bool:
        return check_axiom_conditions(self._ctx, self).factive

    @cached_property
    def serial(self) -> bool:
        return check_axiom_conditions(self._ctx, self).serial

    @cached_property
    def pos_introspective(self) -> bool:
        return check_axiom_conditions(self._ctx, self).pos_introspective

    def __eq__(self, other) -> bool:
        if not isinstance(other, AgentRelation):
            return NotImplemented
        return (self._ctx == other._ctx and self._agent_id == other._agent_id
                and self._rows == other._rows)

    def __hash__(self) -> int:
        return hash((self._ctx, self._agent_id, self._rows))

    def __repr__(self) -> str:
        return f"AgentRelation(agent={self._agent_id}, pairs={len(self.pairs())})"


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    feature_witness: str | None = None
    object_witness: str | None = None


def check_compatible(ctx: FormalContext, rel: AgentRelation) -> CompatibilityReport:
    """Both stability conditions, with the first failing column/row named."""
    if rel.ctx != ctx:
        raise ContractViolation("relation belongs to a different context")
    feature_witness = None
    for x in range(ctx.n_features):
        pre = rel.preimages[x]
        if closure_ext_mask(ctx, pre) & ~pre:
            feature_witness = ctx.features[x]
            break
    object_witness = None
    for a in range(ctx.n_objects):
        img = rel.rows[a]
        if closure_int_mask(ctx, img) & ~img:
            object_witness = ctx.objects[a]
            break
    ok = feature_witness is None and object_witness is None
    return CompatibilityReport(ok, feature_witness, object_witness)


@dataclass(frozen=True)
class AxiomReport:
    """First-order epistemic conditions evaluated directly on the matrices."""

    factive: bool
    factivity_witness: tuple[str, str] | None
    serial: bool
    serial_witness: str | None
    pos_introspective: bool
    pos_intro_witness: tuple[str, str] | None


def check_axiom_conditions(ctx: FormalContext, rel: AgentRelation) -> AxiomReport:
    """Factivity (R inside the incidence), seriality (no full R-row), and
    positive introspection (aRm forces the shared features of R^-1[m] into R[a])."""
    if rel.ctx != ctx:
        raise ContractViolation("relation belongs to a different context")

    factive, factivity_witness = True, None
    for a in range(ctx.n_objects):
        extra = rel.rows[a] & ~ctx.row_masks[a]
        if extra:
            x = (extra & -extra).bit_length() - 1
            factive, factivity_witness = False, (ctx.objects[a], ctx.features[x])
            break

    full_row = (1 << ctx.n_features) - 1
    serial, serial_witness = True, None
    for a in range(ctx.n_objects):
        if rel.rows[a] == full_row:
            serial, serial_witness = False, ctx.objects[a]
            break

    pos_introspective, pos_intro_witness = True, None
    for a in range(ctx.n_objects):
        row = rel.rows[a]
        rest = row
        while rest:
            low = rest & -rest
            m = low.bit_length() - 1
            rest ^= low
            shared = up_mask(ctx, rel.preimages[m])
            if shared & ~row:
                pos_introspective = False
                pos_intro_witness = (ctx.objects[a], ctx.features[m])
                break
        if not pos_introspective:
            break

    return AxiomReport(factive, factivity_witness, serial, serial_witness,
                       pos_introspective, pos_intro_witness)


class RsFrame:
    """An RS context together with compatible agent relations.

    Validation is eager: a frame never holds an incompatible relation, and
    the underlying context always satisfies the RS conditions.
    """

    def __init__(self, ctx: FormalContext, relations: Iterable[AgentRelation]):
        report = rscheck.is_rs(ctx)
        if not report.is_rs:
            raise PreconditionError(
                f"context is not an RS-polarity: {report.summary()}")
        rel_map: dict[int, AgentRelation] = {}
        for rel in relations:
            if rel.ctx != ctx:
                raise ContractViolation(
                    f"relation for agent {rel.agent_id} belongs to a different context")
            if rel.agent_id in rel_map:
                raise ContractViolation(f"duplicate agent id {rel.agent_id}")
            compat = check_compatible(ctx, rel)
            if not compat.ok:
                witness = compat.feature_witness or compat.object_witness
                raise PreconditionError(
                    f"relation for agent {rel.agent_id} is not RS-compatible "
                    f"(witness: {witness})")
            rel_map[rel.agent_id] = rel
        self._ctx = ctx
        self._relations = dict(sorted(rel_map.items()))

    @property
    def ctx(self) -> FormalContext:
        return self._ctx

    @property
    def agents(self) -> tuple[int, ...]:
        return tuple(self._relations)

    @property
    def relations(self) -> Mapping[int, AgentRelation]:
        return dict(self._relations)

    def relation(self, agent: int) -> AgentRelation:
        try:
            return self._relations[agent]
        except KeyError:
            raise UnknownNameError(f"unknown agent {agent}") from None

    @cached_property
    def lattice(self) -> ConceptLattice:
        return enumerate_concepts(self._ctx)

    def __repr__(self) -> str:
        return f"RsFrame(agents={list(self._relations)}, ctx={self._ctx!r})"


def box(frame: RsFrame, agent: int, v: Concept) -> Concept:
    """The agent's reading of category v, geared towards members."""
    rel = frame.relation(agent)
    lat = frame.lattice
    lat.index_of(v)
    extent = (1 << frame.ctx.n_objects) - 1
    rest = v.intent.mask
    while rest:
        low = rest & -rest
        extent &= rel.preimages[low.bit_length() - 1]
        rest ^= low
    return lat.concept_from_extent(ObjectSet(extent))


def diamond_black(frame: RsFrame, agent: int, u: Concept) -> Concept:
    """The agent's reading of category u, geared towards descriptions."""
    rel = frame.relation(agent)
    lat = frame.lattice
    lat.index_of(u)
    intent = (1 << frame.ctx.n_features) - 1
    rest = u.extent.mask
    while rest:
        low = rest & -rest
        intent &= rel.rows[low.bit_length() - 1]
        rest ^= low
    extent = down_mask(frame.ctx, intent)
    return lat.concept_from_extent(ObjectSet(extent))


def concept_of_object(frame: RsFrame, name: str) -> Concept:
    return frame.lattice.object_concept(name)


def concept_of_feature(frame: RsFrame, name: str) -> Concept:
    return frame.lattice.feature_concept(name)
