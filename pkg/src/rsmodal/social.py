"""Multi-agent models and the common-category fixed point.

Strings of agent boxes compose to box operators; the common operator takes
the meet over all nonempty alternating strings (adjacent agents distinct).
Under factivity and positive introspection each agent's box is idempotent,
which is what justifies restricting attention to alternating strings; a
``force`` flag computes the meet over all strings instead, for exploration
on models that do not satisfy the axioms.

The derived relation holds between a and x when a belongs to the common
reading of the category generated by x.  It equals the intersection of the
relations induced by the individual strings, and both computations are
carried out and compared on every call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ContractViolation, PreconditionError, RsmodalError
from .lattice import Concept, meet_all
from .modal import (
    AgentRelation,
    AxiomReport,
    RsFrame,
    box,
    check_axiom_conditions,
    check_compatible,
)

COMMON_RELATION_ID = 0


@dataclass(frozen=True)
class BoxString:
    """A composition of agent boxes, applied right to left (innermost last)."""

    agents: tuple[int, ...]

    def __post_init__(self):
        if not self.agents:
            raise ContractViolation("a box string must be non-empty")
        for left, right in zip(self.agents, self.agents[1:]):
            if left == right:
                raise ContractViolation(
                    f"adjacent agents must differ, got {self.agents}")

    def __len__(self) -> int:
        return len(self.agents)


class SocialModel:
    """A frame whose agents all satisfy factivity and positive introspection."""

    def __init__(self, frame: RsFrame, require_axioms: bool = True):
        if not frame.agents:
            raise ContractViolation("a social model needs at least one agent")
        report: dict[int, AxiomReport] = {}
        for agent in frame.agents:
            rel = frame.relation(agent)
            report[agent] = check_axiom_conditions(frame.ctx, rel)
        if require_axioms:
            for agent, flags in report.items():
                if not flags.factive:
                    raise PreconditionError(
                        f"agent {agent} violates factivity at {flags.factivity_witness}")
                if not flags.pos_introspective:
                    raise PreconditionError(
                        f"agent {agent} violates positive introspection "
                        f"at {flags.pos_intro_witness}")
        self.frame = frame
        self.axiom_report: Mapping[int, AxiomReport] = dict(report)

    @property
    def ctx(self):
        return self.frame.ctx

    @property
    def lattice(self):
        return self.frame.lattice

    @property
    def axioms_ok(self) -> bool:
        return all(flags.factive and flags.pos_introspective
                   for flags in self.axiom_report.values())


def apply_string(model: SocialModel, s: BoxString | Sequence[int],
                 u: Concept) -> Concept:
    """Fold the boxes of the string over the concept, innermost first."""
    if not isinstance(s, BoxString):
        s = BoxString(tuple(s))
    value = u
    for agent in reversed(s.agents):
        value = box(model.frame, agent, value)
    return value


def _reachable_values(model: SocialModel, u: Concept,
                      force: bool) -> list[Concept]:
    """Concepts of the form su for nonempty strings s (alternating unless forced).

    Breadth-first over (value, last-agent) states with cycle detection; the
    lattice is finite, so this terminates.
    """
    lat = model.lattice
    agents = model.frame.agents
    start = lat.index_of(u)
    seen_states = set()
    collected: set[int] = set()
    frontier = [(start, None)]
    while frontier:
        new_frontier = []
        for value_idx, last in frontier:
            for agent in agents:
                if not force and agent == last:
                    continue
                succ = lat.index_of(box(model.frame, agent, lat[value_idx]))
                collected.add(succ)
                state = (succ, None if force else agent)
                if state not in seen_states:
                    seen_states.add(state)
                    new_frontier.append(state)
        frontier = new_frontier
    return [lat[i] for i in sorted(collected)]


def common(model: SocialModel, u: Concept, force: bool = False) -> Concept:
    """Meet of su over all admissible strings s: the socially agreed reading."""
    if not force and not model.axioms_ok:
        for agent, flags in model.axiom_report.items():
            if not flags.factive:
                raise PreconditionError(f"agent {agent} violates factivity")
            if not flags.pos_introspective:
                raise PreconditionError(
                    f"agent {agent} violates positive introspection")
    model.lattice.index_of(u)
    values = _reachable_values(model, u, force)
    return meet_all(model.lattice, values)


def _relation_via_string_intersection(model: SocialModel, force: bool) -> tuple[int, ...]:
    """Column masks of the intersection of the string relations.

    Strings are enumerated by length; the running intersection per feature is
    final once a whole length level adds no unseen (value, last-agent) state,
    which certifies that no longer string can produce a new value.
    """
    ctx = model.ctx
    lat = model.lattice
    agents = model.frame.agents
    full = (1 << ctx.n_objects) - 1
    cols = []
    for x in ctx.features:
        u = lat.feature_concept(x)
        running = full
        seen_states = {(lat.index_of(u), None)}
        frontier = [(lat.index_of(u), None)]
        while frontier:
            new_frontier = []
            for value_idx, last in frontier:
                for agent in agents:
                    if not force and agent == last:
                        continue
                    succ_concept = box(model.frame, agent, lat[value_idx])
                    succ = lat.index_of(succ_concept)
                    running &= succ_concept.extent.mask
                    state = (succ, None if force else agent)
                    if state not in seen_states:
                        seen_states.add(state)
                        new_frontier.append(state)
            frontier = new_frontier
        cols.append(running)
    return tuple(cols)


def common_relation(model: SocialModel, force: bool = False) -> AgentRelation:
    """The relation of the common operator, computed twice and cross-checked.

    Route one reads the extent of the common reading of each feature concept;
    route two intersects the string relations until the state space is
    exhausted.  A mismatch would be a bug, not a model property.
    """
    ctx = model.ctx
    cols = []
    for x in ctx.features:
        c = common(model, model.lattice.feature_concept(x), force=force)
        cols.append(c.extent.mask)
    other = _relation_via_string_intersection(model, force)
    if tuple(cols) != other:
        raise RsmodalError(
            "internal error: the two common-relation computations disagree")
    rows = [0] * ctx.n_objects
    for x, col in enumerate(cols):
        while col:
            low = col & -col
            rows[low.bit_length() - 1] |= 1 << x
            col ^= low
    return AgentRelation(ctx, COMMON_RELATION_ID, rows)


@dataclass(frozen=True)
class CommonAxiomsReport:
    """Verification of the common operator's lemmas on a concrete model.

    Any failure here is an implementation bug; the fields exist so a failure
    is reported with a witness rather than silently.
    """

    deflation_ok: bool          # C(u) <= u for every u
    deflation_witness: Concept | None
    introspection_ok: bool      # C(u) <= C(C(u)) for every u
    introspection_witness: Concept | None
    relation_factive: bool      # R_C inside the incidence
    relation_compatible: bool
    relation_pos_introspective: bool

    @property
    def all_ok(self) -> bool:
        return (self.deflation_ok and self.introspection_ok
                and self.relation_factive and self.relation_compatible
                and self.relation_pos_introspective)


def check_common_axioms(model: SocialModel) -> CommonAxiomsReport:
    lat = model.lattice
    deflation_ok, deflation_witness = True, None
    introspection_ok, introspection_witness = True, None
    for u in lat:
        c = common(model, u)
        if not lat.leq(c, u):
            deflation_ok, deflation_witness = False, u
        if not lat.leq(c, common(model, c)):
            introspection_ok, introspection_witness = False, u
    rc = common_relation(model)
    axioms = check_axiom_conditions(model.ctx, rc)
    compat = check_compatible(model.ctx, rc)
    return CommonAxiomsReport(
        deflation_ok, deflation_witness,
        introspection_ok, introspection_witness,
        axioms.factive, compat.ok, axioms.pos_introspective,
    )
