"""Formula language, parser, two-sorted model checking, and frame validity.

Surface syntax (ASCII):

    ineq    := formula "<=" formula
    formula := term { "|" term }
    term    := factor { "&" factor }
    factor  := "0" | "1" | ident | "n:" ident | "c:" ident
             | "[" nat "]" factor | "<" nat ">" factor | "(" formula ")"
    ident   := [A-Za-z][A-Za-z0-9_]*

"n:" marks a nominal (an object name), "c:" a conominal (a feature name);
"[i]" is agent i's box, "<i>" agent i's diamond.  Box and diamond bind
tighter than "&", which binds tighter than "|".

Formulas are satisfied at objects and co-satisfied at features; the two
relations are defined by mutual recursion and computed here set-wise (the
clause for each connective fills a whole object or feature mask at once,
memoized per model and subformula).  Algebraic evaluation in the concept
lattice is implemented independently, as ``extension``; the test suite leans
on the equivalence of the two routes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .context import FormalContext, ObjectSet, closure_ext_mask, down_mask, up_mask
from .errors import (
    ContractViolation,
    FormulaSyntaxError,
    SizeLimitError,
    UnknownNameError,
)
from .lattice import Concept, join, meet
from .modal import AgentRelation, RsFrame, box, diamond_black


# -- abstract syntax -----------------------------------------------------------

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Zero(Formula):
    pass


@dataclass(frozen=True)
class One(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Nominal(Formula):
    name: str


@dataclass(frozen=True)
class Conominal(Formula):
    name: str


@dataclass(frozen=True)
class And(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Box(Formula):
    agent: int
    body: Formula


@dataclass(frozen=True)
class DiamondBlack(Formula):
    agent: int
    body: Formula


@dataclass(frozen=True)
class Inequality:
    lhs: Formula
    rhs: Formula


def props_of(formula: Formula) -> frozenset[str]:
    match formula:
        case Prop(name):
            return frozenset([name])
        case And(lhs, rhs) | Or(lhs, rhs):
            return props_of(lhs) | props_of(rhs)
        case Box(_, body) | DiamondBlack(_, body):
            return props_of(body)
        case _:
            return frozenset()


def agents_of(formula: Formula) -> frozenset[int]:
    match formula:
        case And(lhs, rhs) | Or(lhs, rhs):
            return agents_of(lhs) | agents_of(rhs)
        case Box(agent, body) | DiamondBlack(agent, body):
            return agents_of(body) | {agent}
        case _:
            return frozenset()


# -- parsing ---------------------------------------------------------------------

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_IDENT_CONT = _IDENT_START | set("0123456789_")


@dataclass(frozen=True)
class _Token:
    kind: str
    value: object
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)

    def err(msg):
        raise FormulaSyntaxError(msg, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_col = col
        if ch in "()&|":
            kind = {"(": "lpar", ")": "rpar", "&": "and", "|": "or"}[ch]
            tokens.append(_Token(kind, ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch == "0" or ch == "1":
            tokens.append(_Token("const", ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch == "[" or ch == "<":
            if ch == "<" and i + 1 < n and text[i + 1] == "=":
                tokens.append(_Token("leq", "<=", line, start_col))
                i += 2
                col += 2
                continue
            close = "]" if ch == "[" else ">"
            j = i + 1
            digits = ""
            while j < n and text[j].isdigit():
                digits += text[j]
                j += 1
            if not digits:
                err(f"expected an agent index after {ch!r}")
            if j >= n or text[j] != close:
                err(f"expected {close!r} after agent index")
            kind = "box" if ch == "[" else "diamond"
            tokens.append(_Token(kind, int(digits), line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch in _IDENT_START:
            if ch in "nc" and i + 1 < n and text[i + 1] == ":":
                tokens.append(_Token("nom" if ch == "n" else "conom", ch, line, start_col))
                i += 2
                col += 2
                continue
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            tokens.append(_Token("ident", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        err(f"unexpected character {ch!r}")
    tokens.append(_Token("eof", None, line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise FormulaSyntaxError(f"expected {what}", tok.line, tok.col)
        return self.advance()

    def formula(self) -> Formula:
        node = self.term()
        while self.peek().kind == "or":
            self.advance()
            node = Or(node, self.term())
        return node

    def term(self) -> Formula:
        node = self.factor()
        while self.peek().kind == "and":
            self.advance()
            node = And(node, self.factor())
        return node

    def factor(self) -> Formula:
        tok = self.peek()
        if tok.kind == "const":
            self.advance()
            return Zero() if tok.value == "0" else One()
        if tok.kind == "ident":
            self.advance()
            return Prop(tok.value)
        if tok.kind == "nom":
            self.advance()
            name = self.expect("ident", "an object name after 'n:'")
            return Nominal(name.value)
        if tok.kind == "conom":
            self.advance()
            name = self.expect("ident", "a feature name after 'c:'")
            return Conominal(name.value)
        if tok.kind == "box":
            self.advance()
            return Box(tok.value, self.factor())
        if tok.kind == "diamond":
            self.advance()
            return DiamondBlack(tok.value, self.factor())
        if tok.kind == "lpar":
            self.advance()
            node = self.formula()
            self.expect("rpar", "a closing parenthesis")
            return node
        raise FormulaSyntaxError("expected a formula", tok.line, tok.col)


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    node = parser.formula()
    tok = parser.peek()
    if tok.kind != "eof":
        raise FormulaSyntaxError("unexpected trailing input", tok.line, tok.col)
    return node


def parse_inequality(text: str) -> Inequality:
    parser = _Parser(text)
    lhs = parser.formula()
    parser.expect("leq", "'<=' between the two formulas")
    rhs = parser.formula()
    tok = parser.peek()
    if tok.kind != "eof":
        raise FormulaSyntaxError("unexpected trailing input", tok.line, tok.col)
    return Inequality(lhs, rhs)


_PREC_OR, _PREC_AND, _PREC_FACTOR = 1, 2, 3


def format_formula(formula: Formula) -> str:
    def go(f: Formula, min_prec: int) -> str:
        match f:
            case Zero():
                return "0"
            case One():
                return "1"
            case Prop(name):
                return name
            case Nominal(name):
                return f"n:{name}"
            case Conominal(name):
                return f"c:{name}"
            case And(lhs, rhs):
                text = f"{go(lhs, _PREC_AND)} & {go(rhs, _PREC_FACTOR)}"
                return f"({text})" if min_prec > _PREC_AND else text
            case Or(lhs, rhs):
                text = f"{go(lhs, _PREC_OR)} | {go(rhs, _PREC_AND)}"
                return f"({text})" if min_prec > _PREC_OR else text
            case Box(agent, body):
                return f"[{agent}] {go(body, _PREC_FACTOR)}"
            case DiamondBlack(agent, body):
                return f"<{agent}> {go(body, _PREC_FACTOR)}"
        raise ContractViolation(f"unknown formula node {f!r}")

    return go(formula, 0)


def format_inequality(ineq: Inequality) -> str:
    return f"{format_formula(ineq.lhs)} <= {format_formula(ineq.rhs)}"


# -- models and the satisfaction table ------------------------------------------

class Valuation:
    """Assignment of proposition names to concepts."""

    def __init__(self, assignments: Mapping[str, Concept]):
        self._map = dict(assignments)

    @classmethod
    def from_object_generators(cls, lat, generators: Mapping[str, Iterable[str]]):
        """Close each generator set of object names into a concept."""
        out = {}
        for prop, names in generators.items():
            members = lat.ctx.object_set(*names)
            out[prop] = lat.concept_from_extent(
                ObjectSet(closure_ext_mask(lat.ctx, members.mask)))
        return cls(out)

    @classmethod
    def from_feature_generators(cls, lat, generators: Mapping[str, Iterable[str]]):
        out = {}
        for prop, names in generators.items():
            members = lat.ctx.feature_set(*names)
            out[prop] = lat.concept_from_extent(
                ObjectSet(down_mask(lat.ctx, members.mask)))
        return cls(out)

    def get(self, name: str) -> Concept:
        try:
            return self._map[name]
        except KeyError:
            raise UnknownNameError(f"unbound proposition {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._map))

    def items(self):
        return tuple(sorted(self._map.items()))

    def __contains__(self, name: str) -> bool:
        return name in self._map


class Model:
    """A frame plus a valuation; satisfaction masks are memoized per formula."""

    def __init__(self, frame: RsFrame, valuation: Valuation):
        for _, concept in valuation.items():
            frame.lattice.index_of(concept)
        self.frame = frame
        self.valuation = valuation
        self._sat: dict[Formula, int] = {}
        self._cosat: dict[Formula, int] = {}
        self._ext: dict[Formula, Concept] = {}

    @property
    def ctx(self) -> FormalContext:
        return self.frame.ctx

    @property
    def lattice(self):
        return self.frame.lattice


def _sat_mask(model: Model, formula: Formula) -> int:
    """Objects satisfying the formula, per the recursive satisfaction table."""
    cached = model._sat.get(formula)
    if cached is not None:
        return cached
    ctx = model.ctx
    match formula:
        case Zero():
            mask = 0
        case One():
            mask = (1 << ctx.n_objects) - 1
        case Prop(name):
            mask = model.valuation.get(name).extent.mask
        case Nominal(name):
            # the set of objects below the named one
            mask = ctx._obj_lower[ctx.object_index(name)]
        case Conominal(name):
            # the objects actually having the named feature
            mask = ctx.col_masks[ctx.feature_index(name)]
        case And(lhs, rhs):
            mask = _sat_mask(model, lhs) & _sat_mask(model, rhs)
        case Or(_, _) | DiamondBlack(_, _):
            # everything incident to all co-satisfying features
            mask = down_mask(ctx, _cosat_mask(model, formula))
        case Box(agent, body):
            rel = model.frame.relation(agent)
            mask = (1 << ctx.n_objects) - 1
            rest = _cosat_mask(model, body)
            while rest:
                low = rest & -rest
                mask &= rel.preimages[low.bit_length() - 1]
                rest ^= low
        case _:
            raise ContractViolation(f"unknown formula node {formula!r}")
    model._sat[formula] = mask
    return mask


def _cosat_mask(model: Model, formula: Formula) -> int:
    """Features co-satisfying the formula (the description side of the table)."""
    cached = model._cosat.get(formula)
    if cached is not None:
        return cached
    ctx = model.ctx
    match formula:
        case Zero():
            mask = (1 << ctx.n_features) - 1
        case One():
            mask = 0
        case Prop(name):
            mask = model.valuation.get(name).intent.mask
        case Nominal(name):
            mask = ctx.row_masks[ctx.object_index(name)]
        case Conominal(name):
            mask = ctx._feat_upper[ctx.feature_index(name)]
        case Or(lhs, rhs):
            mask = _cosat_mask(model, lhs) & _cosat_mask(model, rhs)
        case And(_, _) | Box(_, _):
            # everything incident from all satisfying objects
            mask = up_mask(ctx, _sat_mask(model, formula))
        case DiamondBlack(agent, body):
            rel = model.frame.relation(agent)
            mask = (1 << ctx.n_features) - 1
            rest = _sat_mask(model, body)
            while rest:
                low = rest & -rest
                mask &= rel.rows[low.bit_length() - 1]
                rest ^= low
        case _:
            raise ContractViolation(f"unknown formula node {formula!r}")
    model._cosat[formula] = mask
    return mask


def satisfies(model: Model, object_name: str, formula: Formula) -> bool:
    """Does the named object belong to the formula's category?"""
    a = model.ctx.object_index(object_name)
    return bool(_sat_mask(model, formula) >> a & 1)


def cosatisfies(model: Model, feature_name: str, formula: Formula) -> bool:
    """Does the named feature describe the formula's category?"""
    x = model.ctx.feature_index(feature_name)
    return bool(_cosat_mask(model, formula) >> x & 1)


def extension(model: Model, formula: Formula) -> Concept:
    """Algebraic evaluation in the concept lattice (the independent route)."""
    cached = model._ext.get(formula)
    if cached is not None:
        return cached
    lat = model.lattice
    match formula:
        case Zero():
            value = lat.bottom
        case One():
            value = lat.top
        case Prop(name):
            value = model.valuation.get(name)
        case Nominal(name):
            value = lat.object_concept(name)
        case Conominal(name):
            value = lat.feature_concept(name)
        case And(lhs, rhs):
            value = meet(lat, extension(model, lhs), extension(model, rhs))
        case Or(lhs, rhs):
            value = join(lat, extension(model, lhs), extension(model, rhs))
        case Box(agent, body):
            value = box(model.frame, agent, extension(model, body))
        case DiamondBlack(agent, body):
            value = diamond_black(model.frame, agent, extension(model, body))
        case _:
            raise ContractViolation(f"unknown formula node {formula!r}")
    model._ext[formula] = value
    return value


def check_inequality(model: Model, ineq: Inequality) -> bool:
    """lhs <= rhs in the concept lattice of the model."""
    return model.lattice.leq(extension(model, ineq.lhs), extension(model, ineq.rhs))


# -- frame validity ---------------------------------------------------------------

VALIDITY_MODES = ("all_valuations", "conominal", "nominal")
DEFAULT_MAX_ASSIGNMENTS = 1_000_000


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    mode: str
    props: tuple[str, ...]
    counterexample: tuple[tuple[str, Concept], ...] | None
    assignments_checked: int


def frame_validity(frame: RsFrame, ineq: Inequality,
                   props: Iterable[str] | None = None,
                   mode: str = "all_valuations",
                   max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> ValidityReport:
    """Quantify the inequality's propositions over concepts of the frame.

    all_valuations ranges over every tuple of concepts (product enumeration in
    canonical order, last proposition varying fastest); conominal substitutes
    only feature-generated concepts for a single proposition, nominal only
    object-generated ones.  The counterexample reported is the first one in
    enumeration order.
    """
    if mode not in VALIDITY_MODES:
        raise ContractViolation(f"unknown validity mode {mode!r}")
    free = props_of(ineq.lhs) | props_of(ineq.rhs)
    if props is None:
        names = tuple(sorted(free))
    else:
        names = tuple(sorted(set(props)))
        if not free <= set(names):
            missing = ", ".join(sorted(free - set(names)))
            raise ContractViolation(f"inequality mentions unlisted propositions: {missing}")
    lat = frame.lattice

    if mode == "all_valuations":
        total = len(lat) ** len(names)
        if total > max_assignments:
            raise SizeLimitError(
                f"{total} valuations exceed the bound of {max_assignments}")
        candidate_tuples = itertools.product(lat.concepts, repeat=len(names))
    else:
        if len(names) > 1:
            raise ContractViolation(
                f"{mode} mode substitutes a single proposition, got {len(names)}")
        if mode == "conominal":
            generated = [lat.feature_concept(x) for x in frame.ctx.features]
        else:
            generated = [lat.object_concept(a) for a in frame.ctx.objects]
        candidate_tuples = (
            [(c,) for c in generated] if names else [()]
        )

    checked = 0
    for values in candidate_tuples:
        checked += 1
        model = Model(frame, Valuation(dict(zip(names, values))))
        if not check_inequality(model, ineq):
            return ValidityReport(False, mode, names,
                                  tuple(zip(names, values)), checked)
    return ValidityReport(True, mode, names, None, checked)


def frame_valid(frame: RsFrame, ineq: Inequality,
                props: Iterable[str] | None = None,
                mode: str = "all_valuations",
                max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> bool:
    return frame_validity(frame, ineq, props, mode, max_assignments).valid


# -- first-order correspondents ----------------------------------------------------

AXIOMS = ("box_zero", "factivity", "pos_intro")


def axiom_inequality(axiom: str, agent: int) -> Inequality:
    """The modal inequality whose frame validity the axiom's condition matches."""
    if axiom == "box_zero":
        return Inequality(Box(agent, Zero()), Zero())
    if axiom == "factivity":
        return Inequality(Box(agent, Prop("p")), Prop("p"))
    if axiom == "pos_intro":
        return Inequality(Box(agent, Prop("p")), Box(agent, Box(agent, Prop("p"))))
    raise ContractViolation(f"unknown axiom {axiom!r}")


def correspondent_holds(ctx: FormalContext, rel: AgentRelation, axiom: str) -> bool:
    """Evaluate the first-order frame condition directly on the matrices.

    Deliberately accepts raw (not necessarily compatible) relations.
    """
    if rel.ctx != ctx:
        raise ContractViolation("relation belongs to a different context")
    if axiom == "box_zero":
        # every object misses some feature according to the agent
        full = (1 << ctx.n_features) - 1
        return all(row != full for row in rel.rows)
    if axiom == "factivity":
        return all(rel.rows[a] & ~ctx.row_masks[a] == 0
                   for a in range(ctx.n_objects))
    if axiom == "pos_intro":
        for a in range(ctx.n_objects):
            rest = rel.rows[a]
            while rest:
                low = rest & -rest
                m = low.bit_length() - 1
                rest ^= low
                if up_mask(ctx, rel.preimages[m]) & ~rel.rows[a]:
                    return False
        return True
    raise ContractViolation(f"unknown axiom {axiom!r}")
