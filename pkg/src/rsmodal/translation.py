"""Standard translation into two-sorted first-order logic, with an evaluator.

The target language has object-sorted and feature-sorted terms, the incidence
and agent relations, order atoms on both sorts, and a pair of unary
predicates per proposition (members / describers).  Order atoms are kept
abstract in the AST; the evaluator reads them off the precomputed
specialization preorders, and ``expand_leq`` rewrites them into their
defining universally quantified form so both readings can be compared.

Nominals and conominals translate to constants naming context elements.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from . import logic
from .context import FormalContext
from .errors import ContractViolation, UnknownNameError


class Sort(enum.Enum):
    OBJECT = "object"
    FEATURE = "feature"


@dataclass(frozen=True)
class Term:
    name: str
    sort: Sort
    const: bool = False  # constants name context elements; variables are bound


def obj_var(name: str) -> Term:
    return Term(name, Sort.OBJECT)


def feat_var(name: str) -> Term:
    return Term(name, Sort.FEATURE)


def obj_const(name: str) -> Term:
    return Term(name, Sort.OBJECT, const=True)


def feat_const(name: str) -> Term:
    return Term(name, Sort.FEATURE, const=True)


class FoFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Equal(FoFormula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Incidence(FoFormula):
    obj: Term
    feat: Term


@dataclass(frozen=True)
class Rel(FoFormula):
    agent: int
    obj: Term
    feat: Term


@dataclass(frozen=True)
class Pred1(FoFormula):
    prop: str
    obj: Term


@dataclass(frozen=True)
class Pred2(FoFormula):
    prop: str
    feat: Term


@dataclass(frozen=True)
class LeqA(FoFormula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class LeqX(FoFormula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Not(FoFormula):
    body: FoFormula


@dataclass(frozen=True)
class FoAnd(FoFormula):
    lhs: FoFormula
    rhs: FoFormula


@dataclass(frozen=True)
class FoOr(FoFormula):
    lhs: FoFormula
    rhs: FoFormula


@dataclass(frozen=True)
class Implies(FoFormula):
    lhs: FoFormula
    rhs: FoFormula


@dataclass(frozen=True)
class ForallA(FoFormula):
    var: Term
    body: FoFormula


@dataclass(frozen=True)
class ForallX(FoFormula):
    var: Term
    body: FoFormula


@dataclass(frozen=True)
class ExistsA(FoFormula):
    var: Term
    body: FoFormula


@dataclass(frozen=True)
class ExistsX(FoFormula):
    var: Term
    body: FoFormula


class FreshVars:
    """Supply of fresh variable names per sort: a, b, c, ... and x, y, z, ..."""

    _OBJ = ("a", "b", "c", "d", "e", "f", "g")
    _FEAT = ("x", "y", "z", "u", "v", "w")

    def __init__(self, reserved: set[str] | None = None):
        self._used = set(reserved or ())

    def _next(self, pool) -> str:
        for name in pool:
            if name not in self._used:
                self._used.add(name)
                return name
        i = 1
        while True:
            name = f"{pool[0]}{i}"
            if name not in self._used:
                self._used.add(name)
                return name
            i += 1

    def next_obj(self) -> Term:
        return obj_var(self._next(self._OBJ))

    def next_feat(self) -> Term:
        return feat_var(self._next(self._FEAT))


def _as_obj_var(avar) -> Term:
    if isinstance(avar, str):
        return obj_var(avar)
    if isinstance(avar, Term) and avar.sort is Sort.OBJECT and not avar.const:
        return avar
    raise ContractViolation(f"expected an object-sorted variable, got {avar!r}")


def _as_feat_var(xvar) -> Term:
    if isinstance(xvar, str):
        return feat_var(xvar)
    if isinstance(xvar, Term) and xvar.sort is Sort.FEATURE and not xvar.const:
        return xvar
    raise ContractViolation(f"expected a feature-sorted variable, got {xvar!r}")


def st_a(formula: logic.Formula, avar, fresh: FreshVars | None = None) -> FoFormula:
    """Object-side standard translation at the given object variable."""
    a = _as_obj_var(avar)
    fresh = fresh or FreshVars(reserved={a.name})
    match formula:
        case logic.Zero():
            return Not(Equal(a, a))
        case logic.One():
            return Equal(a, a)
        case logic.Prop(name):
            return Pred1(name, a)
        case logic.Nominal(name):
            return LeqA(a, obj_const(name))
        case logic.Conominal(name):
            return Incidence(a, feat_const(name))
        case logic.And(lhs, rhs):
            return FoAnd(st_a(lhs, a, fresh), st_a(rhs, a, fresh))
        case logic.Or(_, _):
            x = fresh.next_feat()
            return ForallX(x, Implies(st_x(formula, x, fresh), Incidence(a, x)))
        case logic.Box(agent, body):
            x = fresh.next_feat()
            return ForallX(x, Implies(st_x(body, x, fresh), Rel(agent, a, x)))
        case logic.DiamondBlack(_, _):
            x = fresh.next_feat()
            return ForallX(x, Implies(st_x(formula, x, fresh), Incidence(a, x)))
    raise ContractViolation(f"unknown formula node {formula!r}")


def st_x(formula: logic.Formula, xvar, fresh: FreshVars | None = None) -> FoFormula:
    """Feature-side standard translation at the given feature variable."""
    x = _as_feat_var(xvar)
    fresh = fresh or FreshVars(reserved={x.name})
    match formula:
        case logic.Zero():
            return Equal(x, x)
        case logic.One():
            return Not(Equal(x, x))
        case logic.Prop(name):
            return Pred2(name, x)
        case logic.Nominal(name):
            return Incidence(obj_const(name), x)
        case logic.Conominal(name):
            return LeqX(feat_const(name), x)
        case logic.Or(lhs, rhs):
            return FoAnd(st_x(lhs, x, fresh), st_x(rhs, x, fresh))
        case logic.And(_, _):
            a = fresh.next_obj()
            return ForallA(a, Implies(st_a(formula, a, fresh), Incidence(a, x)))
        case logic.Box(_, _):
            a = fresh.next_obj()
            return ForallA(a, Implies(st_a(formula, a, fresh), Incidence(a, x)))
        case logic.DiamondBlack(agent, body):
            a = fresh.next_obj()
            return ForallA(a, Implies(st_a(body, a, fresh), Rel(agent, a, x)))
    raise ContractViolation(f"unknown formula node {formula!r}")


def translate_inequality(ineq: logic.Inequality) -> FoFormula:
    """The inequality holds iff every object satisfying lhs satisfies rhs."""
    fresh = FreshVars()
    a = fresh.next_obj()
    return ForallA(a, Implies(st_a(ineq.lhs, a, fresh), st_a(ineq.rhs, a, fresh)))


# -- evaluation ----------------------------------------------------------------------

@dataclass(frozen=True)
class FoEnvironment:
    """A model together with variable bindings (name -> element index)."""

    model: logic.Model
    bindings: Mapping[str, int] = field(default_factory=dict)

    def bind(self, var: Term, index: int) -> "FoEnvironment":
        new = dict(self.bindings)
        new[var.name] = index
        return FoEnvironment(self.model, new)


def _resolve(env: FoEnvironment, term: Term) -> int:
    ctx = env.model.ctx
    if term.const:
        if term.sort is Sort.OBJECT:
            return ctx.object_index(term.name)
        return ctx.feature_index(term.name)
    try:
        return env.bindings[term.name]
    except KeyError:
        raise ContractViolation(f"unbound variable {term.name!r}") from None


def fo_eval(model: logic.Model, formula: FoFormula,
            env: FoEnvironment | Mapping[str, int] | None = None) -> bool:
    """Tarskian evaluation over the model's two-sorted structure."""
    if env is None:
        env = FoEnvironment(model)
    elif isinstance(env, Mapping):
        env = FoEnvironment(model, dict(env))
    elif env.model is not model:
        raise ContractViolation("environment was built for a different model")
    return _eval(env, formula)


def _eval(env: FoEnvironment, f: FoFormula) -> bool:
    model = env.model
    ctx = model.ctx
    match f:
        case Equal(lhs, rhs):
            if lhs.sort is not rhs.sort:
                raise ContractViolation("equality between different sorts")
            return _resolve(env, lhs) == _resolve(env, rhs)
        case Incidence(obj, feat):
            return bool(ctx.row_masks[_resolve(env, obj)]
                        >> _resolve(env, feat) & 1)
        case Rel(agent, obj, feat):
            rel = model.frame.relation(agent)
            return rel.has(_resolve(env, obj), _resolve(env, feat))
        case Pred1(prop, obj):
            concept = model.valuation.get(prop)
            return bool(concept.extent.mask >> _resolve(env, obj) & 1)
        case Pred2(prop, feat):
            concept = model.valuation.get(prop)
            return bool(concept.intent.mask >> _resolve(env, feat) & 1)
        case LeqA(lhs, rhs):
            return ctx.obj_leq(_resolve(env, lhs), _resolve(env, rhs))
        case LeqX(lhs, rhs):
            return ctx.feat_leq(_resolve(env, lhs), _resolve(env, rhs))
        case Not(body):
            return not _eval(env, body)
        case FoAnd(lhs, rhs):
            return _eval(env, lhs) and _eval(env, rhs)
        case FoOr(lhs, rhs):
            return _eval(env, lhs) or _eval(env, rhs)
        case Implies(lhs, rhs):
            return not _eval(env, lhs) or _eval(env, rhs)
        case ForallA(var, body):
            return all(_eval(env.bind(var, i), body)
                       for i in range(ctx.n_objects))
        case ForallX(var, body):
            return all(_eval(env.bind(var, i), body)
                       for i in range(ctx.n_features))
        case ExistsA(var, body):
            return any(_eval(env.bind(var, i), body)
                       for i in range(ctx.n_objects))
        case ExistsX(var, body):
            return any(_eval(env.bind(var, i), body)
                       for i in range(ctx.n_features))
    raise ContractViolation(f"unknown first-order node {f!r}")


# -- static checks and rewrites --------------------------------------------------------

def check_sorts(f: FoFormula, bound: Mapping[str, Sort] | None = None) -> None:
    """Verify that terms appear only at positions of their sort and that all
    variables are bound by a quantifier of the same sort."""
    bound = dict(bound or {})

    def term(t: Term, want: Sort) -> None:
        if t.sort is not want:
            raise ContractViolation(
                f"term {t.name!r} has sort {t.sort.value}, expected {want.value}")
        if not t.const and bound.get(t.name) is not t.sort:
            raise ContractViolation(f"variable {t.name!r} is unbound here")

    match f:
        case Equal(lhs, rhs):
            term(lhs, lhs.sort)
            term(rhs, lhs.sort)
        case Incidence(obj, feat) | Rel(_, obj, feat):
            term(obj, Sort.OBJECT)
            term(feat, Sort.FEATURE)
        case Pred1(_, obj):
            term(obj, Sort.OBJECT)
        case Pred2(_, feat):
            term(feat, Sort.FEATURE)
        case LeqA(lhs, rhs):
            term(lhs, Sort.OBJECT)
            term(rhs, Sort.OBJECT)
        case LeqX(lhs, rhs):
            term(lhs, Sort.FEATURE)
            term(rhs, Sort.FEATURE)
        case Not(body):
            check_sorts(body, bound)
        case FoAnd(lhs, rhs) | FoOr(lhs, rhs) | Implies(lhs, rhs):
            check_sorts(lhs, bound)
            check_sorts(rhs, bound)
        case ForallA(var, body) | ExistsA(var, body):
            if var.sort is not Sort.OBJECT or var.const:
                raise ContractViolation(
                    f"object quantifier binds {var!r}")
            check_sorts(body, {**bound, var.name: Sort.OBJECT})
        case ForallX(var, body) | ExistsX(var, body):
            if var.sort is not Sort.FEATURE or var.const:
                raise ContractViolation(
                    f"feature quantifier binds {var!r}")
            check_sorts(body, {**bound, var.name: Sort.FEATURE})
        case _:
            raise ContractViolation(f"unknown first-order node {f!r}")


def _collect_names(f: FoFormula, into: set[str]) -> None:
    match f:
        case Equal(lhs, rhs) | LeqA(lhs, rhs) | LeqX(lhs, rhs):
            into.add(lhs.name)
            into.add(rhs.name)
        case Incidence(obj, feat) | Rel(_, obj, feat):
            into.add(obj.name)
            into.add(feat.name)
        case Pred1(_, t) | Pred2(_, t):
            into.add(t.name)
        case Not(body):
            _collect_names(body, into)
        case FoAnd(lhs, rhs) | FoOr(lhs, rhs) | Implies(lhs, rhs):
            _collect_names(lhs, into)
            _collect_names(rhs, into)
        case ForallA(var, body) | ForallX(var, body) \
                | ExistsA(var, body) | ExistsX(var, body):
            into.add(var.name)
            _collect_names(body, into)


def expand_leq(f: FoFormula) -> FoFormula:
    """Rewrite order atoms into their defining quantified implications."""
    names: set[str] = set()
    _collect_names(f, names)
    fresh = FreshVars(reserved=names)

    def go(g: FoFormula) -> FoFormula:
        match g:
            case LeqA(lhs, rhs):
                x = fresh.next_feat()
                return ForallX(x, Implies(Incidence(rhs, x), Incidence(lhs, x)))
            case LeqX(lhs, rhs):
                a = fresh.next_obj()
                return ForallA(a, Implies(Incidence(a, lhs), Incidence(a, rhs)))
            case Not(body):
                return Not(go(body))
            case FoAnd(lhs, rhs):
                return FoAnd(go(lhs), go(rhs))
            case FoOr(lhs, rhs):
                return FoOr(go(lhs), go(rhs))
            case Implies(lhs, rhs):
                return Implies(go(lhs), go(rhs))
            case ForallA(var, body):
                return ForallA(var, go(body))
            case ForallX(var, body):
                return ForallX(var, go(body))
            case ExistsA(var, body):
                return ExistsA(var, go(body))
            case ExistsX(var, body):
                return ExistsX(var, go(body))
            case _:
                return g

    return go(f)


# -- printing -------------------------------------------------------------------------

_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")

_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_ATOM = 1, 2, 3, 4


def format_fo(f: FoFormula, unicode: bool = True,
              expand_orders: bool = False) -> str:
    """Pretty-print, optionally expanding order atoms into their definitions.

    With a single proposition the predicate pair prints bare (P1/P2); with
    several, the proposition name is carried in brackets.
    """
    if expand_orders:
        f = expand_leq(f)
    props: set[str] = set()

    def scan(g: FoFormula) -> None:
        match g:
            case Pred1(prop, _) | Pred2(prop, _):
                props.add(prop)
            case Not(body):
                scan(body)
            case FoAnd(lhs, rhs) | FoOr(lhs, rhs) | Implies(lhs, rhs):
                scan(lhs)
                scan(rhs)
            case ForallA(_, body) | ForallX(_, body) \
                    | ExistsA(_, body) | ExistsX(_, body):
                scan(body)

    scan(f)
    tag = (lambda p: "") if len(props) <= 1 else (lambda p: f"[{p}]")

    def pred(which: str, prop: str, term: Term) -> str:
        if unicode:
            return f"P{which.translate(_SUBSCRIPTS)}{tag(prop)}({term.name})"
        return f"P{which}{tag(prop)}({term.name})"

    def go(g: FoFormula, min_prec: int) -> str:
        match g:
            case Equal(lhs, rhs):
                return f"{lhs.name} = {rhs.name}"
            case Incidence(obj, feat):
                mid = " ⊥ " if unicode else " _|_ "
                return f"{obj.name}{mid}{feat.name}"
            case Rel(agent, obj, feat):
                if unicode:
                    return f"{obj.name}R{str(agent).translate(_SUBSCRIPTS)}{feat.name}"
                return f"{obj.name} R{agent} {feat.name}"
            case Pred1(prop, obj):
                return pred("1", prop, obj)
            case Pred2(prop, feat):
                return pred("2", prop, feat)
            case LeqA(lhs, rhs) | LeqX(lhs, rhs):
                mid = " ≤ " if unicode else " <= "
                return f"{lhs.name}{mid}{rhs.name}"
            case Not(body):
                neg = "¬" if unicode else "~"
                return f"{neg}({go(body, 0)})"
            case FoAnd(lhs, rhs):
                mid = " ∧ " if unicode else " & "
                text = f"{go(lhs, _PREC_AND)}{mid}{go(rhs, _PREC_AND + 1)}"
                return f"({text})" if min_prec > _PREC_AND else text
            case FoOr(lhs, rhs):
                mid = " ∨ " if unicode else " | "
                text = f"{go(lhs, _PREC_OR)}{mid}{go(rhs, _PREC_OR + 1)}"
                return f"({text})" if min_prec > _PREC_OR else text
            case Implies(lhs, rhs):
                mid = " → " if unicode else " -> "
                text = f"{go(lhs, _PREC_IMPLIES + 1)}{mid}{go(rhs, _PREC_IMPLIES)}"
                return f"({text})" if min_prec > _PREC_IMPLIES else text
            case ForallA(var, body) | ForallX(var, body):
                head = "∀" if unicode else "forall "
                if unicode:
                    return f"{head}{var.name}({go(body, 0)})"
                return f"{head}{var.name} ({go(body, 0)})"
            case ExistsA(var, body) | ExistsX(var, body):
                head = "∃" if unicode else "exists "
                if unicode:
                    return f"{head}{var.name}({go(body, 0)})"
                return f"{head}{var.name} ({go(body, 0)})"
        raise ContractViolation(f"unknown first-order node {g!r}")

    return go(f, 0)
