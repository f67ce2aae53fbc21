"""File formats and the command-line interface.

Context files use the Burmeister layout::

    B
    <blank>
    <number of objects>
    <number of features>
    <blank>
    <object names, one per line>
    <feature names, one per line>
    <one row per object: '.' or 'X' per feature>

Relation files are a header ``R <agent-id>`` followed by the same row block.
All output is deterministic; exit codes are 0 for success/true, 1 for a
property that is false, 2 for usage or parse errors, 3 for precondition
violations.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import logic, rscheck, social, translation
from .context import FormalContext
from .errors import (
    ContractViolation,
    DegenerateLatticeError,
    DegenerateResultError,
    FileFormatError,
    FormulaSyntaxError,
    PreconditionError,
    SizeLimitError,
    UnknownNameError,
)
from .lattice import duality_roundtrip, enumerate_concepts, format_concept
from .modal import AgentRelation, RsFrame, check_axiom_conditions, check_compatible


# -- .cxt and .rel ---------------------------------------------------------------

def _parse_rows(lines, start, count, width, source):
    rows = []
    for i in range(count):
        lineno = start + i
        if lineno > len(lines):
            raise FileFormatError("unexpected end of file in row block", source, lineno)
        row = lines[lineno - 1]
        if len(row) != width:
            raise FileFormatError(
                f"row has {len(row)} cells, expected {width}", source, lineno)
        mask = 0
        for c, ch in enumerate(row):
            if ch == "X":
                mask |= 1 << c
            elif ch != ".":
                raise FileFormatError(
                    f"illegal character {ch!r} in row (expected '.' or 'X')",
                    source, lineno)
        rows.append(mask)
    return rows


def _check_trailing(lines, used, source):
    for extra in range(used, len(lines)):
        if lines[extra].strip():
            raise FileFormatError("unexpected trailing content", source, extra + 1)


def parse_cxt(text: str, source: str = "<string>") -> FormalContext:
    lines = text.split("\n")
    if not lines or lines[0] != "B":
        raise FileFormatError("expected header 'B'", source, 1)
    if len(lines) < 2 or lines[1] != "":
        raise FileFormatError("expected a blank line after the header", source, 2)

    def read_count(lineno):
        if lineno > len(lines) or not lines[lineno - 1].isdigit():
            raise FileFormatError("expected a count", source, lineno)
        value = int(lines[lineno - 1])
        if value < 1:
            raise FileFormatError("counts must be at least 1", source, lineno)
        return value

    n = read_count(3)
    m = read_count(4)
    if len(lines) < 5 or lines[4] != "":
        raise FileFormatError("expected a blank line after the counts", source, 5)
    names_start = 6
    if len(lines) < names_start - 1 + n + m:
        raise FileFormatError("missing name lines", source, len(lines))
    objects = lines[names_start - 1:names_start - 1 + n]
    features = lines[names_start - 1 + n:names_start - 1 + n + m]
    for offset, name in enumerate(objects + features):
        if not name:
            raise FileFormatError("empty name line", source, names_start + offset)
    rows_start = names_start + n + m
    rows = _parse_rows(lines, rows_start, n, m, source)
    _check_trailing(lines, rows_start - 1 + n, source)
    try:
        return FormalContext.from_row_masks(objects, features, rows)
    except ContractViolation as exc:
        raise FileFormatError(str(exc), source) from exc


def format_cxt(ctx: FormalContext) -> str:
    lines = ["B", "", str(ctx.n_objects), str(ctx.n_features), ""]
    lines.extend(ctx.objects)
    lines.extend(ctx.features)
    for mask in ctx.row_masks:
        lines.append("".join("X" if mask >> c & 1 else "."
                             for c in range(ctx.n_features)))
    return "\n".join(lines) + "\n"


def load_cxt(path: str | Path) -> FormalContext:
    path = Path(path)
    return parse_cxt(path.read_text(encoding="utf-8"), source=str(path))


def save_cxt(ctx: FormalContext, path: str | Path) -> None:
    Path(path).write_text(format_cxt(ctx), encoding="utf-8")


def parse_rel(text: str, ctx: FormalContext, source: str = "<string>") -> AgentRelation:
    lines = text.split("\n")
    if not lines:
        raise FileFormatError("empty relation file", source, 1)
    header = lines[0].split(" ")
    if len(header) != 2 or header[0] != "R" or not header[1].isdigit():
        raise FileFormatError("expected header 'R <agent-id>'", source, 1)
    agent_id = int(header[1])
    rows = _parse_rows(lines, 2, ctx.n_objects, ctx.n_features, source)
    _check_trailing(lines, 1 + ctx.n_objects, source)
    return AgentRelation(ctx, agent_id, rows)


def format_rel(rel: AgentRelation) -> str:
    lines = [f"R {rel.agent_id}"]
    for mask in rel.rows:
        lines.append("".join("X" if mask >> c & 1 else "."
                             for c in range(rel.ctx.n_features)))
    return "\n".join(lines) + "\n"


def load_rel(path: str | Path, ctx: FormalContext) -> AgentRelation:
    path = Path(path)
    return parse_rel(path.read_text(encoding="utf-8"), ctx, source=str(path))


def save_rel(rel: AgentRelation, path: str | Path) -> None:
    Path(path).write_text(format_rel(rel), encoding="utf-8")


@dataclass(frozen=True)
class Workspace:
    """Paths of a context plus its agent relation files."""

    context_path: str
    relation_paths: tuple[str, ...] = ()

    def load_context(self) -> FormalContext:
        return load_cxt(self.context_path)

    def load_relations(self, ctx: FormalContext) -> tuple[AgentRelation, ...]:
        return tuple(load_rel(p, ctx) for p in self.relation_paths)

    def load_frame(self) -> RsFrame:
        ctx = self.load_context()
        return RsFrame(ctx, self.load_relations(ctx))


# -- rendering helpers --------------------------------------------------------------

def _bool(value: bool) -> str:
    return "yes" if value else "no"


def _relation_status_line(rel: AgentRelation) -> str:
    return (f"# agent {rel.agent_id}: compatible={_bool(rel.compatible)} "
            f"factive={_bool(rel.factive)} serial={_bool(rel.serial)} "
            f"pos-introspective={_bool(rel.pos_introspective)}")


def _load_workspace(args) -> tuple[FormalContext, tuple[AgentRelation, ...]]:
    ws = Workspace(args.context, tuple(getattr(args, "relations", ()) or ()))
    ctx = ws.load_context()
    rels = ws.load_relations(ctx)
    for rel in rels:
        print(_relation_status_line(rel))
    return ctx, rels


def _parse_valuation(lat, specs) -> logic.Valuation:
    assignments = {}
    for spec in specs or ():
        if "=" not in spec:
            raise ContractViolation(
                f"valuation {spec!r} must look like p=obj:a1,a2 or p=feat:x1")
        prop, value = spec.split("=", 1)
        if ":" not in value:
            raise ContractViolation(f"valuation {spec!r} is missing obj:/feat:")
        kind, names_text = value.split(":", 1)
        names = [n for n in names_text.split(",") if n]
        if kind == "obj":
            v = logic.Valuation.from_object_generators(lat, {prop: names})
        elif kind == "feat":
            v = logic.Valuation.from_feature_generators(lat, {prop: names})
        else:
            raise ContractViolation(f"unknown generator kind {kind!r} in {spec!r}")
        assignments[prop] = v.get(prop)
    return logic.Valuation(assignments)


# -- subcommands ----------------------------------------------------------------------

def _cmd_lattice(args) -> int:
    ctx = load_cxt(args.context)
    lat = enumerate_concepts(ctx)
    if args.dot:
        print(lat.to_dot(), end="")
        return 0
    print(f"{len(lat)} concepts")
    for i, c in enumerate(lat):
        print(f"c{i}: {format_concept(ctx, c)}")
    return 0


def _cmd_check_rs(args) -> int:
    ctx = load_cxt(args.context)
    report = rscheck.is_rs(ctx)
    for line in report.lines():
        print(line)
    print(f"RS: {_bool(report.is_rs)}")
    return 0 if report.is_rs else 1


def _cmd_prune(args) -> int:
    ctx = load_cxt(args.context)
    pruned = rscheck.prune(ctx)
    save_cxt(pruned, args.output)
    print(f"pruned: {ctx.n_objects}x{ctx.n_features} -> "
          f"{pruned.n_objects}x{pruned.n_features}")
    return 0


def _cmd_check_rel(args) -> int:
    ctx = load_cxt(args.context)
    rel = load_rel(args.relation, ctx)
    compat = check_compatible(ctx, rel)
    axioms = check_axiom_conditions(ctx, rel)
    print(f"compatible: {_bool(compat.ok)}")
    if compat.feature_witness is not None:
        print(f"  unstable column preimage at feature: {compat.feature_witness}")
    if compat.object_witness is not None:
        print(f"  unstable row image at object: {compat.object_witness}")
    print(f"factive: {_bool(axioms.factive)}")
    if axioms.factivity_witness is not None:
        a, x = axioms.factivity_witness
        print(f"  attributes {x} to {a} contrary to the incidence")
    print(f"serial: {_bool(axioms.serial)}")
    if axioms.serial_witness is not None:
        print(f"  full attribution row at object: {axioms.serial_witness}")
    print(f"positive introspection: {_bool(axioms.pos_introspective)}")
    if axioms.pos_intro_witness is not None:
        a, m = axioms.pos_intro_witness
        print(f"  fails at object {a}, feature {m}")
    return 0 if compat.ok else 1


def _cmd_eval(args) -> int:
    ctx, rels = _load_workspace(args)
    frame = RsFrame(ctx, rels)
    valuation = _parse_valuation(frame.lattice, args.val)
    model = logic.Model(frame, valuation)
    formula = logic.parse_formula(args.formula)
    if args.at is not None:
        verdict = logic.satisfies(model, args.at, formula)
        print(f"satisfies({args.at}): {str(verdict).lower()}")
        return 0 if verdict else 1
    if args.co is not None:
        verdict = logic.cosatisfies(model, args.co, formula)
        print(f"cosatisfies({args.co}): {str(verdict).lower()}")
        return 0 if verdict else 1
    concept = logic.extension(model, formula)
    print(format_concept(ctx, concept))
    return 0


_MODE_NAMES = {"all": "all_valuations", "conominal": "conominal", "nominal": "nominal"}


def _cmd_valid(args) -> int:
    ctx, rels = _load_workspace(args)
    frame = RsFrame(ctx, rels)
    ineq = logic.parse_inequality(args.inequality)
    report = logic.frame_validity(frame, ineq, mode=_MODE_NAMES[args.mode])
    print(f"valid: {_bool(report.valid)}")
    if not report.valid:
        for prop, concept in report.counterexample:
            print(f"counterexample: {prop} := {format_concept(ctx, concept)}")
    return 0 if report.valid else 1


def _cmd_translate(args) -> int:
    ineq = logic.parse_inequality(args.inequality)
    fo = translation.translate_inequality(ineq)
    print(translation.format_fo(fo, unicode=not args.ascii,
                                expand_orders=args.expand_orders))
    return 0


def _cmd_correspond(args) -> int:
    ctx = load_cxt(args.context)
    rel = load_rel(args.relation, ctx)
    print(_relation_status_line(rel))
    frame = RsFrame(ctx, [rel])
    ineq = logic.axiom_inequality(args.axiom, rel.agent_id)
    valid = logic.frame_valid(frame, ineq)
    holds = logic.correspondent_holds(ctx, rel, args.axiom)
    print(f"axiom: {args.axiom} ({logic.format_inequality(ineq)})")
    print(f"frame validity (all valuations): {str(valid).lower()}")
    print(f"first-order correspondent: {str(holds).lower()}")
    print("AGREE" if valid == holds else "DISAGREE")
    return 0 if valid and holds else 1


def _cmd_common(args) -> int:
    ctx, rels = _load_workspace(args)
    frame = RsFrame(ctx, rels)
    model = social.SocialModel(frame, require_axioms=not args.force)
    features = [args.feature] if args.feature else list(ctx.features)
    for x in features:
        concept = social.common(model, frame.lattice.feature_concept(x),
                                force=args.force)
        print(f"C({x}) = {format_concept(ctx, concept)}")
    rc = social.common_relation(model, force=args.force)
    print("R_C:")
    for line in format_rel(rc).splitlines()[1:]:
        print(f"  {line}")
    report = social.check_common_axioms(model) if not args.force else None
    if report is not None:
        print(f"C(u) <= u for all u: {_bool(report.deflation_ok)}")
        print(f"C(u) <= C(C(u)) for all u: {_bool(report.introspection_ok)}")
        print(f"R_C factive: {_bool(report.relation_factive)}")
        print(f"R_C compatible: {_bool(report.relation_compatible)}")
        print(f"R_C positive introspection: {_bool(report.relation_pos_introspective)}")
        return 0 if report.all_ok else 1
    return 0


def _cmd_duality(args) -> int:
    ctx = load_cxt(args.context)
    report = duality_roundtrip(ctx)
    print(f"isomorphic: {_bool(report.isomorphic)}")
    if report.isomorphic:
        for src, dst in report.object_map:
            print(f"object {src} -> {dst}")
        for src, dst in report.feature_map:
            print(f"feature {src} -> {dst}")
    return 0 if report.isomorphic else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsmodal",
        description="Concept lattices and epistemic modal operators over "
                    "object-feature contexts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", help="enumerate the concept lattice")
    p.add_argument("context")
    p.add_argument("--dot", action="store_true", help="emit a DOT Hasse diagram")
    p.set_defaults(func=_cmd_lattice)

    p = sub.add_parser("check-rs", help="report separation/reduction violations")
    p.add_argument("context")
    p.set_defaults(func=_cmd_check_rs)

    p = sub.add_parser("prune", help="clarify and reduce a context")
    p.add_argument("context")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_prune)

    p = sub.add_parser("check-rel", help="compatibility and axiom flags of a relation")
    p.add_argument("context")
    p.add_argument("relation")
    p.set_defaults(func=_cmd_check_rel)

    p = sub.add_parser("eval", help="evaluate a formula in a model")
    p.add_argument("context")
    p.add_argument("relations", nargs="*")
    p.add_argument("-v", "--val", action="append", metavar="p=obj:a1,a2",
                   help="valuation entry; generators are closed automatically")
    p.add_argument("-f", "--formula", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--at", metavar="OBJECT",
                       help="report satisfaction at this object")
    group.add_argument("--co", metavar="FEATURE",
                       help="report co-satisfaction at this feature")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("valid", help="check an inequality over all valuations")
    p.add_argument("context")
    p.add_argument("relations", nargs="*")
    p.add_argument("-i", "--inequality", required=True, metavar="'phi <= psi'")
    p.add_argument("--mode", choices=sorted(_MODE_NAMES), default="all")
    p.set_defaults(func=_cmd_valid)

    p = sub.add_parser("translate", help="standard translation of an inequality")
    p.add_argument("-i", "--inequality", required=True, metavar="'phi <= psi'")
    p.add_argument("--ascii", action="store_true")
    p.add_argument("--expand-orders", action="store_true",
                   help="spell out order atoms as quantified implications")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("correspond",
                       help="frame validity vs. first-order correspondent")
    p.add_argument("context")
    p.add_argument("relation")
    p.add_argument("--axiom", required=True, choices=logic.AXIOMS)
    p.set_defaults(func=_cmd_correspond)

    p = sub.add_parser("common", help="common-category operator of two agents")
    p.add_argument("context")
    p.add_argument("relations", nargs="+")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--feature", metavar="FEATURE")
    group.add_argument("--all", action="store_true", default=False)
    p.add_argument("--force", action="store_true",
                   help="skip the axiom preconditions; meet over all strings")
    p.set_defaults(func=_cmd_common)

    p = sub.add_parser("duality", help="round-trip a context through its lattice")
    p.add_argument("context")
    p.set_defaults(func=_cmd_duality)

    return parser


def _error(category: str, exc: Exception) -> None:
    message = " ".join(str(exc).split())
    print(f"error: {category}: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (FileFormatError, FormulaSyntaxError) as exc:
        _error("parse", exc)
        return 2
    except UnknownNameError as exc:
        _error("usage", exc)
        return 2
    except OSError as exc:
        _error("io", exc)
        return 2
    except (PreconditionError, ContractViolation, SizeLimitError,
            DegenerateLatticeError, DegenerateResultError) as exc:
        _error("precondition", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
