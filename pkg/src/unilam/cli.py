"""Command-line interface.

Exit status: 0 for pass/yes, 1 for fail/no, 2 for unsupported or any
error (including parse errors, reported with line and column).
"""

from __future__ import annotations

import argparse
import json
import sys

from .distrib import canonicalize
from .evaluate import DEFAULT_FUEL, normalize, trace
from .judgments import NoDerivation, check_orthogonality, infer, validate_semantically
from .lambdaq import (
    AdequacyViolation,
    GateTable,
    QTypeError,
    StuckError,
    adequacy_check,
    load_program,
    lq_run,
    program_to_doc,
    translate_program,
    typecheck_program,
)
from .parser import (
    ParseError,
    parse_orthogonality_judgment,
    parse_term,
    parse_type,
    parse_typing_judgment,
)
from .pretty import (
    complex_record,
    derivation_record,
    dist_records,
    matrix_records,
    pretty_dist,
    pretty_type,
)
from .prelude import prelude
from .semantics import Tri, check_unitary_endo
from .unitypes import TPureArrow, TUnitArrow, UnsupportedType


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except (UnsupportedType, QTypeError, StuckError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="unilam",
        description="Evaluate, type and check unitarity in the unitary "
        "linear-algebraic lambda calculus; run quantum circuit programs.",
    )
    sub = top.add_subparsers(required=True)

    p = sub.add_parser("eval", help="normalize a term distribution")
    p.add_argument("expr")
    _common(p)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("check-unitary", help="probe a term as a unitary")
    p.add_argument("expr")
    p.add_argument("--type", required=True, dest="type_text")
    _common(p)
    p.set_defaults(run=cmd_check_unitary)

    p = sub.add_parser("typecheck", help="derive or validate a judgment")
    p.add_argument("judgment")
    p.add_argument("--semantic", action="store_true")
    _common(p)
    p.set_defaults(run=cmd_typecheck)

    p = sub.add_parser("orth", help="check an orthogonality judgment")
    p.add_argument("judgment")
    _common(p)
    p.set_defaults(run=cmd_orth)

    lq = sub.add_parser("lq", help="quantum circuit programs")
    lqsub = lq.add_subparsers(required=True)
    for name, runner in (
        ("typecheck", cmd_lq_typecheck),
        ("run", cmd_lq_run),
        ("translate", cmd_lq_translate),
        ("adequacy", cmd_lq_adequacy),
    ):
        q = lqsub.add_parser(name)
        q.add_argument("file")
        q.add_argument("--gates")
        _common(q)
        q.set_defaults(run=runner)
    return top


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--json", action="store_true", dest="as_json")


def _emit(args, payload: dict, human: str) -> None:
    if args.as_json:
        print(json.dumps(payload, indent=2))
    else:
        print(human)


def cmd_eval(args) -> int:
    d = canonicalize(parse_term(args.expr, prelude()))
    if args.trace:
        snapshots = trace(d, args.fuel)
        payload = {"trace": [dist_records(s) for s in snapshots]}
        human = "\n".join(pretty_dist(s) for s in snapshots)
        _emit(args, payload, human)
        return 0 if normalize(snapshots[-1], 0).normal else 2
    outcome = normalize(d, args.fuel)
    payload = {
        "normal": outcome.normal,
        "steps": outcome.steps,
        "result": dist_records(outcome.dist),
    }
    _emit(args, payload, pretty_dist(outcome.dist))
    return 0 if outcome.normal else 2


def cmd_check_unitary(args) -> int:
    d = canonicalize(parse_term(args.expr, prelude()))
    ty = parse_type(args.type_text)
    if isinstance(ty, TPureArrow):
        arrow = "pure"
    elif isinstance(ty, TUnitArrow):
        arrow = "unit"
    else:
        raise UnsupportedType(f"expected an arrow type, got {pretty_type(ty)}")
    report = check_unitary_endo(d, ty.dom, ty.cod, arrow, args.fuel)
    payload = {
        "verdict": report.verdict,
        "reason": report.reason,
        "basis": [str(b) for b in report.basis_inputs],
        "images": [dist_records(v) for v in report.images],
        "gram": matrix_records(report.gram),
        "matrix": matrix_records(report.matrix),
    }
    lines = [f"verdict: {report.verdict}"]
    if report.reason:
        lines.append(f"reason: {report.reason}")
    if report.matrix is not None:
        for row in report.matrix:
            lines.append("  ".join(f"{c.real:+.8g}{c.imag:+.8g}i" for c in row))
    _emit(args, payload, "\n".join(lines))
    return 0 if report.passed else 1


def cmd_typecheck(args) -> int:
    j = parse_typing_judgment(args.judgment, prelude())
    if args.semantic:
        verdict = validate_semantically(j, args.fuel)
        _emit(args, {"verdict": verdict.value}, verdict.value)
        return _tri_status(verdict)
    try:
        deriv = infer(j.ctx, j.term, j.ty, args.fuel)
    except NoDerivation as e:
        _emit(args, {"verdict": "no", "reason": str(e)}, f"no: {e}")
        return 1
    _emit(args, {"verdict": "yes", "derivation": derivation_record(deriv)}, "yes")
    return 0


def cmd_orth(args) -> int:
    j = parse_orthogonality_judgment(args.judgment, prelude())
    verdict = check_orthogonality(j, args.fuel)
    _emit(args, {"verdict": verdict.value}, verdict.value)
    return _tri_status(verdict)


def _tri_status(v: Tri) -> int:
    return {Tri.YES: 0, Tri.NO: 1, Tri.UNSUPPORTED: 2}[v]


def _gates(args) -> GateTable:
    table = GateTable.default()
    if getattr(args, "gates", None):
        with open(args.gates, "r", encoding="utf-8") as fh:
            table.load(json.load(fh))
    return table


def cmd_lq_typecheck(args) -> int:
    p = load_program(args.file)
    try:
        ty = typecheck_program(p)
    except QTypeError as e:
        _emit(args, {"verdict": "no", "reason": str(e)}, f"no: {e}")
        return 1
    _emit(args, {"verdict": "yes", "type": str(ty)}, f"yes: {ty}")
    return 0


def cmd_lq_run(args) -> int:
    p = load_program(args.file)
    typecheck_program(p)
    outcome = lq_run(p, args.fuel, _gates(args))
    payload = {
        "normal": outcome.normal,
        "steps": outcome.steps,
        "program": program_to_doc(outcome.program),
    }
    _emit(args, payload, str(outcome.program))
    return 0 if outcome.normal else 2


def cmd_lq_translate(args) -> int:
    p = load_program(args.file)
    d = translate_program(p, _gates(args))
    _emit(args, {"result": dist_records(d)}, pretty_dist(d))
    return 0


def cmd_lq_adequacy(args) -> int:
    p = load_program(args.file)
    try:
        report = adequacy_check(p, args.fuel, _gates(args))
    except AdequacyViolation as e:
        _emit(
            args,
            {
                "verdict": "fail",
                "step": e.step,
                "before": dist_records(e.before),
                "after": dist_records(e.after),
            },
            f"fail: {e}",
        )
        return 1
    payload = {
        "verdict": "pass",
        "steps": len(report.steps),
        "final": dist_records(report.final_translation),
        "typing": [s.typed for s in report.steps],
    }
    _emit(
        args,
        payload,
        f"pass: {len(report.steps)} steps, final "
        f"{pretty_dist(report.final_translation)}",
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
