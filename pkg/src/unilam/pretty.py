"""Rendering of terms, distributions, types and reports.

The textual forms round-trip through the parser; pairs built with the
pairing combinator print back as pair syntax.
"""

from __future__ import annotations

from typing import Any

from . import terms as T
from .distrib import Dist
from .scalars import format_scalar, is_one
from . import unitypes as U


def pretty_term(t: T.Term, prec: int = 0) -> str:
    """Precedence: 0 top, 1 seq head, 2 application, 3 atom."""
    mk = T.as_mkpair(t)
    if mk is not None:
        return f"({pretty_term(mk[0])}, {pretty_term(mk[1])})"
    if isinstance(t, T.Var):
        return t.name
    if isinstance(t, T.Void):
        return "()"
    if t == T.TT:
        return "tt"
    if t == T.FF:
        return "ff"
    if isinstance(t, T.Inl):
        return _wrap(f"inl {pretty_term(t.value, 3)}", prec >= 3)
    if isinstance(t, T.Inr):
        return _wrap(f"inr {pretty_term(t.value, 3)}", prec >= 3)
    if isinstance(t, T.Pair):
        return f"({pretty_term(t.left)}, {pretty_term(t.right)})"
    if isinstance(t, T.Lam):
        return _wrap(f"lam {t.var}. {pretty_raw(t.body)}", prec >= 1)
    if isinstance(t, T.App):
        return _wrap(
            f"{pretty_term(t.fun, 2)} {pretty_term(t.arg, 3)}", prec >= 3
        )
    if isinstance(t, T.Seq):
        return _wrap(f"{pretty_term(t.head, 2)} ; {pretty_raw(t.rest)}", prec >= 1)
    if isinstance(t, T.LetPair):
        return _wrap(
            f"let ({t.left}, {t.right}) = {pretty_term(t.subject, 1)}"
            f" in {pretty_raw(t.body)}",
            prec >= 1,
        )
    if isinstance(t, T.Match):
        return (
            f"match {pretty_term(t.subject, 1)} {{ inl {t.left_var} -> "
            f"{pretty_raw(t.left)} | inr {t.right_var} -> {pretty_raw(t.right)} }}"
        )
    raise TypeError(t)


def _wrap(s: str, yes: bool) -> str:
    return f"({s})" if yes else s


def pretty_raw(d: T.Raw, prec: int = 0) -> str:
    if isinstance(d, T.Zero):
        return "zerovec"
    if isinstance(d, T.Single):
        return pretty_term(d.term, prec)
    if isinstance(d, T.Sum):
        s = f"{pretty_raw(d.left, 0)} + {pretty_raw(d.right, 0)}"
        return _wrap(s, prec >= 1)
    if isinstance(d, T.Scale):
        inner = pretty_raw(d.of, 2)
        return _wrap(f"{format_scalar(d.coeff)} * {inner}", prec > 2)
    raise TypeError(d)


def pretty_dist(c: Dist) -> str:
    if c.is_zero_vector:
        return "zerovec"
    parts = []
    for coeff, t in c.summands:
        body = pretty_term(t, 2)
        if coeff == 1.0:
            parts.append(body)
        else:
            parts.append(f"{format_scalar(coeff)} * {body}")
    return " + ".join(parts)


def dist_records(c: Dist) -> list[dict[str, Any]]:
    """Structured output: one {re, im, term} record per summand."""
    return [
        {"re": coeff.real, "im": coeff.imag, "term": pretty_term(t)}
        for coeff, t in c.summands
    ]


def pretty_type(a: U.TypeExpr, prec: int = 0) -> str:
    """Precedence: 0 arrows, 1 sums, 2 products, 3 prefixes/atoms."""
    if isinstance(a, U.TUnit):
        return "U"
    if a == U.BOOL:
        return "B"
    if isinstance(a, U.TFlat):
        return f"!{pretty_type(a.of, 3)}"
    if isinstance(a, U.TSharp):
        return f"#{pretty_type(a.of, 3)}"
    if isinstance(a, U.TSum):
        return _wrap(
            f"{pretty_type(a.left, 2)} + {pretty_type(a.right, 1)}", prec >= 2
        )
    if isinstance(a, U.TProd):
        return _wrap(
            f"{pretty_type(a.left, 3)} * {pretty_type(a.right, 2)}", prec >= 3
        )
    if isinstance(a, U.TPureArrow):
        return _wrap(
            f"{pretty_type(a.dom, 1)} -> {pretty_type(a.cod, 0)}", prec >= 1
        )
    if isinstance(a, U.TUnitArrow):
        return _wrap(
            f"{pretty_type(a.dom, 1)} => {pretty_type(a.cod, 0)}", prec >= 1
        )
    raise TypeError(a)


def complex_record(c: complex) -> dict[str, float]:
    return {"re": c.real, "im": c.imag}


def matrix_records(m: list[list[complex]] | None) -> list[list[dict]] | None:
    if m is None:
        return None
    return [[complex_record(x) for x in row] for row in m]


def derivation_record(d) -> dict[str, Any]:
    """Nested rule-name record of a derivation, for audit output."""
    from .judgments import Derivation, OrthogonalityJudgment

    if isinstance(d, OrthogonalityJudgment):
        return {"rule": "Orthogonality", "judgment": str(d)}
    assert isinstance(d, Derivation)
    return {
        "rule": d.rule,
        "judgment": str(d.judgment),
        "premises": [derivation_record(p) for p in d.premises],
    }
