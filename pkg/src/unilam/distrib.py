"""Canonical distributions and the linear extension of term constructors.

A canonical distribution is the normal form of a raw distribution under the
congruence: an ordered list of scalar-weighted, pairwise distinct pure
terms.  Summands with coefficient 0 are kept; the space is a weak vector
space and 0*t is not the zero vector.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator

from .scalars import approx, check_finite
from .terms import (
    Inl,
    Inr,
    LetPair,
    Match,
    Pair,
    Raw,
    Scale,
    Seq,
    Single,
    Sum,
    Term,
    Value,
    Var,
    Zero,
    App,
    is_value,
    raw_terms,
    substitute,
)


class ShapeError(Exception):
    """A value-only position received a non-value distribution."""


class OpenValueError(Exception):
    """An operation requiring closed value distributions got an open one."""


class Dist:
    """A canonical distribution: ordered (coefficient, term) summands.

    Merging is by alpha-equality of terms with exact coefficient addition;
    the summand order is the fixed structural order on pure terms.
    """

    __slots__ = ("summands", "_key")

    def __init__(self, summands: Iterable[tuple[complex, Term]], merged: bool = False):
        if merged:
            self.summands: tuple[tuple[complex, Term], ...] = tuple(summands)
        else:
            acc: dict[Term, complex] = {}
            for coeff, term in summands:
                c = check_finite(complex(coeff))
                if term in acc:
                    acc[term] = acc[term] + c
                else:
                    acc[term] = c
            self.summands = tuple(
                (acc[t], t) for t in sorted(acc.keys(), key=lambda t: t.key)
            )
        self._key = tuple((c, t.key) for c, t in self.summands)

    def __iter__(self) -> Iterator[tuple[complex, Term]]:
        return iter(self.summands)

    def __len__(self) -> int:
        return len(self.summands)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Dist) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __str__(self) -> str:
        from .pretty import pretty_dist

        return pretty_dist(self)

    def __repr__(self) -> str:
        return f"<Dist {self}>"

    def approx_eq(self, other: "Dist", eps: float | None = None) -> bool:
        """Same domain, same order, coefficients within eps."""
        if len(self) != len(other):
            return False
        for (c1, t1), (c2, t2) in zip(self.summands, other.summands):
            if t1 != t2 or not approx(c1, c2, eps):
                return False
        return True

    @property
    def is_zero_vector(self) -> bool:
        return not self.summands

    @property
    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for _, t in self.summands:
            out |= t.free_vars
        return out

    @property
    def is_closed(self) -> bool:
        return not self.free_vars

    @property
    def is_value_dist(self) -> bool:
        return all(is_value(t) for _, t in self.summands)

    def domain(self) -> tuple[Term, ...]:
        """All summand terms, zero-coefficient ones included."""
        return tuple(t for _, t in self.summands)

    def weight(self) -> complex:
        return sum((c for c, _ in self.summands), 0j)

    def coeff_of(self, term: Term) -> complex | None:
        for c, t in self.summands:
            if t == term:
                return c
        return None

    def add(self, other: "Dist") -> "Dist":
        return Dist(list(self.summands) + list(other.summands))

    def scale(self, c: complex) -> "Dist":
        c = check_finite(complex(c))
        return Dist(((c * a, t) for a, t in self.summands), merged=True)

    def drop_zeros(self, eps: float | None = None) -> "Dist":
        """Debugging aid only: forget zero-coefficient summands.

        Never used by the engine; dropping summands changes the vector.
        """
        return Dist(
            tuple((c, t) for c, t in self.summands if not approx(c, 0.0, eps)),
            merged=True,
        )

    def to_raw(self) -> Raw:
        out: Raw = Zero()
        first = True
        for c, t in self.summands:
            piece: Raw = Scale(c, Single(t))
            out = piece if first else Sum(out, piece)
            first = False
        return out

    def map_terms(self, f: Callable[[Term], Term]) -> "Dist":
        return Dist((c, f(t)) for c, t in self.summands)


ZERO_DIST = Dist(())


def single(t: Term) -> Dist:
    return Dist(((1.0 + 0j, t),))


def canonicalize(d: Raw) -> Dist:
    """Normal form of a raw distribution under the congruence rules."""
    acc: list[tuple[complex, Term]] = []

    def walk(node: Raw, coeff: complex) -> None:
        if isinstance(node, Zero):
            return
        if isinstance(node, Single):
            acc.append((coeff, node.term))
        elif isinstance(node, Sum):
            walk(node.left, coeff)
            walk(node.right, coeff)
        elif isinstance(node, Scale):
            walk(node.of, coeff * node.coeff)
        else:
            raise TypeError(node)

    walk(d, 1.0 + 0j)
    return Dist(acc)


def domain(d: Dist) -> tuple[Term, ...]:
    return d.domain()


def weight(d: Dist) -> complex:
    return d.weight()


def _require_values(d: Dist, what: str) -> None:
    if not d.is_value_dist:
        raise ShapeError(f"{what} requires a value distribution, got {d}")


def lift_pair(v: Dist, w: Dist) -> Dist:
    """<v, w> distributes bilinearly over both components."""
    _require_values(v, "pair")
    _require_values(w, "pair")
    return Dist(
        (a * b, Pair(t1, t2)) for a, t1 in v.summands for b, t2 in w.summands
    )


def lift_inl(v: Dist) -> Dist:
    _require_values(v, "inl")
    return Dist((a, Inl(t)) for a, t in v.summands)


def lift_inr(v: Dist) -> Dist:
    _require_values(v, "inr")
    return Dist((a, Inr(t)) for a, t in v.summands)


def lift_app(s: Dist, t: Dist) -> Dist:
    """Application distributes bilinearly over function and argument."""
    return Dist(
        (a * b, App(t1, t2)) for a, t1 in s.summands for b, t2 in t.summands
    )


def lift_seq(t: Dist, rest: Raw) -> Dist:
    """Sequencing distributes over the head only; the tail stays raw."""
    return Dist((a, Seq(u, rest)) for a, u in t.summands)


def lift_letpair(x: str, y: str, t: Dist, body: Raw) -> Dist:
    return Dist((a, LetPair(x, y, u, body)) for a, u in t.summands)


def lift_match(t: Dist, x1: str, left: Raw, x2: str, right: Raw) -> Dist:
    return Dist((a, Match(u, x1, left, x2, right)) for a, u in t.summands)


def lift_constructor(kind: str, *args) -> Dist:
    """Dispatch table for the linear extension of term constructors."""
    table = {
        "pair": lift_pair,
        "inl": lift_inl,
        "inr": lift_inr,
        "app": lift_app,
        "seq": lift_seq,
        "letpair": lift_letpair,
        "match": lift_match,
    }
    return table[kind](*args)


def pure_substitute_dist(d: Dist, x: str, w: Value) -> Dist:
    """d[x := w] summand by summand (pure substitution is linear)."""
    from .terms import subst_term

    return Dist((c, subst_term(t, x, w)) for c, t in d.summands)


def bilinear_substitute(d: Dist, x: str, v: Dist) -> Dist:
    """d<x := v> = sum_j beta_j * d[x := w_j].

    Bilinear in both arguments; when x is not free, equals weight(v) * d.
    """
    if not v.is_value_dist:
        raise ShapeError(f"bilinear substitution requires values, got {v}")
    if not v.is_closed:
        raise OpenValueError(f"bilinear substitution requires a closed vector: {v}")
    out: list[tuple[complex, Term]] = []
    from .terms import subst_term

    for b, w in v.summands:
        assert isinstance(w, Value)
        for a, t in d.summands:
            out.append((a * b, subst_term(t, x, w)))
    return Dist(out)


def bilinear_substitute_raw(d: Raw, x: str, v: Dist) -> Dist:
    return bilinear_substitute(canonicalize(d), x, v)
