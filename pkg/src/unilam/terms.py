"""Pure values, pure terms and raw term distributions.

The term language has four layers: pure values, pure terms, and (raw)
distributions of each.  A raw distribution is the literal syntax tree of a
weak linear combination; it is what may appear under a binder, where the
congruence on distributions does not reach.

Alpha-equivalence is baked into equality and hashing: every node carries a
nameless structural key (bound variables as binder-crossing indices, free
variables by name).  Surface names are kept only for printing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

from .scalars import check_finite

Key = tuple


class Term:
    """A pure term.  Equality and ordering are alpha-structural."""

    key: Key
    free_vars: frozenset[str]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Term) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __lt__(self, other: "Term") -> bool:
        return self.key < other.key

    def __le__(self, other: "Term") -> bool:
        return self.key <= other.key

    def __str__(self) -> str:
        from .pretty import pretty_term

        return pretty_term(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"


class Value(Term):
    """Pure values: the basis vectors of the term space."""


class Raw:
    """A raw term distribution: the syntax tree of a weak combination."""

    key: Key
    free_vars: frozenset[str]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Raw) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        from .pretty import pretty_raw

        return pretty_raw(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"


def _bind(key: Key, name: str, depth: int) -> Key:
    """Turn free occurrences of ``name`` into bound indices.

    ``depth`` counts the binders crossed between the new binder and the
    position being rewritten, i.e. the de Bruijn index at that position.
    """
    tag = key[0]
    if tag == "v":
        ref = key[1]
        if ref[0] == "f" and ref[1] == name:
            return ("v", ("b", depth))
        return key
    if tag == "l":
        return ("l", _bind(key[1], name, depth + 1))
    if tag == "t":  # let-pair: body sits under two binders
        return ("t", _bind(key[1], name, depth), _bind(key[2], name, depth + 2))
    if tag == "m":  # match: one binder per branch
        return (
            "m",
            _bind(key[1], name, depth),
            _bind(key[2], name, depth + 1),
            _bind(key[3], name, depth + 1),
        )
    if tag in ("u", "z"):
        return key
    if tag == "c":  # scale: coefficient stays put
        return ("c", key[1], key[2], _bind(key[3], name, depth))
    return (tag,) + tuple(_bind(k, name, depth) for k in key[1:])


def _set(obj: object, **kwargs: object) -> None:
    for k, v in kwargs.items():
        object.__setattr__(obj, k, v)


@dataclass(frozen=True, eq=False, repr=False)
class Var(Value):
    name: str
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(self, key=("v", ("f", self.name)), free_vars=frozenset((self.name,)))


@dataclass(frozen=True, eq=False, repr=False)
class Lam(Value):
    var: str
    body: Raw
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(
            self,
            key=("l", _bind(self.body.key, self.var, 0)),
            free_vars=self.body.free_vars - {self.var},
        )


@dataclass(frozen=True, eq=False, repr=False)
class Void(Value):
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(self, key=("u",), free_vars=frozenset())


@dataclass(frozen=True, eq=False, repr=False)
class Pair(Value):
    left: Value
    right: Value
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.left, Value) or not isinstance(self.right, Value):
            raise TypeError("pair components must be pure values")
        _set(
            self,
            key=("p", self.left.key, self.right.key),
            free_vars=self.left.free_vars | self.right.free_vars,
        )


@dataclass(frozen=True, eq=False, repr=False)
class Inl(Value):
    value: Value
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.value, Value):
            raise TypeError("inl payload must be a pure value")
        _set(self, key=("i", self.value.key), free_vars=self.value.free_vars)


@dataclass(frozen=True, eq=False, repr=False)
class Inr(Value):
    value: Value
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.value, Value):
            raise TypeError("inr payload must be a pure value")
        _set(self, key=("j", self.value.key), free_vars=self.value.free_vars)


@dataclass(frozen=True, eq=False, repr=False)
class App(Term):
    fun: Term
    arg: Term
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(
            self,
            key=("a", self.fun.key, self.arg.key),
            free_vars=self.fun.free_vars | self.arg.free_vars,
        )


@dataclass(frozen=True, eq=False, repr=False)
class Seq(Term):
    head: Term
    rest: Raw
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(
            self,
            key=("s", self.head.key, self.rest.key),
            free_vars=self.head.free_vars | self.rest.free_vars,
        )


@dataclass(frozen=True, eq=False, repr=False)
class LetPair(Term):
    left: str
    right: str
    subject: Term
    body: Raw
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if self.left == self.right:
            raise ValueError("let-pair binders must be distinct")
        body_key = _bind(_bind(self.body.key, self.right, 0), self.left, 1)
        _set(
            self,
            key=("t", self.subject.key, body_key),
            free_vars=self.subject.free_vars
            | (self.body.free_vars - {self.left, self.right}),
        )


@dataclass(frozen=True, eq=False, repr=False)
class Match(Term):
    subject: Term
    left_var: str
    left: Raw
    right_var: str
    right: Raw
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(
            self,
            key=(
                "m",
                self.subject.key,
                _bind(self.left.key, self.left_var, 0),
                _bind(self.right.key, self.right_var, 0),
            ),
            free_vars=self.subject.free_vars
            | (self.left.free_vars - {self.left_var})
            | (self.right.free_vars - {self.right_var}),
        )


@dataclass(frozen=True, eq=False, repr=False)
class Zero(Raw):
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(self, key=("z",), free_vars=frozenset())


@dataclass(frozen=True, eq=False, repr=False)
class Single(Raw):
    term: Term
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(self, key=("1", self.term.key), free_vars=self.term.free_vars)


@dataclass(frozen=True, eq=False, repr=False)
class Sum(Raw):
    left: Raw
    right: Raw
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _set(
            self,
            key=("+", self.left.key, self.right.key),
            free_vars=self.left.free_vars | self.right.free_vars,
        )


@dataclass(frozen=True, eq=False, repr=False)
class Scale(Raw):
    coeff: complex
    of: Raw
    key: Key = field(init=False, compare=False)
    free_vars: frozenset[str] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        c = check_finite(complex(self.coeff))
        _set(
            self,
            coeff=c,
            key=("c", c.real, c.imag, self.of.key),
            free_vars=self.of.free_vars,
        )


VOID = Void()
TT = Inl(VOID)
FF = Inr(VOID)

# Pair components must be pure values; a pair of arbitrary terms is sugar
# for an application of this combinator, which evaluates both components.
MKPAIR = Lam("mk1", Single(Lam("mk2", Single(Pair(Var("mk1"), Var("mk2"))))))


def pair_term(left: Term, right: Term) -> Term:
    """(e1, e2): a direct pair of values, else via the pairing combinator."""
    if isinstance(left, Value) and isinstance(right, Value):
        return Pair(left, right)
    return App(App(MKPAIR, left), right)


def as_mkpair(t: Term) -> tuple[Term, Term] | None:
    """Recognize MKPAIR e1 e2 and return its components."""
    if (
        isinstance(t, App)
        and isinstance(t.fun, App)
        and t.fun.fun == MKPAIR
    ):
        return t.fun.arg, t.arg
    return None


def if_term(cond: Term, then: Raw, els: Raw, left: str = "x1", right: str = "x2") -> Match:
    """if t then s1 else s2  :=  match t {x1 -> x1; s1 | x2 -> x2; s2}."""
    left = fresh_name(left, then.free_vars | els.free_vars)
    right = fresh_name(right, then.free_vars | els.free_vars)
    return Match(
        cond,
        left,
        Single(Seq(Var(left), then)),
        right,
        Single(Seq(Var(right), els)),
    )


def alpha_equal(a: Term, b: Term) -> bool:
    """Structural identity after binder normalization."""
    return a.key == b.key


def is_value(t: Term) -> bool:
    return isinstance(t, Value)


def fresh_name(base: str, avoid: frozenset[str] | set[str]) -> str:
    """A variable name not in ``avoid``, derived from ``base``."""
    if base not in avoid:
        return base
    stem = base.rstrip("0123456789")
    n = 1
    while f"{stem}{n}" in avoid:
        n += 1
    return f"{stem}{n}"


def raw_map(d: Raw, f: Callable[[Term], Term]) -> Raw:
    """Apply ``f`` to every pure term, keeping the tree shape."""
    if isinstance(d, Zero):
        return d
    if isinstance(d, Single):
        return Single(f(d.term))
    if isinstance(d, Sum):
        return Sum(raw_map(d.left, f), raw_map(d.right, f))
    if isinstance(d, Scale):
        return Scale(d.coeff, raw_map(d.of, f))
    raise TypeError(d)


def raw_bind(d: Raw, f: Callable[[Term], Raw]) -> Raw:
    """Replace every pure term by a raw distribution (linear extension)."""
    if isinstance(d, Zero):
        return d
    if isinstance(d, Single):
        return f(d.term)
    if isinstance(d, Sum):
        return Sum(raw_bind(d.left, f), raw_bind(d.right, f))
    if isinstance(d, Scale):
        return Scale(d.coeff, raw_bind(d.of, f))
    raise TypeError(d)


def raw_terms(d: Raw) -> Iterator[Term]:
    if isinstance(d, Single):
        yield d.term
    elif isinstance(d, Sum):
        yield from raw_terms(d.left)
        yield from raw_terms(d.right)
    elif isinstance(d, Scale):
        yield from raw_terms(d.of)


def substitute(d: Raw, x: str, w: Value) -> Raw:
    """Pure substitution d[x := w], capture avoiding, linear in d."""
    if x not in d.free_vars:
        return d
    return raw_map(d, lambda t: subst_term(t, x, w))


def subst_term(t: Term, x: str, w: Value) -> Term:
    """Pure substitution on a pure term."""
    if x not in t.free_vars:
        return t
    if isinstance(t, Var):
        return w if t.name == x else t
    if isinstance(t, Lam):
        var, body = _avoid_capture(t.var, t.body, x, w)
        return Lam(var, substitute(body, x, w))
    if isinstance(t, Pair):
        return Pair(subst_value(t.left, x, w), subst_value(t.right, x, w))
    if isinstance(t, Inl):
        return Inl(subst_value(t.value, x, w))
    if isinstance(t, Inr):
        return Inr(subst_value(t.value, x, w))
    if isinstance(t, App):
        return App(subst_term(t.fun, x, w), subst_term(t.arg, x, w))
    if isinstance(t, Seq):
        return Seq(subst_term(t.head, x, w), substitute(t.rest, x, w))
    if isinstance(t, LetPair):
        subject = subst_term(t.subject, x, w)
        lv, body = _avoid_capture(t.left, t.body, x, w, extra={t.right})
        rv, body = _avoid_capture(t.right, body, x, w, extra={lv})
        if x in (lv, rv):
            return LetPair(lv, rv, subject, body)
        return LetPair(lv, rv, subject, substitute(body, x, w))
    if isinstance(t, Match):
        subject = subst_term(t.subject, x, w)
        lv, lbody = _avoid_capture(t.left_var, t.left, x, w)
        rv, rbody = _avoid_capture(t.right_var, t.right, x, w)
        lbody = lbody if lv == x else substitute(lbody, x, w)
        rbody = rbody if rv == x else substitute(rbody, x, w)
        return Match(subject, lv, lbody, rv, rbody)
    raise TypeError(t)


def subst_value(v: Value, x: str, w: Value) -> Value:
    out = subst_term(v, x, w)
    assert isinstance(out, Value)
    return out


def _avoid_capture(
    var: str, body: Raw, x: str, w: Value, extra: set[str] | None = None
) -> tuple[str, Raw]:
    """Rename ``var`` in ``body`` if substituting w for x would capture."""
    if var == x:
        return var, body
    if var in w.free_vars and x in body.free_vars:
        avoid = body.free_vars | w.free_vars | {x} | (extra or set())
        new = fresh_name(var, avoid)
        body = substitute(body, var, Var(new))
        return new, body
    return var, body


def substitute_parallel(d: Raw, subs: dict[str, Value]) -> Raw:
    """Simultaneous substitution, via fresh intermediate names."""
    if not subs:
        return d
    avoid = set(d.free_vars)
    for v in subs.values():
        avoid |= v.free_vars
    avoid |= set(subs.keys())
    temps: list[tuple[str, str, Value]] = []
    for x, w in subs.items():
        tmp = fresh_name(f"{x}_tmp", avoid)
        avoid.add(tmp)
        temps.append((x, tmp, w))
    for x, tmp, _ in temps:
        d = substitute(d, x, Var(tmp))
    for _, tmp, w in temps:
        d = substitute(d, tmp, w)
    return d
