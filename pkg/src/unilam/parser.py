"""Surface syntax for terms, types and judgments.

Terms:   lam x. e | e1 e2 | () | (e1, e2) | inl e | inr e | tt | ff
         | e1 ; e2 | let (x, y) = e1 in e2
         | match e { inl x -> e1 | inr y -> e2 }
         | if e then e1 else e2 | e1 + e2 | c * e | zerovec
Scalars: decimals, i, sqrt(n), and + - * / inside parentheses.
Types:   U | B | !A | #A | A + B | A * B | A -> B | A => B
         | A (+) B | A (x) B.

Pairs whose components are not values parse to the pairing combinator;
sums, scalings and scrutinee positions distribute linearly without
normalizing, so distribution trees under binders are kept verbatim.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from . import terms as T
from . import unitypes as U
from .terms import Raw, Single, Sum, Scale, Zero, raw_bind, raw_map


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # ident | num | sym | eof
    text: str
    line: int
    col: int


_MULTI = ("_|_", "|-", "->", "=>", "-o", "(+)")
_SINGLE = "()+*/;:.,{}|<>=@!#-"

KEYWORDS = {
    "lam", "lamq", "let", "in", "match", "if", "then", "else",
    "inl", "inr", "tt", "ff", "church", "zerovec", "new", "sqrt",
    "pi1", "pi2", "ctl", "ctl1",
}
_STOP_IDENTS = {"in", "then", "else"}


def tokenize(src: str) -> list[Token]:
    out: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        matched = None
        for m in _MULTI:
            if src.startswith(m, i):
                matched = m
                break
        if matched:
            out.append(Token("sym", matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if c.isdigit():
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE" and j + 1 < n and (
                src[j + 1].isdigit() or src[j + 1] in "+-"
            ):
                j += 2
                while j < n and src[j].isdigit():
                    j += 1
            out.append(Token("num", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            out.append(Token("ident", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c in _SINGLE:
            out.append(Token("sym", c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    out.append(Token("eof", "", line, col))
    return out


class Parser:
    def __init__(self, src: str, names: dict[str, Raw] | None = None):
        self.tokens = tokenize(src)
        self.pos = 0
        self.names = names or {}

    # -- machinery ---------------------------------------------------------
    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("sym", "ident")

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}",
                             tok.line, tok.col)
        return self.next()

    def error(self, msg: str) -> ParseError:
        tok = self.peek()
        return ParseError(msg, tok.line, tok.col)

    def save(self) -> int:
        return self.pos

    def restore(self, mark: int) -> None:
        self.pos = mark

    def finish(self) -> None:
        if self.peek().kind != "eof":
            raise self.error(f"trailing input {self.peek().text!r}")

    # -- terms -------------------------------------------------------------
    def parse_term(self) -> Raw:
        left = self.parse_sum()
        if self.at(";"):
            self.next()
            rest = self.parse_term()
            return raw_bind(left, lambda t: Single(T.Seq(t, rest)))
        return left

    def parse_sum(self) -> Raw:
        acc = self.parse_scaled()
        while self.at("+") or self.at("-"):
            negate = self.next().text == "-"
            rhs = self.parse_scaled()
            if negate:
                rhs = Scale(-1.0, rhs)
            acc = Sum(acc, rhs)
        return acc

    def parse_scaled(self) -> Raw:
        mark = self.save()
        try:
            c = self.parse_scalar_chain()
            if self.at("*"):
                self.next()
                return Scale(c, self.parse_scaled())
        except ParseError:
            pass
        self.restore(mark)
        return self.parse_app()

    def _starts_atom(self) -> bool:
        tok = self.peek()
        if tok.kind == "ident":
            return tok.text not in _STOP_IDENTS
        return tok.text == "("

    def parse_app(self) -> Raw:
        fun = self.parse_prefix()
        while self._starts_atom():
            arg = self.parse_prefix()
            fun = _app_combine(fun, arg)
        return fun

    def parse_prefix(self) -> Raw:
        if self.at("inl") or self.at("inr"):
            which = self.next().text
            payload = self.parse_prefix()
            build = T.Inl if which == "inl" else T.Inr
            try:
                return raw_map(payload, lambda v: build(_as_value(v)))
            except TypeError:
                raise self.error(f"{which} expects a value") from None
        return self.parse_atom()

    def parse_atom(self) -> Raw:
        tok = self.peek()
        if tok.text == "(":
            self.next()
            if self.at(")"):
                self.next()
                return Single(T.VOID)
            first = self.parse_term()
            if self.at(","):
                self.next()
                second = self.parse_term()
                self.expect(")")
                return _pair_combine(first, second)
            self.expect(")")
            return first
        if tok.kind == "ident":
            word = tok.text
            if word == "tt":
                self.next()
                return Single(T.TT)
            if word == "ff":
                self.next()
                return Single(T.FF)
            if word == "zerovec":
                self.next()
                return Zero()
            if word == "church":
                self.next()
                num = self.next()
                if num.kind != "num" or "." in num.text:
                    raise self.error("church expects a natural number")
                return Single(church(int(num.text)))
            if word == "lam":
                self.next()
                var = self._ident()
                self.expect(".")
                body = self.parse_term()
                return Single(T.Lam(var, body))
            if word == "let":
                self.next()
                self.expect("(")
                x = self._ident()
                self.expect(",")
                y = self._ident()
                self.expect(")")
                self.expect("=")
                subject = self.parse_term()
                self.expect("in")
                body = self.parse_term()
                return raw_bind(
                    subject, lambda t: Single(T.LetPair(x, y, t, body))
                )
            if word == "match":
                self.next()
                subject = self.parse_term()
                self.expect("{")
                self.expect("inl")
                x1 = self._ident()
                self.expect("->")
                left = self.parse_term()
                self.expect("|")
                self.expect("inr")
                x2 = self._ident()
                self.expect("->")
                right = self.parse_term()
                self.expect("}")
                return raw_bind(
                    subject,
                    lambda t: Single(T.Match(t, x1, left, x2, right)),
                )
            if word == "if":
                self.next()
                cond = self.parse_term()
                self.expect("then")
                then = self.parse_term()
                self.expect("else")
                els = self.parse_term()
                return raw_bind(cond, lambda t: Single(T.if_term(t, then, els)))
            self.next()
            if word in self.names:
                return self.names[word]
            return Single(T.Var(word))
        raise self.error(f"unexpected {tok.text!r} in term")

    def _ident(self) -> str:
        tok = self.next()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise ParseError(f"expected a variable, found {tok.text!r}",
                             tok.line, tok.col)
        return tok.text

    # -- scalars -----------------------------------------------------------
    def parse_scalar_chain(self) -> complex:
        c = self.parse_scalar_unary()
        while self.at("/"):
            self.next()
            c = c / self.parse_scalar_unary()
        return c

    def parse_scalar_unary(self) -> complex:
        if self.at("-"):
            self.next()
            return -self.parse_scalar_unary()
        return self.parse_scalar_atom()

    def parse_scalar_atom(self) -> complex:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return complex(float(tok.text))
        if tok.text == "i":
            self.next()
            return 1j
        if tok.text == "sqrt":
            self.next()
            self.expect("(")
            inner = self.parse_scalar_expr()
            self.expect(")")
            return cmath.sqrt(inner)
        if tok.text == "(":
            self.next()
            inner = self.parse_scalar_expr()
            self.expect(")")
            return inner
        raise self.error(f"expected a scalar, found {tok.text!r}")

    def parse_scalar_expr(self) -> complex:
        c = self.parse_scalar_product()
        while self.at("+") or self.at("-"):
            if self.next().text == "+":
                c = c + self.parse_scalar_product()
            else:
                c = c - self.parse_scalar_product()
        return c

    def parse_scalar_product(self) -> complex:
        c = self.parse_scalar_unary()
        while self.at("*") or self.at("/"):
            if self.next().text == "*":
                c = c * self.parse_scalar_unary()
            else:
                c = c / self.parse_scalar_unary()
        return c

    # -- types -------------------------------------------------------------
    def parse_type(self) -> U.TypeExpr:
        left = self.parse_type_sum()
        if self.at("->"):
            self.next()
            return U.TPureArrow(left, self.parse_type())
        if self.at("=>"):
            self.next()
            return U.TUnitArrow(left, self.parse_type())
        return left

    def _at_op_paren(self, middle: str) -> bool:
        return (
            self.peek().text == "("
            and self.peek(1).text == middle
            and self.peek(2).text == ")"
        )

    def parse_type_sum(self) -> U.TypeExpr:
        acc = self.parse_type_prod()
        while True:
            if self.at("+"):
                self.next()
                acc = U.TSum(acc, self.parse_type_prod())
            elif self.at("(+)"):
                self.next()
                acc = U.osum(acc, self.parse_type_prod())
            else:
                return acc

    def parse_type_prod(self) -> U.TypeExpr:
        acc = self.parse_type_prefix()
        while True:
            if self.at("*"):
                self.next()
                acc = U.TProd(acc, self.parse_type_prefix())
            elif self._at_op_paren("x"):
                self.next()
                self.next()
                self.next()
                acc = U.otimes(acc, self.parse_type_prefix())
            else:
                return acc

    def parse_type_prefix(self) -> U.TypeExpr:
        if self.at("!") or self.at("flat"):
            self.next()
            return U.TFlat(self.parse_type_prefix())
        if self.at("#") or self.at("sharp"):
            self.next()
            return U.TSharp(self.parse_type_prefix())
        tok = self.peek()
        if tok.text == "U":
            self.next()
            return U.UNIT
        if tok.text == "B":
            self.next()
            return U.BOOL
        if tok.text == "(":
            self.next()
            inner = self.parse_type()
            self.expect(")")
            return inner
        raise self.error(f"expected a type, found {tok.text!r}")

    # -- judgments ---------------------------------------------------------
    def parse_context(self, stops: tuple[str, ...]) -> list[tuple[str, U.TypeExpr]]:
        out: list[tuple[str, U.TypeExpr]] = []
        if self.peek().text in stops:
            return out
        while True:
            x = self._ident()
            self.expect(":")
            out.append((x, self.parse_type()))
            if self.at(","):
                self.next()
                continue
            return out

    def parse_typing_judgment(self):
        from .judgments import Context, TypingJudgment

        ctx = Context(tuple(self.parse_context(("|-",))))
        self.expect("|-")
        term = self.parse_term()
        self.expect(":")
        ty = self.parse_type()
        return TypingJudgment(ctx, term, ty)

    def parse_orthogonality_judgment(self):
        from .judgments import Context, OrthogonalityJudgment

        shared = Context(tuple(self.parse_context(("|-",))))
        self.expect("|-")
        self.expect("<")
        left_ctx = Context(tuple(self.parse_context(("|",))))
        self.expect("|")
        left = self.parse_term()
        self.expect("_|_")
        right_ctx = Context(tuple(self.parse_context(("|",))))
        self.expect("|")
        right = self.parse_term()
        self.expect(">")
        self.expect(":")
        ty = self.parse_type()
        return OrthogonalityJudgment(shared, left_ctx, left, right_ctx, right, ty)


def _as_value(t: T.Term) -> T.Value:
    if not isinstance(t, T.Value):
        raise TypeError(t)
    return t


def _app_combine(fun: Raw, arg: Raw) -> Raw:
    return raw_bind(fun, lambda f: raw_bind(arg, lambda a: Single(T.App(f, a))))


def _pair_combine(left: Raw, right: Raw) -> Raw:
    def all_values(d: Raw) -> bool:
        return all(isinstance(t, T.Value) for t in T.raw_terms(d))

    if all_values(left) and all_values(right):
        return raw_bind(
            left,
            lambda l: raw_bind(
                right, lambda r: Single(T.Pair(_as_value(l), _as_value(r)))
            ),
        )
    return _app_combine(_app_combine(Single(T.MKPAIR), left), right)


def church(n: int) -> T.Term:
    """Church numeral lam f. lam x. f (f (... x))."""
    body: Raw = Single(T.Var("x"))
    for _ in range(n):
        body = raw_bind(body, lambda b: Single(T.App(T.Var("f"), b)))
    return T.Lam("f", Single(T.Lam("x", body)))


def parse_term(src: str, names: dict[str, Raw] | None = None) -> Raw:
    p = Parser(src, names)
    out = p.parse_term()
    p.finish()
    return out


def parse_type(src: str) -> U.TypeExpr:
    p = Parser(src)
    out = p.parse_type()
    p.finish()
    return out


def parse_typing_judgment(src: str, names: dict[str, Raw] | None = None):
    p = Parser(src, names)
    out = p.parse_typing_judgment()
    p.finish()
    return out


def parse_orthogonality_judgment(src: str, names: dict[str, Raw] | None = None):
    p = Parser(src, names)
    out = p.parse_orthogonality_judgment()
    p.finish()
    return out
