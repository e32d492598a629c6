"""Seeded random generators shared by the test modules."""

from __future__ import annotations

import cmath
import math
import random

from unilam import terms as T
from unilam.distrib import Dist, canonicalize, single
from unilam.terms import Raw, Scale, Single, Sum, Zero
from unilam import unitypes as U


def rand_coeff(rng: random.Random) -> complex:
    return complex(rng.uniform(-2, 2), rng.uniform(-2, 2))


def rand_value(rng: random.Random, depth: int = 2, vars_: tuple[str, ...] = ()) -> T.Value:
    opts = ["void", "tt", "ff"]
    if depth > 0:
        opts += ["pair", "inl", "inr", "lam"]
    if vars_:
        opts += ["var", "var"]
    kind = rng.choice(opts)
    if kind == "void":
        return T.VOID
    if kind == "tt":
        return T.TT
    if kind == "ff":
        return T.FF
    if kind == "var":
        return T.Var(rng.choice(vars_))
    if kind == "pair":
        return T.Pair(
            rand_value(rng, depth - 1, vars_), rand_value(rng, depth - 1, vars_)
        )
    if kind == "inl":
        return T.Inl(rand_value(rng, depth - 1, vars_))
    if kind == "inr":
        return T.Inr(rand_value(rng, depth - 1, vars_))
    x = f"v{rng.randrange(3)}"
    return T.Lam(x, rand_raw(rng, depth - 1, vars_ + (x,)))


def rand_term(rng: random.Random, depth: int = 2, vars_: tuple[str, ...] = ()) -> T.Term:
    """Closed-ish pure terms that almost always terminate."""
    if depth <= 0 or rng.random() < 0.4:
        return rand_value(rng, max(depth, 1), vars_)
    kind = rng.choice(["app", "seq", "letpair", "match"])
    if kind == "app":
        x = f"a{rng.randrange(3)}"
        fun = T.Lam(x, rand_raw(rng, depth - 1, vars_ + (x,)))
        return T.App(fun, rand_value(rng, depth - 1, vars_))
    if kind == "seq":
        return T.Seq(T.VOID, rand_raw(rng, depth - 1, vars_))
    if kind == "letpair":
        scrut = T.Pair(
            rand_value(rng, depth - 1, vars_), rand_value(rng, depth - 1, vars_)
        )
        return T.LetPair(
            "p", "q", scrut, rand_raw(rng, depth - 1, vars_ + ("p", "q"))
        )
    payload = rand_value(rng, depth - 1, vars_)
    scrut = T.Inl(payload) if rng.random() < 0.5 else T.Inr(payload)
    return T.Match(
        scrut,
        "m1",
        rand_raw(rng, depth - 1, vars_ + ("m1",)),
        "m2",
        rand_raw(rng, depth - 1, vars_ + ("m2",)),
    )


def rand_raw(rng: random.Random, depth: int = 2, vars_: tuple[str, ...] = ()) -> Raw:
    n = rng.randrange(1, 4)
    out: Raw | None = None
    for _ in range(n):
        piece: Raw = Single(rand_term(rng, depth, vars_))
        if rng.random() < 0.7:
            piece = Scale(rand_coeff(rng), piece)
        out = piece if out is None else Sum(out, piece)
    if rng.random() < 0.1:
        out = Sum(out, Zero())
    return out


def rand_dist(rng: random.Random, depth: int = 2) -> Dist:
    return canonicalize(rand_raw(rng, depth))


def rand_value_dist(rng: random.Random, depth: int = 2) -> Dist:
    n = rng.randrange(1, 4)
    return Dist([(rand_coeff(rng), rand_value(rng, depth)) for _ in range(n)])


def rand_data_type(rng: random.Random, depth: int = 2) -> U.TypeExpr:
    if depth <= 0:
        return rng.choice([U.UNIT, U.BOOL])
    kind = rng.choice(["unit", "bool", "sum", "prod", "sharp", "flat"])
    if kind == "unit":
        return U.UNIT
    if kind == "bool":
        return U.BOOL
    if kind == "sum":
        return U.TSum(rand_data_type(rng, depth - 1), rand_data_type(rng, depth - 1))
    if kind == "prod":
        return U.TProd(rand_data_type(rng, depth - 1), rand_data_type(rng, depth - 1))
    if kind == "sharp":
        return U.TSharp(rand_data_type(rng, depth - 1))
    return U.TFlat(rand_data_type(rng, depth - 1))


def rand_member(rng: random.Random, a: U.TypeExpr) -> Dist:
    """A random element of the unitary semantics of a data type."""
    a = U.normalize_type(a)
    if isinstance(a, U.TUnit):
        return single(T.VOID)
    if isinstance(a, U.TFlat):
        return single(rng.choice(U.basis_of_type(a.of)))
    if isinstance(a, U.TSharp):
        basis = U.basis_of_type(a.of)
        k = rng.randrange(1, len(basis) + 1)
        picks = rng.sample(list(basis), k)
        coeffs = [rand_coeff(rng) for _ in picks]
        nrm = math.sqrt(sum(abs(c) ** 2 for c in coeffs))
        return Dist([(c / nrm, b) for c, b in zip(coeffs, picks)])
    if isinstance(a, U.TSum):
        if rng.random() < 0.5:
            inner = rand_member(rng, a.left)
            return Dist([(c, T.Inl(t)) for c, t in inner.summands])
        inner = rand_member(rng, a.right)
        return Dist([(c, T.Inr(t)) for c, t in inner.summands])
    if isinstance(a, U.TProd):
        from unilam.distrib import lift_pair

        return lift_pair(rand_member(rng, a.left), rand_member(rng, a.right))
    raise U.UnsupportedType(str(a))


def rand_unit_bool(rng: random.Random) -> Dist:
    """A random member of the quantum Boolean sphere."""
    theta = rng.uniform(0, math.pi / 2)
    phi = rng.uniform(0, 2 * math.pi)
    chi = rng.uniform(0, 2 * math.pi)
    return Dist(
        [
            (cmath.exp(1j * phi) * math.cos(theta), T.TT),
            (cmath.exp(1j * chi) * math.sin(theta), T.FF),
        ]
    )


def rand_unitary2(rng: random.Random) -> list[list[complex]]:
    theta = rng.uniform(0, 2 * math.pi)
    phi = rng.uniform(0, 2 * math.pi)
    psi = rng.uniform(0, 2 * math.pi)
    delta = rng.uniform(0, 2 * math.pi)
    g = cmath.exp(1j * delta)
    return [
        [g * math.cos(theta), -g * cmath.exp(1j * phi) * math.sin(theta)],
        [
            g * cmath.exp(1j * psi) * math.sin(theta),
            g * cmath.exp(1j * (phi + psi)) * math.cos(theta),
        ],
    ]
