"""Call-by-basis evaluation: atomic steps, one-step reduction, normal forms.

Atomic evaluation is deterministic and rewrites a pure term into a raw
distribution.  The argument of an application is always evaluated before
the function; nothing reduces under a binder, in a sequence tail, in a
let-pair body or in a match branch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .distrib import Dist, canonicalize
from .terms import (
    App,
    Inl,
    Inr,
    Lam,
    LetPair,
    Match,
    Pair,
    Raw,
    Seq,
    Single,
    Term,
    Value,
    Void,
    is_value,
    raw_map,
    substitute,
    substitute_parallel,
)

DEFAULT_FUEL = 10_000


class DecompositionError(Exception):
    """The requested alpha*s + r decomposition does not exist."""


@dataclass(frozen=True)
class StepBudget:
    max_steps: int = DEFAULT_FUEL


@dataclass(frozen=True)
class EvalOutcome:
    """Either a normal form or the state at fuel exhaustion."""

    dist: Dist
    normal: bool
    steps: int

    @property
    def out_of_fuel(self) -> bool:
        return not self.normal


def atomic_step(t: Term) -> Raw | None:
    """The unique t' with t > t', or None when t is atomic-normal.

    Stuck destructors (e.g. match on an abstraction, application of a
    non-abstraction value) are normal, as are open blocked terms.
    """
    if isinstance(t, Value):
        return None
    if isinstance(t, App):
        fun, arg = t.fun, t.arg
        if not is_value(arg):
            stepped = atomic_step(arg)
            if stepped is None:
                return None
            return raw_map(stepped, lambda u: App(fun, u))
        if not is_value(fun):
            stepped = atomic_step(fun)
            if stepped is None:
                return None
            return raw_map(stepped, lambda u: App(u, arg))
        if isinstance(fun, Lam):
            assert isinstance(arg, Value)
            return substitute(fun.body, fun.var, arg)
        return None
    if isinstance(t, Seq):
        head = t.head
        if isinstance(head, Void):
            return t.rest
        if not is_value(head):
            stepped = atomic_step(head)
            if stepped is None:
                return None
            rest = t.rest
            return raw_map(stepped, lambda u: Seq(u, rest))
        return None
    if isinstance(t, LetPair):
        subject = t.subject
        if isinstance(subject, Pair):
            return substitute_parallel(
                t.body, {t.left: subject.left, t.right: subject.right}
            )
        if not is_value(subject):
            stepped = atomic_step(subject)
            if stepped is None:
                return None
            return raw_map(
                stepped, lambda u: LetPair(t.left, t.right, u, t.body)
            )
        return None
    if isinstance(t, Match):
        subject = t.subject
        if isinstance(subject, Inl):
            return substitute(t.left, t.left_var, subject.value)
        if isinstance(subject, Inr):
            return substitute(t.right, t.right_var, subject.value)
        if not is_value(subject):
            stepped = atomic_step(subject)
            if stepped is None:
                return None
            return raw_map(
                stepped,
                lambda u: Match(u, t.left_var, t.left, t.right_var, t.right),
            )
        return None
    raise TypeError(t)


def is_reducible(t: Term) -> bool:
    return atomic_step(t) is not None


def is_normal(d: Dist) -> bool:
    """Every summand term is atomic-irreducible (zero coefficients too)."""
    return all(atomic_step(t) is None for _, t in d.summands)


def one_step(d: Dist, choose=None) -> Dist | None:
    """Reduce one reducible summand; None when d is normal.

    The default scheduler picks the least reducible summand in canonical
    order.  ``choose`` may select among the reducible indices instead; any
    choice is an admissible instance of one-step evaluation, and by
    confluence the reachable normal form does not depend on it.
    """
    reducible = [i for i, (_, t) in enumerate(d.summands) if is_reducible(t)]
    if not reducible:
        return None
    i = reducible[0] if choose is None else choose(reducible)
    coeff, term = d.summands[i]
    stepped = atomic_step(term)
    assert stepped is not None
    rest = Dist(
        tuple(p for j, p in enumerate(d.summands) if j != i), merged=True
    )
    return rest.add(canonicalize(stepped).scale(coeff))


def step_with_decomposition(d: Dist, s: Term, alpha: complex) -> Dist:
    """Step d = alpha*s + r by reducing s, exposing the full relation.

    Splitting coefficients this way reaches reducts the canonical scheduler
    never produces, e.g. stepping a summand held at coefficient 0.
    """
    stepped = atomic_step(s)
    if stepped is None:
        raise DecompositionError(f"term is not reducible: {s}")
    current = d.coeff_of(s)
    if current is None:
        raise DecompositionError(f"term is not in the domain of {d}: {s}")
    remainder = Dist(
        tuple(
            (c - alpha if t == s else c, t) for c, t in d.summands
        ),
        merged=True,
    )
    return remainder.add(canonicalize(stepped).scale(alpha))


def normalize(
    d: Dist, fuel: StepBudget | int = DEFAULT_FUEL, choose=None
) -> EvalOutcome:
    """Iterate one-step evaluation until a normal form or fuel runs out."""
    limit = fuel.max_steps if isinstance(fuel, StepBudget) else fuel
    steps = 0
    while steps < limit:
        nxt = one_step(d, choose)
        if nxt is None:
            return EvalOutcome(d, normal=True, steps=steps)
        d = nxt
        steps += 1
    if one_step(d, choose) is None:
        return EvalOutcome(d, normal=True, steps=steps)
    return EvalOutcome(d, normal=False, steps=steps)


def normalize_random(d: Dist, fuel: int = DEFAULT_FUEL, seed: int = 0) -> EvalOutcome:
    """Normalize under a randomized scheduler (for confluence tests)."""
    rng = random.Random(seed)
    return normalize(d, fuel, choose=lambda idx: rng.choice(idx))


def trace(d: Dist, fuel: int = DEFAULT_FUEL) -> list[Dist]:
    """Canonical snapshots of every one-step reduction, d included."""
    out = [d]
    steps = 0
    while steps < fuel:
        nxt = one_step(d)
        if nxt is None:
            break
        out.append(nxt)
        d = nxt
        steps += 1
    return out
