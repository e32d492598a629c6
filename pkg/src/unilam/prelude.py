"""Named terms available to the CLI and tests.

H computes the Hadamard operator, N Boolean negation, F the weighted
identity distribution whose merged body is the identity on Booleans.
ctl is the control-of-a-function combinator exactly as a quantum test on
the first pair component; it applies the function on the inl branch.
ctl1 is the variant with the branches swapped, firing on inr.
"""

from __future__ import annotations

from functools import lru_cache

from .terms import Raw
from . import parser


_SOURCES: dict[str, str] = {
    "H": "lam x. if x then 1/sqrt(2)*tt + 1/sqrt(2)*ff"
    " else 1/sqrt(2)*tt - 1/sqrt(2)*ff",
    "I": "lam x. x",
    "Ktt": "lam x. tt",
    "Kff": "lam x. ff",
    "N": "lam x. if x then ff else tt",
    "F": "3/5 * (lam x. 5/6 * x) + 4/5 * (lam x. 5/8 * x)",
    "plus": "1/sqrt(2)*tt + 1/sqrt(2)*ff",
    "minus": "1/sqrt(2)*tt - 1/sqrt(2)*ff",
    "ctl": "lam f. lam z. let (x, y) = z in"
    " match x { inl z1 -> (inl z1, f y) | inr z2 -> (inr z2, y) }",
    "ctl1": "lam f. lam z. let (x, y) = z in"
    " match x { inl z1 -> (inl z1, y) | inr z2 -> (inr z2, f y) }",
}


@lru_cache(maxsize=1)
def prelude() -> dict[str, Raw]:
    return {name: parser.parse_term(src) for name, src in _SOURCES.items()}


def prelude_term(name: str) -> Raw:
    return prelude()[name]
