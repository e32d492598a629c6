"""Unitary type expressions, subtyping, purity and finite data bases.

Types: U | flat A | sharp A | A + B | A * B | A -> B | A => B, with the
sugar B = U + U, A (+) B = sharp(A + B), A (x) B = sharp(A * B).  Sugar is
expanded at construction; judgments only ever see the core grammar.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .terms import Inl, Inr, Pair, Term, Value, Void


class UnsupportedType(Exception):
    """The operation is only defined on the finite-data fragment."""


class TypeExpr:
    def __str__(self) -> str:
        from .pretty import pretty_type

        return pretty_type(self)

    def __repr__(self) -> str:
        return f"<Type {self}>"


@dataclass(frozen=True)
class TUnit(TypeExpr):
    pass


@dataclass(frozen=True)
class TFlat(TypeExpr):
    of: TypeExpr


@dataclass(frozen=True)
class TSharp(TypeExpr):
    of: TypeExpr


@dataclass(frozen=True)
class TSum(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class TProd(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class TPureArrow(TypeExpr):
    dom: TypeExpr
    cod: TypeExpr


@dataclass(frozen=True)
class TUnitArrow(TypeExpr):
    dom: TypeExpr
    cod: TypeExpr


UNIT = TUnit()
BOOL = TSum(UNIT, UNIT)
SHARP_BOOL = TSharp(BOOL)


def osum(a: TypeExpr, b: TypeExpr) -> TypeExpr:
    """Direct sum sugar: A (+) B = sharp(A + B)."""
    return TSharp(TSum(a, b))


def otimes(a: TypeExpr, b: TypeExpr) -> TypeExpr:
    """Tensor sugar: A (x) B = sharp(A * B)."""
    return TSharp(TProd(a, b))


@lru_cache(maxsize=None)
def normalize_type(a: TypeExpr) -> TypeExpr:
    """Rewrite to a normal form under the type equivalences.

    flat is pushed through sums and products, erased on U, pure arrows and
    under itself or sharp; nested sharps collapse.  After normalization,
    flat survives only on unitary arrows.
    """
    if isinstance(a, TUnit):
        return a
    if isinstance(a, TSum):
        return TSum(normalize_type(a.left), normalize_type(a.right))
    if isinstance(a, TProd):
        return TProd(normalize_type(a.left), normalize_type(a.right))
    if isinstance(a, TPureArrow):
        return TPureArrow(normalize_type(a.dom), normalize_type(a.cod))
    if isinstance(a, TUnitArrow):
        return TUnitArrow(normalize_type(a.dom), normalize_type(a.cod))
    if isinstance(a, TSharp):
        inner = normalize_type(a.of)
        if isinstance(inner, TSharp):
            return inner
        return TSharp(inner)
    if isinstance(a, TFlat):
        inner = normalize_type(a.of)
        if isinstance(inner, TSharp):
            return normalize_type(TFlat(inner.of))
        if isinstance(inner, TFlat):
            return inner
        if isinstance(inner, TUnit):
            return inner
        if isinstance(inner, TSum):
            return TSum(
                normalize_type(TFlat(inner.left)), normalize_type(TFlat(inner.right))
            )
        if isinstance(inner, TProd):
            return TProd(
                normalize_type(TFlat(inner.left)), normalize_type(TFlat(inner.right))
            )
        if isinstance(inner, TPureArrow):
            return inner
        return TFlat(inner)
    raise TypeError(a)


def is_pure_type(a: TypeExpr) -> bool:
    """Types whose semantics holds pure values only.

    sharp types and unitary arrows count as never pure; emptiness of a
    semantics is not decided here.
    """
    a = normalize_type(a)
    if isinstance(a, (TUnit, TFlat, TPureArrow)):
        return True
    if isinstance(a, (TSum, TProd)):
        return is_pure_type(a.left) and is_pure_type(a.right)
    return False


def is_data_type(a: TypeExpr) -> bool:
    """Arrow-free types: built from U, +, *, flat, sharp only."""
    if isinstance(a, TUnit):
        return True
    if isinstance(a, (TFlat, TSharp)):
        return is_data_type(a.of)
    if isinstance(a, (TSum, TProd)):
        return is_data_type(a.left) and is_data_type(a.right)
    return False


@lru_cache(maxsize=None)
def _subtype_norm(a: TypeExpr, b: TypeExpr) -> bool:
    if a == b:
        return True
    # sharp on the left: A' <= sharp Y  implies  sharp A' <= sharp Y.
    if isinstance(a, TSharp) and isinstance(b, TSharp):
        if _subtype_norm(a.of, b):
            return True
    if isinstance(b, TSharp):
        # A <= Y <= sharp Y.
        if _subtype_norm(a, b.of):
            return True
        # A <= sharp flat A, monotonically in the flattened type.
        if isinstance(b.of, TFlat) and _subtype_norm(a, b.of.of):
            return True
        # sharp distributes out of sums and products:
        # sharp A1 + sharp A2 <= sharp(A1 + A2), likewise for *.
        if isinstance(b.of, TSum) and isinstance(a, TSum):
            if _subtype_norm(
                a.left, normalize_type(TSharp(b.of.left))
            ) and _subtype_norm(a.right, normalize_type(TSharp(b.of.right))):
                return True
        if isinstance(b.of, TProd) and isinstance(a, TProd):
            if _subtype_norm(
                a.left, normalize_type(TSharp(b.of.left))
            ) and _subtype_norm(a.right, normalize_type(TSharp(b.of.right))):
                return True
    if isinstance(a, TSum) and isinstance(b, TSum):
        return _subtype_norm(a.left, b.left) and _subtype_norm(a.right, b.right)
    if isinstance(a, TProd) and isinstance(b, TProd):
        return _subtype_norm(a.left, b.left) and _subtype_norm(a.right, b.right)
    if isinstance(a, TFlat) and isinstance(b, TFlat):
        return _subtype_norm(a.of, b.of)
    # Arrows are invariant in both positions; the only cross-shape axiom
    # is A -> B <= A => B.
    if isinstance(a, TPureArrow) and isinstance(b, (TPureArrow, TUnitArrow)):
        return _equiv_norm(a.dom, b.dom) and _equiv_norm(a.cod, b.cod)
    if isinstance(a, TUnitArrow) and isinstance(b, TUnitArrow):
        return _equiv_norm(a.dom, b.dom) and _equiv_norm(a.cod, b.cod)
    return False


def _equiv_norm(a: TypeExpr, b: TypeExpr) -> bool:
    return _subtype_norm(a, b) and _subtype_norm(b, a)


def subtype(a: TypeExpr, b: TypeExpr) -> bool:
    """Reflexive-transitive closure of the subtyping axioms."""
    return _subtype_norm(normalize_type(a), normalize_type(b))


def type_equiv(a: TypeExpr, b: TypeExpr) -> bool:
    return subtype(a, b) and subtype(b, a)


@lru_cache(maxsize=None)
def basis_of_type(a: TypeExpr) -> tuple[Value, ...]:
    """Ordered basis of a finite data type.

    basis(U) = (void); sums tag both sides; products pair left-major;
    flat and sharp are transparent (flat sharp A = flat A).
    """
    a = normalize_type(a)
    if isinstance(a, TUnit):
        return (Void(),)
    if isinstance(a, (TFlat, TSharp)):
        return basis_of_type(a.of)
    if isinstance(a, TSum):
        return tuple(Inl(v) for v in basis_of_type(a.left)) + tuple(
            Inr(v) for v in basis_of_type(a.right)
        )
    if isinstance(a, TProd):
        return tuple(
            Pair(l, r)
            for l in basis_of_type(a.left)
            for r in basis_of_type(a.right)
        )
    raise UnsupportedType(f"no finite basis for {a}")


def strip_sharp(a: TypeExpr) -> TypeExpr:
    a = normalize_type(a)
    return a.of if isinstance(a, TSharp) else a
