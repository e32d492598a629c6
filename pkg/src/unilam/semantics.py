"""Inner product, the unit sphere, and type membership as a decision
procedure on the finite-data fragment.

Membership in sharp data types reduces to a span-and-norm check because the
basis values of a data type span exactly the space its vectors live in.
Arrow types with sharp data domains are decided by basis probing: images of
basis inputs must land in the codomain span with an identity Gram matrix,
which characterizes the norm-preserving maps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .distrib import Dist, OpenValueError, bilinear_substitute_raw, canonicalize
from .evaluate import DEFAULT_FUEL, normalize
from .scalars import approx, default_eps, phase_to_real
from .terms import Lam, Raw, Scale, Single, Sum, Term, Value, Zero, fresh_name
from .unitypes import (
    TFlat,
    TProd,
    TPureArrow,
    TSharp,
    TSum,
    TUnit,
    TUnitArrow,
    TypeExpr,
    UnsupportedType,
    basis_of_type,
    is_data_type,
    is_pure_type,
    normalize_type,
)

GRAM_TOL = 1e-7


class NotNormalError(Exception):
    """member_value expects an evaluated value distribution."""


class DomainError(Exception):
    """A summand lies outside the projection basis."""


class OutOfFuelError(Exception):
    """Evaluation did not reach a normal form within the step budget."""


class Tri(enum.Enum):
    YES = "yes"
    NO = "no"
    UNSUPPORTED = "unsupported"

    def __bool__(self) -> bool:
        return self is Tri.YES


def inner_product(v: Dist, w: Dist) -> complex:
    """<v, w>: conjugate-linear on the left, Kronecker delta on terms."""
    _require_closed_values(v)
    _require_closed_values(w)
    out = 0j
    i = j = 0
    vs, ws = v.summands, w.summands
    while i < len(vs) and j < len(ws):
        a, t1 = vs[i]
        b, t2 = ws[j]
        if t1 == t2:
            out += a.conjugate() * b
            i += 1
            j += 1
        elif t1.key < t2.key:
            i += 1
        else:
            j += 1
    return out


def norm(v: Dist) -> float:
    """Pseudo-l2 norm sqrt(<v, v>)."""
    _require_closed_values(v)
    return math.sqrt(sum(abs(c) ** 2 for c, _ in v.summands))


def on_sphere(v: Dist, eps: float | None = None) -> bool:
    return approx(norm(v), 1.0, eps)


def _require_closed_values(v: Dist) -> None:
    if not v.is_value_dist:
        raise OpenValueError(f"not a value distribution: {v}")
    if not v.is_closed:
        raise OpenValueError(f"not closed: {v}")


def boolean_projection(v: Dist, basis: tuple[Value, ...]) -> list[complex]:
    """Coefficient vector of v over a basis, zero where absent."""
    index = {t: i for i, t in enumerate(basis)}
    out: list[complex] = [0j] * len(basis)
    for c, t in v.summands:
        if t not in index:
            raise DomainError(f"summand outside the basis: {t}")
        out[index[t]] = c
    return out


def member_value(
    v: Dist, a: TypeExpr, fuel: int = DEFAULT_FUEL, eps: float | None = None
) -> Tri:
    """Does the normal value distribution v inhabit the type a?

    Exact on the finite-data fragment and on arrows with enumerable
    domains; unsupported elsewhere (never a silent yes).
    """
    if eps is None:
        eps = default_eps()
    if not v.is_value_dist or not v.is_closed:
        raise NotNormalError(f"not a closed value distribution: {v}")
    a = normalize_type(a)
    # every unitary type lives inside the unit sphere
    if not approx(norm(v), 1.0, eps):
        return Tri.NO

    if isinstance(a, TUnit):
        return _yes(len(v) == 1 and approx(v.summands[0][0], 1.0, eps)
                    and v.summands[0][1].key == ("u",))
    if isinstance(a, TFlat):
        if not is_data_type(a.of):
            return Tri.UNSUPPORTED
        basis = set(basis_of_type(a.of))
        return _yes(
            len(v) == 1
            and approx(v.summands[0][0], 1.0, eps)
            and v.summands[0][1] in basis
        )
    if isinstance(a, TSharp):
        if is_data_type(a.of):
            basis = set(basis_of_type(a.of))
            return _yes(all(t in basis for _, t in v.summands))
        return Tri.UNSUPPORTED
    if isinstance(a, TSum):
        terms = v.domain()
        if all(t.key[0] == "i" for t in terms):
            inner = Dist(tuple((c, t.value) for c, t in v.summands), merged=True)
            return member_value(inner, a.left, fuel, eps)
        if all(t.key[0] == "j" for t in terms):
            inner = Dist(tuple((c, t.value) for c, t in v.summands), merged=True)
            return member_value(inner, a.right, fuel, eps)
        return Tri.NO
    if isinstance(a, TProd):
        return _member_product(v, a, fuel, eps)
    if isinstance(a, (TPureArrow, TUnitArrow)):
        return _member_arrow(v, a, fuel, eps)
    raise TypeError(a)


def _yes(cond: bool) -> Tri:
    return Tri.YES if cond else Tri.NO


def _member_product(v: Dist, a: TProd, fuel: int, eps: float) -> Tri:
    """Product membership via rank-1 factorization of the pair matrix.

    The scalar split between the factors is free up to one phase; testing
    the two splits that make either factor's largest coefficient real
    positive covers every absorbable phase (any member of a data type
    either tolerates arbitrary phases or has a real positive leading
    coefficient).
    """
    from .distrib import lift_pair

    if not all(t.key[0] == "p" for t in v.domain()):
        return Tri.NO
    lefts = sorted({t.left for _, t in v.summands}, key=lambda t: t.key)
    rights = sorted({t.right for _, t in v.summands}, key=lambda t: t.key)
    index_l = {t: i for i, t in enumerate(lefts)}
    index_r = {t: i for i, t in enumerate(rights)}
    mat = [[0j] * len(rights) for _ in lefts]
    for c, t in v.summands:
        mat[index_l[t.left]][index_r[t.right]] = c
    peak = max((abs(x) for row in mat for x in row), default=0.0)
    if peak == 0.0:
        return Tri.NO
    r0, c0 = max(
        ((i, j) for i in range(len(lefts)) for j in range(len(rights))),
        key=lambda ij: abs(mat[ij[0]][ij[1]]),
    )
    pivot = mat[r0][c0]
    # rank-1 test on 2x2 minors against the pivot row/column; the norm
    # gate bounds peak by 1, so eps * peak is the right scale
    tol = eps * peak
    for i in range(len(lefts)):
        for j in range(len(rights)):
            if abs(mat[i][j] * pivot - mat[i][c0] * mat[r0][j]) > tol:
                return Tri.NO
    col = [mat[i][c0] for i in range(len(lefts))]
    row = [mat[r0][j] / pivot for j in range(len(rights))]
    col_norm = math.sqrt(sum(abs(x) ** 2 for x in col))
    row_norm = math.sqrt(sum(abs(x) ** 2 for x in row))
    if col_norm == 0.0 or row_norm == 0.0:
        return Tri.NO
    candidates = []
    u = phase_to_real(col[max(range(len(col)), key=lambda i: abs(col[i]))])
    candidates.append(u / col_norm)
    u = phase_to_real(row[max(range(len(row)), key=lambda j: abs(row[j]))])
    candidates.append(row_norm / u)
    verdicts: list[Tri] = []
    for lam in candidates:
        left = Dist(
            tuple((lam * x, t) for x, t in zip(col, lefts)), merged=True
        )
        right = Dist(
            tuple((x / lam, t) for x, t in zip(row, rights)), merged=True
        )
        if not lift_pair(left, right).approx_eq(v, max(tol, eps)):
            verdicts.append(Tri.NO)
            continue
        ml = member_value(left, a.left, fuel, eps)
        mr = member_value(right, a.right, fuel, eps)
        if ml is Tri.YES and mr is Tri.YES:
            return Tri.YES
        if Tri.UNSUPPORTED in (ml, mr):
            verdicts.append(Tri.UNSUPPORTED)
        else:
            verdicts.append(Tri.NO)
    return Tri.UNSUPPORTED if Tri.UNSUPPORTED in verdicts else Tri.NO


def _member_arrow(v: Dist, a: TPureArrow | TUnitArrow, fuel: int, eps: float) -> Tri:
    dom = normalize_type(a.dom)
    if isinstance(a, TPureArrow):
        if len(v) != 1 or not approx(v.summands[0][0], 1.0, eps):
            return Tri.NO
        fun = v.summands[0][1]
        if not isinstance(fun, Lam):
            return Tri.NO
        if is_pure_type(dom) and is_data_type(dom):
            return _probe_function(fun.var, fun.body, dom, a.cod, fuel, eps)
    else:
        if not all(isinstance(t, Lam) for t in v.domain()):
            return Tri.NO
        if is_pure_type(dom) and is_data_type(dom):
            var, body = merge_abstractions(v)
            return _probe_function(var, body, dom, a.cod, fuel, eps)
    if isinstance(dom, TSharp) and is_data_type(dom):
        cod = normalize_type(a.cod)
        if isinstance(cod, TSharp) and is_data_type(cod):
            try:
                kind = "pure" if isinstance(a, TPureArrow) else "unit"
                report = check_unitary_endo(v, dom, cod, kind, fuel, eps)
            except (UnsupportedType, OutOfFuelError):
                return Tri.UNSUPPORTED
            return _yes(report.verdict == "pass")
    return Tri.UNSUPPORTED


def _probe_function(
    var: str, body: Raw, dom: TypeExpr, cod: TypeExpr, fuel: int, eps: float
) -> Tri:
    """For a pure data domain the basis values are its whole semantics."""
    from .terms import substitute

    verdict = Tri.YES
    for b in basis_of_type(dom):
        image = realizes(canonicalize(substitute(body, var, b)), cod, fuel, eps)
        if image is Tri.NO:
            return Tri.NO
        if image is Tri.UNSUPPORTED:
            verdict = Tri.UNSUPPORTED
    return verdict


def merge_abstractions(v: Dist) -> tuple[str, Raw]:
    """Fold a distribution of abstractions into one body over a shared
    binder: sum_i a_i * (lam x. t_i)  ~>  (x, sum_i a_i * t_i)."""
    avoid: set[str] = set()
    for _, t in v.summands:
        avoid |= t.free_vars
        assert isinstance(t, Lam)
        avoid |= t.body.free_vars
    var = fresh_name("x", avoid)
    merged: Raw = Zero()
    first = True
    from .terms import Var, substitute

    for c, t in v.summands:
        assert isinstance(t, Lam)
        renamed = substitute(t.body, t.var, Var(var))
        piece: Raw = Scale(c, renamed)
        merged = piece if first else Sum(merged, piece)
        first = False
    return var, merged


def realizes(
    t: Dist, a: TypeExpr, fuel: int = DEFAULT_FUEL, eps: float | None = None
) -> Tri:
    """t realizes a iff t evaluates to a member of the semantics of a."""
    if not t.is_closed:
        raise OpenValueError(f"realizability is defined on closed terms: {t}")
    outcome = normalize(t, fuel)
    if not outcome.normal:
        return Tri.UNSUPPORTED
    if not outcome.dist.is_value_dist:
        return Tri.NO
    return member_value(outcome.dist, a, fuel, eps)


@dataclass
class UnitaryReport:
    """Result of probing a candidate unitary on a finite data basis."""

    verdict: str
    reason: str = ""
    basis_inputs: tuple[Value, ...] = ()
    images: tuple[Dist, ...] = ()
    gram: list[list[complex]] | None = None
    matrix: list[list[complex]] | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def check_unitary_endo(
    f: Dist,
    dom: TypeExpr,
    cod: TypeExpr,
    arrow: str = "pure",
    fuel: int = DEFAULT_FUEL,
    eps: float | None = None,
) -> UnitaryReport:
    """Decide membership in sharp D1 -> sharp D2 (or =>) by basis probing.

    A function on the span of a finite data basis preserves the norm of
    every unit vector exactly when the Gram matrix of its basis images is
    the identity; the recovered matrix columns are the image coefficients.
    """
    if eps is None:
        eps = default_eps()
    dom = normalize_type(dom)
    cod = normalize_type(cod)
    if not (isinstance(dom, TSharp) and is_data_type(dom)):
        raise UnsupportedType(f"domain must be a sharp data type: {dom}")
    if not (isinstance(cod, TSharp) and is_data_type(cod)):
        raise UnsupportedType(f"codomain must be a sharp data type: {cod}")
    basis_in = basis_of_type(dom)
    basis_out = basis_of_type(cod)
    if len(basis_in) != len(basis_out):
        raise UnsupportedType(
            f"dimension mismatch: {len(basis_in)} vs {len(basis_out)}"
        )
    outcome = normalize(f, fuel)
    if not outcome.normal:
        raise OutOfFuelError(f"no normal form within {fuel} steps")
    nf = outcome.dist

    if arrow == "pure":
        if len(nf) != 1 or not approx(nf.summands[0][0], 1.0, eps):
            return UnitaryReport("fail", "not a single abstraction", basis_in)
        fun = nf.summands[0][1]
        if not isinstance(fun, Lam):
            return UnitaryReport("fail", "not an abstraction", basis_in)
        var, body = fun.var, fun.body
    elif arrow == "unit":
        if not (nf.is_value_dist and all(isinstance(t, Lam) for t in nf.domain())):
            return UnitaryReport("fail", "not a distribution of abstractions", basis_in)
        if not approx(norm(nf), 1.0, eps):
            return UnitaryReport(
                "fail", f"not on the unit sphere: norm {norm(nf)!r}", basis_in
            )
        var, body = merge_abstractions(nf)
    else:
        raise ValueError(f"arrow must be 'pure' or 'unit': {arrow!r}")

    from .terms import substitute

    images: list[Dist] = []
    span = set(basis_out)
    in_span = True
    for b in basis_in:
        out = normalize(canonicalize(substitute(body, var, b)), fuel)
        if not out.normal:
            raise OutOfFuelError(f"image of {b} has no normal form within {fuel}")
        images.append(out.dist)
        if not out.dist.is_value_dist or not all(
            t in span for t in out.dist.domain()
        ):
            in_span = False
    report = UnitaryReport(
        "fail", basis_inputs=basis_in, images=tuple(images)
    )
    if not in_span:
        report.reason = "an image leaves the span of the codomain basis"
        return report
    n = len(basis_in)
    gram = [[inner_product(images[i], images[j]) for j in range(n)] for i in range(n)]
    report.gram = gram
    report.matrix = [
        [boolean_projection(images[j], basis_out)[i] for j in range(n)]
        for i in range(n)
    ]
    off = max(
        abs(gram[i][j] - (1.0 if i == j else 0.0))
        for i in range(n)
        for j in range(n)
    )
    if off <= GRAM_TOL:
        report.verdict = "pass"
    else:
        report.reason = f"gram deviates from identity by {off:g}"
    return report
