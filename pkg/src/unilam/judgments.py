"""Typing contexts, derivations, orthogonality judgments and the checker.

A derivation is a tree of rule instances; check_derivation validates each
node against its rule schema.  Orthogonality judgments are semantic: they
are discharged by probing basis substitutions (exact on the finite-data
fragment, by linearity of evaluation and sesquilinearity of the inner
product) or by a sound structural criterion on constructor skeletons.

infer is an algorithmic, syntax-directed reading of the rules: non-pure
variables are routed to the unique premise using them, pure variables are
shared or dropped through implicit contraction and weakening, and each
destructor tries its pure rule before its sharp rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .distrib import (
    Dist,
    ZERO_DIST,
    bilinear_substitute,
    canonicalize,
    lift_app,
    lift_inl,
    lift_inr,
    lift_pair,
    single,
)
from .evaluate import DEFAULT_FUEL, normalize
from .scalars import SQRT2_INV, approx, default_eps
from .semantics import Tri, inner_product, realizes
from .terms import (
    App,
    Inl,
    Inr,
    Lam,
    LetPair,
    Match,
    MKPAIR,
    Pair,
    Raw,
    Seq,
    Single,
    Term,
    Value,
    Var,
    Void,
    Zero,
    as_mkpair,
    fresh_name,
    subst_term,
    substitute,
)
from .unitypes import (
    BOOL,
    TFlat,
    TProd,
    TPureArrow,
    TSharp,
    TSum,
    TUnit,
    TUnitArrow,
    TypeExpr,
    UNIT,
    basis_of_type,
    is_data_type,
    is_pure_type,
    normalize_type,
    subtype,
    type_equiv,
)


class NoDerivation(Exception):
    """infer found no derivation; the message names the failing subgoal."""


@dataclass(frozen=True)
class Context:
    bindings: tuple[tuple[str, TypeExpr], ...] = ()

    def __post_init__(self) -> None:
        names = [x for x, _ in self.bindings]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate context variable in {names}")

    def __str__(self) -> str:
        from .pretty import pretty_type

        return ", ".join(f"{x}:{pretty_type(a)}" for x, a in self.bindings)

    @property
    def names(self) -> frozenset[str]:
        return frozenset(x for x, _ in self.bindings)

    def lookup(self, x: str) -> TypeExpr | None:
        for y, a in self.bindings:
            if y == x:
                return a
        return None

    def extend(self, x: str, a: TypeExpr) -> "Context":
        return Context(self.bindings + ((x, a),))

    def remove(self, x: str) -> "Context":
        return Context(tuple(b for b in self.bindings if b[0] != x))

    def restrict(self, keep: frozenset[str]) -> "Context":
        return Context(tuple(b for b in self.bindings if b[0] in keep))

    def as_dict(self) -> dict[str, TypeExpr]:
        return dict(self.bindings)

    def union(self, other: "Context") -> "Context":
        return Context(self.bindings + other.bindings)

    def same_mapping(self, other: "Context") -> bool:
        return self.as_dict() == other.as_dict()


def strict_domain(ctx: Context) -> frozenset[str]:
    """Variables of non-pure type; these must occur free in the term."""
    return frozenset(x for x, a in ctx.bindings if not is_pure_type(a))


@dataclass(frozen=True)
class TypingJudgment:
    ctx: Context
    term: Raw
    ty: TypeExpr

    def __str__(self) -> str:
        return f"{self.ctx} |- {self.term} : {self.ty}"

    def side_condition(self) -> bool:
        fv = self.term.free_vars
        return strict_domain(self.ctx) <= fv <= self.ctx.names


@dataclass(frozen=True)
class OrthogonalityJudgment:
    shared: Context
    left_ctx: Context
    left: Raw
    right_ctx: Context
    right: Raw
    ty: TypeExpr

    def __str__(self) -> str:
        return (
            f"{self.shared} |- <{self.left_ctx} | {self.left} "
            f"_|_ {self.right_ctx} | {self.right}> : {self.ty}"
        )

    def swapped(self) -> "OrthogonalityJudgment":
        return OrthogonalityJudgment(
            self.shared, self.right_ctx, self.right, self.left_ctx, self.left, self.ty
        )


@dataclass(frozen=True)
class Derivation:
    rule: str
    judgment: TypingJudgment
    premises: tuple["Derivation | OrthogonalityJudgment", ...] = ()
    info: tuple = ()

    def __str__(self) -> str:
        return f"[{self.rule}] {self.judgment}"

    def walk(self):
        yield self
        for p in self.premises:
            if isinstance(p, Derivation):
                yield from p.walk()


# ---------------------------------------------------------------------------
# semantic probing


def probes_for_type(a: TypeExpr) -> list[Dist] | None:
    """Substitution probes covering a context type exactly.

    Pure data types are their basis.  For sharp data types, the basis plus
    the pairwise superpositions (b_i + b_j)/sqrt2 and (b_i + i b_j)/sqrt2
    determine every quadratic form in the substituted coefficients, which
    is what the validity and orthogonality conditions are.
    """
    a = normalize_type(a)
    if not is_data_type(a):
        return None
    basis = basis_of_type(a)
    probes = [single(b) for b in basis]
    if is_pure_type(a):
        return probes
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            bi, bj = single(basis[i]), single(basis[j])
            probes.append(bi.scale(SQRT2_INV).add(bj.scale(SQRT2_INV)))
            probes.append(bi.scale(SQRT2_INV).add(bj.scale(SQRT2_INV * 1j)))
    return probes


def _context_probes(ctx: Context) -> list[list[tuple[str, Dist]]] | None:
    per_var: list[list[tuple[str, Dist]]] = []
    for x, a in ctx.bindings:
        probes = probes_for_type(a)
        if probes is None:
            return None
        per_var.append([(x, p) for p in probes])
    return [list(combo) for combo in itertools.product(*per_var)]


def _apply_subst(term: Raw, combo: list[tuple[str, Dist]]) -> Dist:
    d = canonicalize(term)
    for x, v in combo:
        d = bilinear_substitute(d, x, v)
    return d


def validate_semantically(
    j: TypingJudgment, fuel: int = DEFAULT_FUEL, eps: float | None = None
) -> Tri:
    """Decide validity of a typing judgment by probing basis substitutions.

    Exact for contexts of data and sharp-data types; unsupported beyond
    that fragment (never a silent yes).
    """
    if not j.side_condition():
        return Tri.NO
    combos = _context_probes(j.ctx)
    if combos is None:
        return Tri.UNSUPPORTED
    verdict = Tri.YES
    for combo in combos:
        out = realizes(_apply_subst(j.term, combo), j.ty, fuel, eps)
        if out is Tri.NO:
            return Tri.NO
        if out is Tri.UNSUPPORTED:
            verdict = Tri.UNSUPPORTED
    return verdict


def _component_valid(j: TypingJudgment, fuel: int) -> Tri:
    """Component typing of an orthogonality judgment: semantic check
    first, syntactic derivation (sound by validity of the rules) as a
    fallback outside the probe fragment."""
    out = validate_semantically(j, fuel)
    if out is not Tri.UNSUPPORTED:
        return out
    try:
        infer(j.ctx, j.term, j.ty, fuel)
        return Tri.YES
    except NoDerivation:
        return Tri.UNSUPPORTED


def _structurally_orthogonal(t1: Raw, t2: Raw) -> bool:
    """Sound criterion: every pair of summands has disjoint constructor
    skeletons at some shared position, under every substitution.

    Components reached through the pairing combinator keep their head
    constructor through substitution and evaluation, so inl against inr
    at a common coordinate forces a zero inner product.
    """

    def views(t: Term) -> tuple[str, tuple]:
        mk = as_mkpair(t)
        if mk is not None:
            return ("pair", mk)
        if isinstance(t, Pair):
            return ("pair", (t.left, t.right))
        if isinstance(t, Inl):
            return ("inl", (t.value,))
        if isinstance(t, Inr):
            return ("inr", (t.value,))
        return ("?", ())

    def orth(a: Term, b: Term) -> bool:
        ka, va = views(a)
        kb, vb = views(b)
        if {ka, kb} == {"inl", "inr"}:
            return True
        if ka == kb == "pair":
            return orth(va[0], vb[0]) or orth(va[1], vb[1])
        if ka == kb and ka in ("inl", "inr"):
            return orth(va[0], vb[0])
        return False

    c1, c2 = canonicalize(t1), canonicalize(t2)
    return all(orth(u1, u2) for u1 in c1.domain() for u2 in c2.domain())


def check_orthogonality(
    j: OrthogonalityJudgment, fuel: int = DEFAULT_FUEL, eps: float | None = None
) -> Tri:
    """Validity of an orthogonality judgment.

    Both component typings must hold and all cross inner products of
    normal forms must vanish, over every substitution of the contexts.
    """
    if eps is None:
        eps = default_eps()
    left_j = TypingJudgment(j.shared.union(j.left_ctx), j.left, j.ty)
    right_j = TypingJudgment(j.shared.union(j.right_ctx), j.right, j.ty)
    c1 = _component_valid(left_j, fuel)
    c2 = _component_valid(right_j, fuel)
    if Tri.NO in (c1, c2):
        return Tri.NO
    if Tri.UNSUPPORTED in (c1, c2):
        return Tri.UNSUPPORTED

    shared = _context_probes(j.shared)
    lefts = _context_probes(j.left_ctx)
    rights = _context_probes(j.right_ctx)
    if None in (shared, lefts, rights):
        if _structurally_orthogonal(j.left, j.right):
            return Tri.YES
        return Tri.UNSUPPORTED
    verdict = Tri.YES
    for sigma in shared:
        for s1 in lefts:
            v1 = normalize(_apply_subst(j.left, sigma + s1), fuel)
            if not v1.normal:
                verdict = Tri.UNSUPPORTED
                continue
            if not v1.dist.is_value_dist:
                continue
            for s2 in rights:
                v2 = normalize(_apply_subst(j.right, sigma + s2), fuel)
                if not v2.normal:
                    verdict = Tri.UNSUPPORTED
                    continue
                if not v2.dist.is_value_dist:
                    continue
                if not approx(inner_product(v1.dist, v2.dist), 0.0, eps):
                    return Tri.NO
    return verdict


# ---------------------------------------------------------------------------
# derivation checking


def _is_singleton(term: Raw) -> Term | None:
    c = canonicalize(term)
    if len(c) == 1 and approx(c.summands[0][0], 1.0):
        return c.summands[0][1]
    return None


def _pure_context(ctx: Context) -> bool:
    return all(type_equiv(TFlat(a), a) for _, a in ctx.bindings)


def check_derivation(
    d: Derivation, fuel: int = DEFAULT_FUEL
) -> tuple[bool, list[str]]:
    """Validate every node of a derivation against its rule schema.

    Context splits must be disjoint, premise shapes must instantiate the
    rule exactly, and the free-variable side condition holds at every
    conclusion.  UnitaryMatch premises are discharged semantically.
    """
    problems: list[str] = []
    for node in d.walk():
        _check_node(node, fuel, problems)
    return (not problems, problems)


def _fail(problems: list[str], node: Derivation, msg: str) -> None:
    problems.append(f"{node.rule} at [{node.judgment}]: {msg}")


def _types_eq(a: TypeExpr, b: TypeExpr) -> bool:
    return normalize_type(a) == normalize_type(b)


def _check_node(node: Derivation, fuel: int, problems: list[str]) -> None:
    j = node.judgment
    if not j.side_condition():
        _fail(problems, node, "free variables violate dom#(G) <= FV <= dom(G)")
        return
    rule = node.rule
    ctx, term, ty = j.ctx, j.term, normalize_type(j.ty)
    derivs = [p for p in node.premises if isinstance(p, Derivation)]
    orths = [p for p in node.premises if isinstance(p, OrthogonalityJudgment)]

    def ctx_split_is(*parts: Context) -> bool:
        merged: dict[str, TypeExpr] = {}
        total = 0
        for p in parts:
            merged.update(p.as_dict())
            total += len(p.bindings)
        return total == len(merged) and merged == ctx.as_dict()

    if rule == "Axiom":
        t = _is_singleton(term)
        if not (isinstance(t, Var) and len(ctx.bindings) == 1
                and ctx.bindings[0][0] == t.name
                and _types_eq(ctx.bindings[0][1], ty) and not node.premises):
            _fail(problems, node, "not an instance of Axiom")
    elif rule == "Void":
        t = _is_singleton(term)
        if not (isinstance(t, Void) and not ctx.bindings
                and _types_eq(ty, UNIT) and not node.premises):
            _fail(problems, node, "not an instance of Void")
    elif rule == "Sub":
        if len(derivs) != 1 or orths:
            _fail(problems, node, "Sub takes one premise")
            return
        p = derivs[0].judgment
        if not (p.ctx.same_mapping(ctx) and p.term == term):
            _fail(problems, node, "Sub premise must share context and term")
        if not subtype(p.ty, ty):
            _fail(problems, node, f"{p.ty} is not a subtype of {ty}")
    elif rule in ("PureLam", "UnitLam"):
        t = _is_singleton(term)
        if not isinstance(t, Lam) or len(derivs) != 1:
            _fail(problems, node, "conclusion must be a single abstraction")
            return
        want = TPureArrow if rule == "PureLam" else TUnitArrow
        if not isinstance(ty, want):
            _fail(problems, node, f"goal must be a {want.__name__}")
            return
        p = derivs[0].judgment
        expected = ctx.extend(t.var, ty.dom)
        if not (p.ctx.same_mapping(expected) and p.term == t.body
                and _types_eq(p.ty, ty.cod)):
            _fail(problems, node, "premise does not match the abstraction body")
        if rule == "PureLam" and not _pure_context(ctx):
            _fail(problems, node, "PureLam requires flat G == G")
    elif rule == "App":
        if len(derivs) != 2:
            _fail(problems, node, "App takes two premises")
            return
        pf, pa = derivs[0].judgment, derivs[1].judgment
        tf = normalize_type(pf.ty)
        if not isinstance(tf, TUnitArrow):
            _fail(problems, node, "function premise must have type A => B")
            return
        if not (_types_eq(pa.ty, tf.dom) and _types_eq(ty, tf.cod)):
            _fail(problems, node, "argument or result type mismatch")
        if not ctx_split_is(pf.ctx, pa.ctx):
            _fail(problems, node, "context is not a disjoint split")
        lifted = lift_app(canonicalize(pf.term), canonicalize(pa.term))
        if not lifted.approx_eq(canonicalize(term)):
            _fail(problems, node, "conclusion is not the applied premises")
    elif rule == "Pair":
        if len(derivs) != 2 or not isinstance(ty, TProd):
            _fail(problems, node, "Pair concludes a product from two premises")
            return
        pl, pr = derivs[0].judgment, derivs[1].judgment
        if not (_types_eq(pl.ty, ty.left) and _types_eq(pr.ty, ty.right)):
            _fail(problems, node, "component types do not match")
        if not ctx_split_is(pl.ctx, pr.ctx):
            _fail(problems, node, "context is not a disjoint split")
        lifted = lift_pair(canonicalize(pl.term), canonicalize(pr.term))
        if not lifted.approx_eq(canonicalize(term)):
            _fail(problems, node, "conclusion is not the paired premises")
    elif rule in ("InL", "InR"):
        if len(derivs) != 1 or not isinstance(ty, TSum):
            _fail(problems, node, f"{rule} concludes a sum from one premise")
            return
        p = derivs[0].judgment
        side = ty.left if rule == "InL" else ty.right
        lift = lift_inl if rule == "InL" else lift_inr
        if not _types_eq(p.ty, side):
            _fail(problems, node, "payload type does not match the sum side")
        if not p.ctx.same_mapping(ctx):
            _fail(problems, node, "context must match the premise")
        if not lift(canonicalize(p.term)).approx_eq(canonicalize(term)):
            _fail(problems, node, "conclusion is not the injected premise")
    elif rule in ("Seq", "SeqSharp"):
        t = _is_singleton(term)
        if not isinstance(t, Seq) or len(derivs) != 2:
            _fail(problems, node, "conclusion must be a single sequencing")
            return
        ph, pr = derivs[0].judgment, derivs[1].judgment
        head_ty = UNIT if rule == "Seq" else TSharp(UNIT)
        if not _types_eq(ph.ty, head_ty):
            _fail(problems, node, f"head premise must have type {head_ty}")
        if rule == "SeqSharp" and not isinstance(ty, TSharp):
            _fail(problems, node, "SeqSharp concludes a sharp type")
        if not (_types_eq(pr.ty, ty) and pr.term == t.rest
                and ph.term == Single(t.head)):
            _fail(problems, node, "premises do not match head and tail")
        if not ctx_split_is(ph.ctx, pr.ctx):
            _fail(problems, node, "context is not a disjoint split")
    elif rule in ("LetPair", "LetTens"):
        t = _is_singleton(term)
        if not isinstance(t, LetPair) or len(derivs) != 2:
            _fail(problems, node, "conclusion must be a single let-pair")
            return
        ps, pb = derivs[0].judgment, derivs[1].judgment
        st = normalize_type(ps.ty)
        if rule == "LetPair":
            if not isinstance(st, TProd):
                _fail(problems, node, "scrutinee premise must be a product")
                return
            bound = (st.left, st.right)
        else:
            if not (isinstance(st, TSharp) and isinstance(st.of, TProd)):
                _fail(problems, node, "scrutinee premise must be a tensor")
                return
            if not isinstance(ty, TSharp):
                _fail(problems, node, "LetTens concludes a sharp type")
            bound = (
                normalize_type(TSharp(st.of.left)),
                normalize_type(TSharp(st.of.right)),
            )
        if ps.term != Single(t.subject):
            _fail(problems, node, "scrutinee premise term mismatch")
        expected = pb.ctx.as_dict()
        delta = {
            k: v for k, v in expected.items() if k not in (t.left, t.right)
        }
        if not (
            expected.get(t.left) is not None
            and _types_eq(expected[t.left], bound[0])
            and expected.get(t.right) is not None
            and _types_eq(expected[t.right], bound[1])
            and pb.term == t.body
            and _types_eq(pb.ty, ty)
        ):
            _fail(problems, node, "body premise does not match the binding")
        if not ctx_split_is(ps.ctx, Context(tuple(delta.items()))):
            _fail(problems, node, "context is not a disjoint split")
    elif rule == "PureMatch":
        t = _is_singleton(term)
        if not isinstance(t, Match) or len(derivs) != 3:
            _fail(problems, node, "conclusion must be a single match")
            return
        ps, p1, p2 = (p.judgment for p in derivs)
        st = normalize_type(ps.ty)
        if not isinstance(st, TSum):
            _fail(problems, node, "scrutinee premise must be a sum")
            return
        if ps.term != Single(t.subject):
            _fail(problems, node, "scrutinee premise term mismatch")
        d1, d2 = p1.ctx.as_dict(), p2.ctx.as_dict()
        delta1 = {k: v for k, v in d1.items() if k != t.left_var}
        delta2 = {k: v for k, v in d2.items() if k != t.right_var}
        ok = (
            t.left_var in d1
            and _types_eq(d1[t.left_var], st.left)
            and t.right_var in d2
            and _types_eq(d2[t.right_var], st.right)
            and delta1 == delta2
            and p1.term == t.left
            and p2.term == t.right
            and _types_eq(p1.ty, ty)
            and _types_eq(p2.ty, ty)
        )
        if not ok:
            _fail(problems, node, "branch premises do not match")
        elif not ctx_split_is(ps.ctx, Context(tuple(delta1.items()))):
            _fail(problems, node, "context is not a disjoint split")
    elif rule == "UnitaryMatch":
        t = _is_singleton(term)
        if not isinstance(t, Match) or len(derivs) != 1 or len(orths) != 1:
            _fail(problems, node, "UnitaryMatch takes a scrutinee and an "
                                  "orthogonality premise")
            return
        ps = derivs[0].judgment
        st = normalize_type(ps.ty)
        if not (isinstance(st, TSharp) and isinstance(st.of, TSum)):
            _fail(problems, node, "scrutinee premise must be a direct sum")
            return
        if not isinstance(ty, TSharp):
            _fail(problems, node, "UnitaryMatch concludes a sharp type")
        if ps.term != Single(t.subject):
            _fail(problems, node, "scrutinee premise term mismatch")
        o = orths[0]
        a1 = normalize_type(TSharp(st.of.left))
        a2 = normalize_type(TSharp(st.of.right))
        ok = (
            len(o.left_ctx.bindings) == 1
            and o.left_ctx.bindings[0][0] == t.left_var
            and _types_eq(o.left_ctx.bindings[0][1], a1)
            and len(o.right_ctx.bindings) == 1
            and o.right_ctx.bindings[0][0] == t.right_var
            and _types_eq(o.right_ctx.bindings[0][1], a2)
            and o.left == t.left
            and o.right == t.right
            and _types_eq(o.ty, ty)
        )
        if not ok:
            _fail(problems, node, "orthogonality premise does not match")
            return
        if not ctx_split_is(ps.ctx, o.shared):
            _fail(problems, node, "context is not a disjoint split")
        if check_orthogonality(o, fuel) is not Tri.YES:
            _fail(problems, node, "orthogonality premise not established")
    elif rule == "Weak":
        if len(derivs) != 1:
            _fail(problems, node, "Weak takes one premise")
            return
        p = derivs[0].judgment
        extra = set(ctx.names) - set(p.ctx.names)
        if len(extra) != 1:
            _fail(problems, node, "Weak adds exactly one variable")
            return
        x = extra.pop()
        a = ctx.lookup(x)
        if not type_equiv(TFlat(a), a):
            _fail(problems, node, f"weakened type {a} is not pure")
        if not (p.term == term and _types_eq(p.ty, ty)
                and p.ctx.same_mapping(ctx.remove(x))):
            _fail(problems, node, "Weak premise mismatch")
    elif rule == "Contr":
        if len(derivs) != 1 or len(node.info) != 2:
            _fail(problems, node, "Contr takes one premise and (x, y) info")
            return
        x, y = node.info
        p = derivs[0].judgment
        a = ctx.lookup(x)
        if a is None or not type_equiv(TFlat(a), a):
            _fail(problems, node, f"contracted type {a} is not pure")
            return
        py = p.ctx.lookup(y)
        if py is None or not _types_eq(py, a):
            _fail(problems, node, "premise must bind the doubled variable")
            return
        if not p.ctx.remove(y).same_mapping(ctx):
            _fail(problems, node, "contexts differ beyond the doubled variable")
        if not (substitute(p.term, y, Var(x)) == term and _types_eq(p.ty, ty)):
            _fail(problems, node, "conclusion is not the renamed premise")
    else:
        _fail(problems, node, f"unknown rule {rule!r}")


# ---------------------------------------------------------------------------
# algorithmic derivation search


def infer(
    ctx: Context, term: Raw, goal: TypeExpr, fuel: int = DEFAULT_FUEL
) -> Derivation:
    """Build a checkable derivation of ctx |- term : goal, or raise.

    Syntax-directed: non-pure variables must reach the unique premise that
    uses them; pure variables are weakened away or contracted as needed;
    destructors try their pure rule before their sharp rule; subsumption
    is applied at leaves and at the root.
    """
    ctx = Context(tuple((x, normalize_type(a)) for x, a in ctx.bindings))
    return _check(ctx, term, normalize_type(goal), fuel)


def _no(j_ctx: Context, term: Raw, goal: TypeExpr, msg: str) -> NoDerivation:
    return NoDerivation(f"{j_ctx} |- {term} : {goal}: {msg}")


def _check(ctx: Context, term: Raw, goal: TypeExpr, fuel: int) -> Derivation:
    fv = term.free_vars
    if not fv <= ctx.names:
        raise _no(ctx, term, goal, f"unbound variables {sorted(fv - ctx.names)}")
    unused = [
        (x, a) for x, a in ctx.bindings if x not in fv
    ]
    for x, a in unused:
        if not is_pure_type(a):
            raise _no(ctx, term, goal, f"non-pure variable {x} is unused")
    if unused:
        inner = _check(ctx.restrict(fv), term, goal, fuel)
        deriv = inner
        acc = inner.judgment.ctx
        for x, a in unused:
            acc = acc.extend(x, a)
            deriv = Derivation("Weak", TypingJudgment(acc, term, goal), (deriv,))
        return deriv
    t = _is_singleton(term)
    if t is None:
        raise _no(ctx, term, goal, "no syntactic rule types this distribution")
    return _check_term(ctx, t, goal, fuel)


def _sub_wrap(d: Derivation, goal: TypeExpr) -> Derivation:
    if _types_eq(d.judgment.ty, goal):
        return d
    if subtype(d.judgment.ty, goal):
        return Derivation(
            "Sub", TypingJudgment(d.judgment.ctx, d.judgment.term, goal), (d,)
        )
    raise _no(d.judgment.ctx, d.judgment.term, goal,
              f"{d.judgment.ty} is not a subtype of {goal}")


def _sharp_refinements(goal: TypeExpr) -> list[TypeExpr]:
    """Subtypes of a sharp goal that expose a constructor typing."""
    if not isinstance(goal, TSharp):
        return []
    out = [normalize_type(goal.of)]
    inner = normalize_type(goal.of)
    if isinstance(inner, TSum):
        out.append(
            normalize_type(TSum(TSharp(inner.left), TSharp(inner.right)))
        )
    if isinstance(inner, TProd):
        out.append(
            normalize_type(TProd(TSharp(inner.left), TSharp(inner.right)))
        )
    return out


def _via_refinements(ctx: Context, t: Term, goal: TypeExpr, fuel: int) -> Derivation:
    last: NoDerivation | None = None
    for refined in _sharp_refinements(goal):
        try:
            return _sub_wrap(_check(ctx, Single(t), refined, fuel), goal)
        except NoDerivation as e:
            last = e
    raise last or _no(ctx, Single(t), goal, "no rule matches this goal shape")


def _split(
    ctx: Context, fv_left: frozenset[str], fv_right: frozenset[str], goal_desc: str
) -> tuple[Context, Context, list[tuple[str, str]]]:
    """Split a context by usage; overlapping pure variables are doubled.

    Returns (left, right, renames) where each (x, fresh) in renames stands
    for a contraction: the right-hand subterm must use fresh instead of x.
    """
    left: list[tuple[str, TypeExpr]] = []
    right: list[tuple[str, TypeExpr]] = []
    renames: list[tuple[str, str]] = []
    taken = set(ctx.names) | set(fv_left) | set(fv_right)
    for x, a in ctx.bindings:
        uses_l, uses_r = x in fv_left, x in fv_right
        if uses_l and uses_r:
            if not is_pure_type(a):
                raise NoDerivation(
                    f"non-pure variable {x} is used in two positions of {goal_desc}"
                )
            fresh = fresh_name(x + "_c", taken)
            taken.add(fresh)
            left.append((x, a))
            right.append((fresh, a))
            renames.append((x, fresh))
        elif uses_l:
            left.append((x, a))
        elif uses_r:
            right.append((x, a))
    return Context(tuple(left)), Context(tuple(right)), renames


def _rename_raw(d: Raw, renames: list[tuple[str, str]]) -> Raw:
    for x, fresh in renames:
        d = substitute(d, x, Var(fresh))
    return d


def _contract(node: Derivation, renames: list[tuple[str, str]]) -> Derivation:
    for x, fresh in reversed(renames):
        j = node.judgment
        node = Derivation(
            "Contr",
            TypingJudgment(
                j.ctx.remove(fresh), substitute(j.term, fresh, Var(x)), j.ty
            ),
            (node,),
            info=(x, fresh),
        )
    return node


def _synth(ctx: Context, t: Term) -> TypeExpr | None:
    """Bottom-up type synthesis for scrutinees and application parts."""
    if isinstance(t, Var):
        return ctx.lookup(t.name)
    if isinstance(t, Void):
        return UNIT
    if t.key == Inl(Void()).key or t.key == Inr(Void()).key:
        return BOOL
    if isinstance(t, Pair):
        l, r = _synth(ctx, t.left), _synth(ctx, t.right)
        if l is not None and r is not None:
            return normalize_type(TProd(l, r))
        return None
    if isinstance(t, App):
        mk = as_mkpair(t)
        if mk is not None:
            l, r = _synth(ctx, mk[0]), _synth(ctx, mk[1])
            if l is not None and r is not None:
                return normalize_type(TProd(l, r))
            return None
        fun_ty = _synth(ctx, t.fun)
        if isinstance(fun_ty, (TPureArrow, TUnitArrow)):
            return fun_ty.cod
        return None
    if isinstance(t, Seq):
        inner = _is_singleton(t.rest)
        if inner is not None:
            return _synth(ctx, inner)
        return None
    return None


def _fresh_binder(var: str, body: Raw, ctx: Context) -> tuple[str, Raw]:
    if var in ctx.names:
        new = fresh_name(var, set(ctx.names) | set(body.free_vars))
        return new, substitute(body, var, Var(new))
    return var, body


def _check_term(ctx: Context, t: Term, goal: TypeExpr, fuel: int) -> Derivation:
    J = TypingJudgment
    if isinstance(t, Var):
        a = ctx.lookup(t.name)
        assert a is not None
        return _sub_wrap(Derivation("Axiom", J(ctx, Single(t), a)), goal)
    if isinstance(t, Void):
        return _sub_wrap(Derivation("Void", J(ctx, Single(t), UNIT)), goal)

    if isinstance(t, Lam):
        if isinstance(goal, (TPureArrow, TUnitArrow)):
            if isinstance(goal, TPureArrow) and not _pure_context(ctx):
                raise _no(ctx, Single(t), goal,
                          "a pure arrow needs a pure context (flat G == G)")
            var, body = _fresh_binder(t.var, t.body, ctx)
            premise = _check(ctx.extend(var, goal.dom), body, goal.cod, fuel)
            rule = "PureLam" if isinstance(goal, TPureArrow) else "UnitLam"
            return Derivation(rule, J(ctx, Single(t), goal), (premise,))
        return _via_refinements(ctx, t, goal, fuel)

    if isinstance(t, Pair):
        if isinstance(goal, TProd):
            lctx, rctx, renames = _split(
                ctx, t.left.free_vars, t.right.free_vars, str(t)
            )
            right = _rename_raw(Single(t.right), renames)
            dl = _check(lctx, Single(t.left), goal.left, fuel)
            dr = _check(rctx, right, goal.right, fuel)
            rt = _is_singleton(right)
            assert isinstance(rt, Value)
            node = Derivation(
                "Pair",
                J(lctx.union(rctx), Single(Pair(t.left, rt)), goal),
                (dl, dr),
            )
            return _contract(node, renames)
        return _via_refinements(ctx, t, goal, fuel)

    if isinstance(t, (Inl, Inr)):
        if isinstance(goal, TSum):
            side = goal.left if isinstance(t, Inl) else goal.right
            premise = _check(ctx, Single(t.value), side, fuel)
            rule = "InL" if isinstance(t, Inl) else "InR"
            return Derivation(rule, J(ctx, Single(t), goal), (premise,))
        return _via_refinements(ctx, t, goal, fuel)

    if isinstance(t, App):
        return _check_app(ctx, t, goal, fuel)

    if isinstance(t, Seq):
        errors: list[NoDerivation] = []
        hfv, rfv = t.head.free_vars, t.rest.free_vars
        for rule, head_ty in (("Seq", UNIT), ("SeqSharp", TSharp(UNIT))):
            if rule == "SeqSharp" and not isinstance(goal, TSharp):
                continue
            try:
                hctx, rctx, renames = _split(ctx, hfv, rfv, str(t))
                rest = _rename_raw(t.rest, renames)
                dh = _check(hctx, Single(t.head), normalize_type(head_ty), fuel)
                dr = _check(rctx, rest, goal, fuel)
                node = Derivation(
                    rule,
                    J(hctx.union(rctx), Single(Seq(t.head, rest)), goal),
                    (dh, dr),
                )
                return _contract(node, renames)
            except NoDerivation as e:
                errors.append(e)
        raise errors[-1] if errors else _no(ctx, Single(t), goal, "seq fails")

    if isinstance(t, LetPair):
        return _check_letpair(ctx, t, goal, fuel)
    if isinstance(t, Match):
        return _check_match(ctx, t, goal, fuel)
    raise _no(ctx, Single(t), goal, f"no rule for {type(t).__name__}")


def _check_app(ctx: Context, t: App, goal: TypeExpr, fuel: int) -> Derivation:
    J = TypingJudgment
    errors: list[NoDerivation] = []

    mk = as_mkpair(t)
    if mk is not None:
        try:
            return _check_mkpair(ctx, t, mk[0], mk[1], goal, fuel)
        except NoDerivation as e:
            errors.append(e)

    ffv, afv = t.fun.free_vars, t.arg.free_vars

    def build(arg_ty: TypeExpr, result_ty: TypeExpr) -> Derivation:
        fctx, actx, renames = _split(ctx, ffv, afv, str(t))
        arg = _rename_raw(Single(t.arg), renames)
        df = _check(fctx, Single(t.fun), TUnitArrow(arg_ty, result_ty), fuel)
        da = _check(actx, arg, arg_ty, fuel)
        at = _is_singleton(arg)
        node = Derivation(
            "App",
            J(fctx.union(actx), Single(App(t.fun, at)), result_ty),
            (df, da),
        )
        return _sub_wrap(_contract(node, renames), goal)

    fun_ty = _synth(ctx, t.fun)
    if isinstance(fun_ty, (TPureArrow, TUnitArrow)):
        try:
            return build(normalize_type(fun_ty.dom), normalize_type(fun_ty.cod))
        except NoDerivation as e:
            errors.append(e)
    arg_ty = _synth(ctx, t.arg)
    if arg_ty is not None:
        try:
            return build(normalize_type(arg_ty), goal)
        except NoDerivation as e:
            errors.append(e)
    if errors:
        raise errors[-1]
    raise _no(ctx, Single(t), goal,
              "cannot synthesize a type for either side of the application")


def _mkpair_derivation(c1: TypeExpr, c2: TypeExpr, prod: TypeExpr) -> Derivation:
    """Canned derivation of |- MKPAIR : c1 => c2 => prod."""
    J = TypingJudgment
    a, b = "mk1", "mk2"
    pair_ctx = Context(((a, c1), (b, c2)))
    pair_node = Derivation(
        "Pair",
        J(pair_ctx, Single(Pair(Var(a), Var(b))), normalize_type(TProd(c1, c2))),
        (
            Derivation("Axiom", J(Context(((a, c1),)), Single(Var(a)), c1)),
            Derivation("Axiom", J(Context(((b, c2),)), Single(Var(b)), c2)),
        ),
    )
    pair_node = _sub_wrap(pair_node, prod)
    inner = Derivation(
        "UnitLam",
        J(
            Context(((a, c1),)),
            Single(Lam(b, Single(Pair(Var(a), Var(b))))),
            TUnitArrow(c2, prod),
        ),
        (pair_node,),
    )
    return Derivation(
        "UnitLam",
        J(Context(), Single(MKPAIR), TUnitArrow(c1, TUnitArrow(c2, prod))),
        (inner,),
    )


def _check_mkpair(
    ctx: Context, t: App, e1: Term, e2: Term, goal: TypeExpr, fuel: int
) -> Derivation:
    """Type MKPAIR e1 e2 as a pair whose components evaluate first."""
    J = TypingJudgment
    if isinstance(goal, TProd):
        c1, c2 = normalize_type(goal.left), normalize_type(goal.right)
    elif isinstance(goal, TSharp) and isinstance(
        normalize_type(goal.of), TProd
    ):
        inner = normalize_type(goal.of)
        c1 = normalize_type(TSharp(inner.left))
        c2 = normalize_type(TSharp(inner.right))
    else:
        raise _no(ctx, Single(t), goal, "a pair needs a product-shaped goal")
    lctx, rctx, renames = _split(ctx, e1.free_vars, e2.free_vars, str(t))
    arg2 = _rename_raw(Single(e2), renames)
    d1 = _check(lctx, Single(e1), c1, fuel)
    d2 = _check(rctx, arg2, c2, fuel)
    mk = _mkpair_derivation(c1, c2, goal)
    app1 = Derivation(
        "App",
        J(lctx, Single(App(MKPAIR, e1)), TUnitArrow(c2, goal)),
        (mk, d1),
    )
    e2t = _is_singleton(arg2)
    node = Derivation(
        "App",
        J(lctx.union(rctx), Single(App(App(MKPAIR, e1), e2t)), goal),
        (app1, d2),
    )
    return _contract(node, renames)


def _check_letpair(ctx: Context, t: LetPair, goal: TypeExpr, fuel: int) -> Derivation:
    J = TypingJudgment
    subj_ty = _synth(ctx, t.subject)
    if subj_ty is None:
        raise _no(ctx, Single(t), goal, "cannot synthesize the scrutinee type")
    subj_ty = normalize_type(subj_ty)
    body_fv = t.body.free_vars - {t.left, t.right}
    errors: list[NoDerivation] = []

    if isinstance(subj_ty, TProd):
        try:
            sctx, bctx, renames = _split(ctx, t.subject.free_vars, body_fv, str(t))
            body = _rename_raw(t.body, renames)
            x, body = _fresh_binder(t.left, body, ctx)
            y, body = _fresh_binder(t.right, body, ctx.extend(x, UNIT))
            ds = _check(sctx, Single(t.subject), subj_ty, fuel)
            db = _check(
                bctx.extend(x, subj_ty.left).extend(y, subj_ty.right),
                body,
                goal,
                fuel,
            )
            node = Derivation(
                "LetPair",
                J(sctx.union(bctx), Single(LetPair(x, y, t.subject, body)), goal),
                (ds, db),
            )
            return _contract(node, renames)
        except NoDerivation as e:
            errors.append(e)

    tensor = None
    if isinstance(subj_ty, TSharp) and isinstance(subj_ty.of, TProd):
        tensor = subj_ty
    elif isinstance(subj_ty, TProd):
        tensor = normalize_type(TSharp(subj_ty))
    if tensor is not None and isinstance(goal, TSharp):
        try:
            inner = tensor.of
            sctx, bctx, renames = _split(ctx, t.subject.free_vars, body_fv, str(t))
            body = _rename_raw(t.body, renames)
            x, body = _fresh_binder(t.left, body, ctx)
            y, body = _fresh_binder(t.right, body, ctx.extend(x, UNIT))
            ds = _check(sctx, Single(t.subject), tensor, fuel)
            db = _check(
                bctx.extend(x, normalize_type(TSharp(inner.left))).extend(
                    y, normalize_type(TSharp(inner.right))
                ),
                body,
                goal,
                fuel,
            )
            node = Derivation(
                "LetTens",
                J(sctx.union(bctx), Single(LetPair(x, y, t.subject, body)), goal),
                (ds, db),
            )
            return _contract(node, renames)
        except NoDerivation as e:
            errors.append(e)
    if errors:
        raise errors[-1]
    raise _no(ctx, Single(t), goal,
              f"scrutinee type {subj_ty} fits neither let rule")


def _check_match(ctx: Context, t: Match, goal: TypeExpr, fuel: int) -> Derivation:
    J = TypingJudgment
    subj_ty = _synth(ctx, t.subject)
    if subj_ty is None:
        raise _no(ctx, Single(t), goal, "cannot synthesize the scrutinee type")
    subj_ty = normalize_type(subj_ty)
    branch_fv = (t.left.free_vars - {t.left_var}) | (
        t.right.free_vars - {t.right_var}
    )
    errors: list[NoDerivation] = []

    if isinstance(subj_ty, TSum):
        try:
            sctx, bctx, renames = _split(ctx, t.subject.free_vars, branch_fv, str(t))
            left = _rename_raw(t.left, renames)
            right = _rename_raw(t.right, renames)
            x1, left = _fresh_binder(t.left_var, left, ctx)
            x2, right = _fresh_binder(t.right_var, right, ctx)
            ds = _check(sctx, Single(t.subject), subj_ty, fuel)
            d1 = _check(bctx.extend(x1, subj_ty.left), left, goal, fuel)
            d2 = _check(bctx.extend(x2, subj_ty.right), right, goal, fuel)
            node = Derivation(
                "PureMatch",
                J(
                    sctx.union(bctx),
                    Single(Match(t.subject, x1, left, x2, right)),
                    goal,
                ),
                (ds, d1, d2),
            )
            return _contract(node, renames)
        except NoDerivation as e:
            errors.append(e)

    dsum = None
    if isinstance(subj_ty, TSharp) and isinstance(subj_ty.of, TSum):
        dsum = subj_ty
    elif isinstance(subj_ty, TSum):
        dsum = normalize_type(TSharp(subj_ty))
    if dsum is not None and isinstance(goal, TSharp):
        try:
            inner = dsum.of
            sctx, bctx, renames = _split(ctx, t.subject.free_vars, branch_fv, str(t))
            left = _rename_raw(t.left, renames)
            right = _rename_raw(t.right, renames)
            x1, left = _fresh_binder(t.left_var, left, ctx)
            x2, right = _fresh_binder(t.right_var, right, ctx)
            a1 = normalize_type(TSharp(inner.left))
            a2 = normalize_type(TSharp(inner.right))
            ds = _check(sctx, Single(t.subject), dsum, fuel)
            orth = OrthogonalityJudgment(
                bctx, Context(((x1, a1),)), left, Context(((x2, a2),)), right, goal
            )
            verdict = check_orthogonality(orth, fuel)
            if verdict is not Tri.YES:
                raise _no(
                    ctx,
                    Single(t),
                    goal,
                    f"orthogonality premise is {verdict.value}: {orth}",
                )
            node = Derivation(
                "UnitaryMatch",
                J(
                    sctx.union(bctx),
                    Single(Match(t.subject, x1, left, x2, right)),
                    goal,
                ),
                (ds, orth),
            )
            return _contract(node, renames)
        except NoDerivation as e:
            errors.append(e)
    if errors:
        raise errors[-1]
    raise _no(ctx, Single(t), goal,
              f"scrutinee type {subj_ty} fits neither match rule")
