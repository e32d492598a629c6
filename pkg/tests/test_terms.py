"""Alpha-equivalence and the two substitution operations."""

import random

import pytest

from unilam import terms as T
from unilam.distrib import (
    Dist,
    OpenValueError,
    ShapeError,
    bilinear_substitute,
    canonicalize,
    single,
)
from unilam.parser import parse_term
from unilam.terms import Scale, Single, Sum, Var

from helpers import rand_coeff, rand_raw, rand_term, rand_value, rand_value_dist


def P(src: str) -> T.Raw:
    return parse_term(src)


def one(src: str) -> T.Term:
    d = canonicalize(P(src))
    assert len(d) == 1 and d.summands[0][0] == 1.0
    return d.summands[0][1]


class TestAlphaEquality:
    def test_binder_names_do_not_matter(self):
        assert one("lam x. x") == one("lam y. y")

    def test_sum_order_matters_inside_binders(self):
        s1 = one("lam x. tt + ff")
        s2 = one("lam x. ff + tt")
        assert s1 != s2

    def test_reflexive(self):
        rng = random.Random(7)
        for _ in range(50):
            t = rand_term(rng, 3)
            assert T.alpha_equal(t, t)

    def test_nested_binders(self):
        assert one("lam x. lam y. x y") == one("lam a. lam b. a b")
        assert one("lam x. lam y. x y") != one("lam a. lam b. b a")

    def test_letpair_and_match_binders(self):
        a = one("let (x, y) = z in (x, y)")
        b = one("let (u, v) = z in (u, v)")
        assert a == b
        c = one("match z { inl x -> x | inr y -> y }")
        d = one("match z { inl u -> u | inr v -> v }")
        assert c == d

    def test_scalars_inside_bodies_compared_exactly(self):
        assert one("lam x. 0.5 * x") != one("lam x. 0.5000001 * x")

    def test_ordering_is_total_and_stable(self):
        rng = random.Random(8)
        terms = [rand_term(rng, 2) for _ in range(30)]
        keys = sorted(terms, key=lambda t: t.key)
        assert sorted(keys, key=lambda t: t.key) == keys
        assert T.TT.key < T.FF.key


class TestPureSubstitution:
    def test_variable(self):
        assert canonicalize(T.substitute(P("x"), "x", T.TT)) == single(T.TT)

    def test_under_binder(self):
        out = T.substitute(P("lam y. x"), "x", T.TT)
        assert canonicalize(out) == canonicalize(P("lam y. tt"))

    def test_shadowing_stops_substitution(self):
        out = T.substitute(P("lam x. x"), "x", T.TT)
        assert canonicalize(out) == canonicalize(P("lam x. x"))

    def test_capture_avoided(self):
        # substituting y under lam y must rename the binder
        out = T.substitute(P("lam y. (x, y)"), "x", T.Var("y"))
        expected = P("lam z. (y, z)")
        assert canonicalize(out) == canonicalize(expected)

    def test_linear_in_the_distribution(self):
        rng = random.Random(3)
        for _ in range(30):
            d = rand_raw(rng, 2, ("x",))
            w = rand_value(rng, 2)
            left = canonicalize(T.substitute(d, "x", w))
            right = Dist(
                (c, T.subst_term(t, "x", w))
                for c, t in canonicalize(d).summands
            )
            assert left.approx_eq(right, 1e-12)

    def test_substitution_lemma(self):
        # t[x:=v][y:=w] = t[y:=w][x:=v[y:=w]]  when x != y, x not in FV(w)
        rng = random.Random(4)
        for _ in range(40):
            t = rand_raw(rng, 2, ("x", "y"))
            v = rand_value(rng, 2, ("y",))
            w = rand_value(rng, 2)
            assert "x" not in w.free_vars
            lhs = T.substitute(T.substitute(t, "x", v), "y", w)
            rhs = T.substitute(
                T.substitute(t, "y", w), "x", T.subst_value(v, "y", w)
            )
            assert canonicalize(lhs).approx_eq(canonicalize(rhs), 1e-12)

    def test_parallel_substitution_avoids_cross_capture(self):
        d = P("(x, y)")
        out = T.substitute_parallel(d, {"x": T.Var("y"), "y": T.Var("x")})
        assert canonicalize(out) == canonicalize(P("(y, x)"))


class TestBilinearSubstitution:
    def test_variable_case(self):
        v = canonicalize(P("0.6 * tt + 0.8 * ff"))
        assert bilinear_substitute(single(Var("x")), "x", v) == v

    def test_weight_scaling_when_not_free(self):
        # tt<x := v> = weight(v) * tt, not tt
        v = canonicalize(P("0.5 * tt + 0.5 * ff"))
        out = bilinear_substitute(single(T.TT), "x", v)
        assert out.approx_eq(single(T.TT))
        v2 = canonicalize(P("0.5 * tt + 0.25 * ff"))
        out2 = bilinear_substitute(single(T.TT), "x", v2)
        assert out2.approx_eq(single(T.TT).scale(0.75))

    def test_duplicated_variable_is_diagonal_not_tensor(self):
        v = canonicalize(P("0.6 * tt + 0.8 * ff"))
        out = bilinear_substitute(canonicalize(P("(x, x)")), "x", v)
        expected = canonicalize(P("0.6 * (tt, tt) + 0.8 * (ff, ff)"))
        assert out.approx_eq(expected)

    def test_open_value_rejected(self):
        v = Dist([(1.0, Var("y"))])
        with pytest.raises(OpenValueError):
            bilinear_substitute(single(Var("x")), "x", v)

    def test_bilinear_in_both_arguments(self):
        rng = random.Random(5)
        for _ in range(30):
            d = canonicalize(rand_raw(rng, 2, ("x",)))
            v = rand_value_dist(rng, 1)
            if not v.is_closed:
                continue
            a = rand_coeff(rng)
            left = bilinear_substitute(d.scale(a), "x", v)
            right = bilinear_substitute(d, "x", v).scale(a)
            assert left.approx_eq(right, 1e-9)
            left2 = bilinear_substitute(d, "x", v.scale(a))
            assert left2.approx_eq(right, 1e-9)

    def test_commutes_for_distinct_closed_substitutions(self):
        rng = random.Random(6)
        for _ in range(30):
            d = canonicalize(rand_raw(rng, 2, ("x", "y")))
            v = rand_value_dist(rng, 1)
            w = rand_value_dist(rng, 1)
            if not (v.is_closed and w.is_closed):
                continue
            one_way = bilinear_substitute(
                bilinear_substitute(d, "x", v), "y", w
            )
            other = bilinear_substitute(
                bilinear_substitute(d, "y", w), "x", v
            )
            assert one_way.approx_eq(other, 1e-9)
