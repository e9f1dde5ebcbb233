from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, strategies as st

from solvrank.func import (
    BaseP, BaseR, DomainError, Poly, R_VARIANTS, SinSqExample, Sum, TreeSumCantor, TreeSumWestrick,
    UnsupportedStructure, Zero, cantor_interval, cantor_locate, eval, eval_deriv, eval_float,
    func_from_json, func_to_json, in_cantor_set, norm_certificates, r_norm_bounds, scale,
    westrick_interval, westrick_locate,
)
from solvrank.rigor import xbar
from solvrank.tree import EMPTY, LEAF, parse_tree

mpmath.mp.prec = 120


def mp(q):
    return mpmath.mpf(q.numerator) / q.denominator


def holds(iv, v):
    return mp(iv.lo) <= v <= mp(iv.hi)


def middle_thirds(level):
    """Oracle: gaps removed at each level, left to right, by explicit recursion."""
    segs, out = [(F(0), F(1))], []
    for _ in range(level):
        nxt = []
        for a, b in segs:
            w = (b - a) / 3
            out.append((a + w, b - w))
            nxt += [(a, a + w), (b - w, b)]
        segs = nxt
    return out


def test_cantor_interval_matches_recursion():
    assert [cantor_interval(n) for n in range(40)] == middle_thirds(6)[:40]
    assert cantor_interval(0) == (F(1, 3), F(2, 3))
    assert cantor_interval(1) == (F(1, 9), F(2, 9))
    assert cantor_interval(2) == (F(7, 9), F(8, 9))


def test_cantor_locate():
    loc = cantor_locate(F(1, 2))
    assert loc.in_gap and (loc.level, loc.index) == (0, 0) and loc.u == F(1, 2)
    assert in_cantor_set(F(1, 4)) and in_cantor_set(F(0)) and not in_cantor_set(F(1, 2))


def test_westrick_intervals():
    assert westrick_interval(0) == (F(9, 20), F(23, 50))
    for n in range(101):
        a, b = westrick_interval(n)
        a1, b1 = westrick_interval(n + 1)
        assert b1 < a < b and b - a < (a - F(1, 4)) ** 2 and a > F(1, 4)
    assert westrick_locate(F(91, 200))[0] == 0 and westrick_locate(F(1, 4)) is None


def test_eval_examples():
    eps = F(1, 2**20)
    assert eval(TreeSumCantor(EMPTY), F(1, 3), eps).lo == eval(TreeSumCantor(EMPTY), F(1, 3), eps).hi == 0
    assert eval(TreeSumCantor(LEAF), F(0), eps).contains(0)
    xb = mp(xbar(F(1, 2**80)).mid)
    assert holds(eval(TreeSumCantor(LEAF), F(1, 2), eps), xb**2 * mpmath.sin(1 / xb))
    assert eval_deriv(TreeSumCantor(parse_tree("(~())")), F(0), eps).contains(0)
    assert eval_deriv(TreeSumCantor(LEAF), F(1, 2), eps).contains(0)
    x = F(1) / F(355, 113)  # near 1/pi; compare against the closed form at this exact x
    xv = mp(x)
    assert holds(eval_deriv(SinSqExample(), x, eps), 2 * xv * mpmath.sin(1 / xv) - mpmath.cos(1 / xv))


def test_eval_width_and_domain():
    eps = F(1, 2**30)
    iv = eval(TreeSumCantor(parse_tree("(~(~()))")), F(3, 7), eps)
    assert iv.width <= eps
    with pytest.raises(DomainError):
        eval(BaseP(), F(3, 2), eps)


def test_scale_examples():
    eps = F(1, 2**30)
    f = scale(BaseP(), F(1, 3), F(2, 3), F(1, 4))
    assert eval(f, F(1, 3), eps).contains(0)
    assert eval(f, F(1, 5), eps) == eval(Zero(), F(1, 5), eps)
    inner = eval(BaseP(), F(1, 2), eps)
    assert eval(f, F(1, 2), eps).intersects(inner * F(1, 12))


def test_norm_certificates():
    assert norm_certificates(TreeSumCantor(EMPTY)) == (0, 0)
    sup, der = norm_certificates(TreeSumCantor(LEAF))
    assert sup <= 1 + F(1, 6) and der < 2
    for text in ["(~())", "(~(~()))", "(~*())", "(()()~(~()))"]:
        s, d = norm_certificates(TreeSumCantor(parse_tree(text)))
        assert s < 2 and d < 2


def test_r_variants():
    for name, r in R_VARIANTS.items():
        assert r.value(F(1, 2)) == F(1, 2)
        for x in (F(0), F(1)):
            assert r.value(x) == 0 and r.deriv(x) == 0
        sup, der = r_norm_bounds(name)
        assert sup < 1 and der < 2


def test_plateau_r_is_c1_and_flat_in_the_middle():
    r = R_VARIANTS["plateau"]
    for b in r.breaks[1:-1]:
        h = F(1, 10**9)
        assert abs(r.deriv(b - h) - r.deriv(b + h)) < F(1, 10**6)
    for x in (F(1, 4), F(3, 10), F(23, 50)):
        assert r.deriv(x) == 0


def test_westrick_needs_constant_tails():
    with pytest.raises(UnsupportedStructure):
        norm_certificates(TreeSumWestrick(parse_tree("(~*())")))


funcs = st.sampled_from([
    BaseP(), SinSqExample(), TreeSumCantor(parse_tree("(~())")), TreeSumWestrick(parse_tree("(~())")),
    BaseR("quartic"), Poly((F(0), F(1), F(-1))), scale(BaseP(), F(1, 5), F(3, 5), F(1, 4)),
    Sum((scale(BaseP(), F(0), F(1, 3)), scale(SinSqExample(), F(1, 2), F(1)))),
])
points = st.fractions(min_value=0, max_value=1, max_denominator=10**5)


@given(funcs)
def test_json_roundtrip(f):
    assert func_from_json(func_to_json(f)) == f


@given(funcs, points)
def test_eval_nesting(f, x):
    coarse, fine = eval(f, x, F(1, 2**20)), eval(f, x, F(1, 2**40))
    assert fine.width <= F(1, 2**40) and coarse.intersects(fine)
    assert coarse.widen(F(1, 2**20)).contains(fine.mid)


@given(funcs, points)
def test_float_eval_agrees(f, x):
    iv = eval(f, x, F(1, 2**40))
    assert abs(float(eval_float(f, [float(x)])[0]) - float(iv.mid)) < 1e-9


@given(st.sampled_from([BaseP(), TreeSumCantor(parse_tree("(~())")), Poly((F(0), F(0), F(1)))]),
       st.fractions(min_value=F(1, 10), max_value=F(9, 10), max_denominator=1000))
def test_difference_quotient_matches_derivative(f, x):
    # derivative continuous away from the Cantor set; use a tiny step, generous slack
    h = F(1, 2**30)
    q = (eval(f, x + h, F(1, 2**80)) - eval(f, x, F(1, 2**80))) / h
    d = eval_deriv(f, x, F(1, 2**40))
    assert abs(q.mid - d.mid) < F(1, 2**10) or in_cantor_set(x)


def test_p_glues_at_knots():
    xb = xbar(F(1, 2**80))
    eps = F(1, 2**40)
    left, right = eval(BaseP(), xb.lo, eps), eval(BaseP(), xb.hi, eps)
    assert abs(left.mid - right.mid) < F(1, 2**30)
    assert abs(eval_deriv(BaseP(), xb.hi, eps).mid) < F(1, 2**20)
    # mirror symmetry p(1 - x) = p(x)
    for x in (F(1, 7), F(2, 9), F(1, 3)):
        assert eval(BaseP(), 1 - x, eps).intersects(eval(BaseP(), x, eps))
