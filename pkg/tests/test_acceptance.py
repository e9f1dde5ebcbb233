"""The eleven acceptance criteria, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v``; a summary section lists one
PASS/FAIL line per criterion.
"""

import random
import time
from fractions import Fraction as F

import pytest

from solvrank.catalog import catalog, decorate, tower_family
from solvrank.encode import InjectivityError, identity_successor, mu_partial, table
from solvrank.func import (
    BaseP, Poly, SinSqExample, TreeSumCantor, TreeSumWestrick, Zero, eval, eval_deriv,
    norm_certificates, scale,
)
from solvrank.ivp import containment_check, example1_rhs, example1_y0, validate_tuples
from solvrank.kw import KWGridConfig, kw_rank_lower_bound
from solvrank.ordinal import OMEGA, Ordinal
from solvrank.removed import removed_sequence, solvable_rank
from solvrank.tree import EMPTY, limsup_rank, parse_tree, random_schema, tree_of_rank

criterion = pytest.mark.criterion
_KW = {}


def kw(name, f):
    if name not in _KW:
        _KW[name] = kw_rank_lower_bound(f, KWGridConfig())
    return _KW[name]


@criterion(1, "rank identity on >= 25 tower schemas, ranks {0..4, w+1, w+2}, < 60 s")
def test_c1_rank_identity():
    t0 = time.perf_counter()
    trees = tower_family(28, seed=0)
    ranks = {limsup_rank(t) for t in trees}
    assert ranks == {Ordinal.of(k) for k in range(5)} | {OMEGA + 1, OMEGA + 2}
    assert len(trees) >= 25
    for t in trees:
        assert solvable_rank(TreeSumCantor(t)) == limsup_rank(t) + 1
    assert time.perf_counter() - t0 < 60


@criterion(2, "x^2 sin(1/x): SV = 2 and KW estimate = 2; C^1 cases give 1 for both")
def test_c2_paper_constants():
    assert solvable_rank(SinSqExample()) == Ordinal.of(2)
    assert kw("sinsq", SinSqExample()) == 2
    for name, f in (("x^2", Poly((F(0), F(0), F(1)))), ("zero", Zero())):
        assert solvable_rank(f) == Ordinal.of(1)
        assert kw(name, f) == 1


@criterion(3, "Westrick collapse: SV = 2 on >= 5 schemas of limsup rank >= 2")
def test_c3_westrick_collapse():
    rng = random.Random(11)
    trees = [parse_tree(s) for s in ("(~())", "(~(~()))", "(()~(~()))", "(~(~(~())))")]
    trees += [tree_of_rank(4), decorate(tree_of_rank(3), rng, p=1.0), decorate(tree_of_rank(4), rng, p=1.0)]
    assert len(trees) >= 5
    for t in trees:
        assert limsup_rank(t) >= Ordinal.of(2)
        assert solvable_rank(TreeSumWestrick(t)) == Ordinal.of(2), t


@criterion(4, "norm certificates < 2 for catalog trees; 2^-10 grid stays in [-2, 2]")
def test_c4_norms():
    funcs = [e.func for e in catalog() if isinstance(e.func, (TreeSumCantor, TreeSumWestrick))]
    assert len(funcs) >= 10
    for f in funcs:
        s, d = norm_certificates(f)
        assert s < 2 and d < 2
        for i in range(1025):
            x = F(i, 1024)
            for fn in (eval, eval_deriv):
                iv = fn(f, x, F(1, 2**20))
                assert -2 <= iv.lo and iv.hi <= 2, (f, x)


@criterion(5, "scaling invariance on >= 10 (y, [a, b]) pairs")
def test_c5_scaling():
    ys = [BaseP(), TreeSumCantor(parse_tree("(~())")), TreeSumCantor(parse_tree("(~*())")),
          TreeSumWestrick(parse_tree("(~(~()))")), TreeSumCantor(tree_of_rank(4)), Zero()]
    spans = [(F(0), F(1)), (F(1, 3), F(2, 3)), (F(1, 8), F(1, 2)), (F(0), F(1, 5))]
    pairs = [(y, a, b) for y in ys for a, b in spans]
    assert len(pairs) >= 10
    for y, a, b in pairs:
        assert solvable_rank(scale(y, a, b, F(1, 4))) == solvable_rank(y)


@criterion(6, "Example 1 at h = 2^-10: contained, max width <= 0.05, all five conditions, < 5 min")
def test_c6_monkeys_soundness(enclosure):
    t0 = time.perf_counter()
    enc = enclosure(F(1, 1024))
    ok, where = containment_check(enc)
    assert ok, f"solution escapes at t = {where}"
    assert enc.times[0] == -2 and enc.times[-1] == 2
    assert enc.max_width() <= F(1, 20)
    report = validate_tuples(example1_rhs(), example1_y0(), enc.tuples)
    assert report.ok, report.first_failure
    assert all(report.conditions.values()) and report.initial
    assert time.perf_counter() - t0 < 300


@criterion(7, "width at t = 2 strictly decreases over h = 2^-6, 2^-8, 2^-10")
def test_c7_refinement(enclosure):
    widths = [enclosure(F(1, 2**k)).final_width() for k in (6, 8, 10)]
    assert widths[0] > widths[1] > widths[2]


@criterion(8, "stage monotonicity under >= 1000 random rational probes per sequence")
def test_c8_stage_monotonicity():
    rng = random.Random(2024)
    probes = [F(rng.randrange(0, 3**12 + 1), 3**12) for _ in range(600)]
    probes += [F(rng.randrange(0, 10**6 + 1), 10**6) for _ in range(600)]
    assert len(probes) >= 1000
    funcs = [e.func for e in catalog()]
    for f in funcs:
        seq = removed_sequence(f)
        for x in probes:
            flags = [s.set.contains(x) for s in seq]
            assert all(a or not b for a, b in zip(flags, flags[1:])), (f, x)


@criterion(9, "stated KW <= stated SV, and the grid estimate never exceeds stated KW")
def test_c9_kw_sv_order():
    names = {"zero": "zero", "x^2": "x^2", "x^2 sin(1/x)": "sinsq"}
    stated = [e for e in catalog() if e.kw is not None]
    assert {e.name for e in stated} >= set(names)
    for e in stated:
        assert Ordinal.of(e.kw) <= e.sv
        assert kw(names.get(e.name, e.name), e.func) <= e.kw


@criterion(10, "mu: 7/8 at N = 3, monotone to N = 64, injectivity enforced")
def test_c10_mu():
    h = identity_successor()
    assert mu_partial(h, 3) == F(7, 8)
    sums = [mu_partial(h, n) for n in range(65)]
    assert all(a < b for a, b in zip(sums, sums[1:])) and sums[-1] < 1
    with pytest.raises(InjectivityError):
        mu_partial(table([2, 2]), 2)


@criterion(11, "limsup rank of 200 nonempty schemas is a successor")
def test_c11_successor():
    rng = random.Random(5)
    trees = []
    while len(trees) < 150:
        t = random_schema(rng)
        if t != EMPTY:
            trees.append(t)
    trees += [t for t in tower_family(80, seed=6) if t != EMPTY][:50]
    assert len(trees) >= 200
    for t in trees:
        assert limsup_rank(t).is_successor
