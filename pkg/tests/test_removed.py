import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from solvrank.catalog import tower_family
from solvrank.func import (
    BaseP, Poly, SinSqExample, Sum, TreeSumCantor, TreeSumWestrick, UnsupportedStructure, Zero,
    cantor_interval, in_cantor_set, scale,
)
from solvrank.ordinal import OMEGA, Ordinal, parse_ordinal
from solvrank.removed import (
    FULL, CantorSet, CapExceeded, EmptySet, Points, Segment, discontinuity_set, make_union,
    numeric_discontinuity_probe, removed_sequence, solvable_rank, stage, stages_to_json,
)
from solvrank.tree import limsup_rank, parse_tree, random_schema, tree_of_rank


def probes(n, seed=0):
    rng = random.Random(seed)
    pts = [F(rng.randrange(0, 10**6), 10**6) for _ in range(n)]
    # Cantor-set points and gap ends are where stages live; include plenty
    pts += [a for k in range(60) for a in cantor_interval(k)]
    pts += [F(1, 4), F(3, 4), F(1, 10), F(0), F(1)]
    return pts


def test_symbolic_sets():
    assert EmptySet().is_empty and not Points(frozenset({F(0)})).is_empty
    assert Segment(F(0), F(1)).contains(F(1, 2))
    c = CantorSet()
    assert c.contains(F(1, 4)) and not c.contains(F(1, 2))
    u = make_union([Points(frozenset({F(0)})), EmptySet()])
    assert u == Points(frozenset({F(0)}))


def test_discontinuity_examples():
    assert discontinuity_set(SinSqExample(), FULL) == Points(frozenset({F(0)}))
    assert discontinuity_set(Zero(), FULL).is_empty
    s1 = discontinuity_set(TreeSumCantor(parse_tree("(~())")), FULL)
    assert all(s1.contains(x) == in_cantor_set(x) for x in probes(200))


def test_removed_sequence_examples():
    assert [s.set.is_empty for s in removed_sequence(Zero())] == [False, True]
    seq = removed_sequence(SinSqExample())
    assert seq[1].set == Points(frozenset({F(0)})) and seq[2].set.is_empty
    seq = removed_sequence(TreeSumCantor(parse_tree("(~())")))
    e2 = seq[2].set
    assert [x for x in probes(300) if e2.contains(x)] == [F(0), F(1)]
    assert seq[3].set.is_empty


@pytest.mark.parametrize("f,rank", [
    (Zero(), "1"), (Poly((F(0), F(0), F(1))), "1"), (SinSqExample(), "2"), (BaseP(), "2"),
    (TreeSumCantor(parse_tree("(~())")), "3"), (TreeSumCantor(parse_tree("(~*())")), "w + 2"),
    (TreeSumWestrick(parse_tree("(~(~()))")), "2"),
])
def test_solvable_rank_examples(f, rank):
    assert solvable_rank(f) == parse_ordinal(rank)


def test_rank_identity_on_towers():
    trees = tower_family(30, seed=3)
    assert {limsup_rank(t) for t in trees} >= {Ordinal.of(k) for k in range(5)} | {OMEGA + 1, OMEGA + 2}
    for t in trees:
        assert solvable_rank(TreeSumCantor(t)) == limsup_rank(t) + 1


def test_free_family_counterexample():
    """Trees with an empty child in a repeated subtree break the identity."""
    t = parse_tree("(~(0()))")
    assert limsup_rank(t) == Ordinal.of(2)
    assert solvable_rank(TreeSumCantor(t)) == Ordinal.of(4)


def test_r_variants_and_the_collapse():
    # only an r that is flat on every [a_n, b_n] collapses deep trees to rank 2
    expected = {"(~())": (2, 2, 2), "(~(~()))": (2, 3, 2), "(~(~(~())))": (2, 4, 3)}
    for text, ranks in expected.items():
        got = tuple(int(solvable_rank(TreeSumWestrick(parse_tree(text), v)))
                    for v in ("plateau", "quartic", "poly10"))
        assert got == ranks, text


def test_westrick_ladders_unsupported():
    with pytest.raises(UnsupportedStructure):
        solvable_rank(TreeSumWestrick(parse_tree("(~*())")))


def test_scaling_requires_flat_ends():
    assert solvable_rank(scale(TreeSumCantor(parse_tree("(~())")), F(1, 5), F(2, 5), F(1, 4))) == 3
    with pytest.raises(UnsupportedStructure):
        solvable_rank(scale(SinSqExample(), F(1, 5), F(2, 5), F(1, 4)))


def test_disjoint_sums():
    f = Sum((scale(BaseP(), F(0), F(1, 3)), scale(TreeSumCantor(parse_tree("(~())")), F(1, 2), F(1))))
    assert solvable_rank(f) == 3


def test_cap(monkeypatch):
    with pytest.raises(CapExceeded):
        solvable_rank(TreeSumCantor(tree_of_rank(4)), Ordinal.of(3))
    monkeypatch.setenv("SOLVRANK_ORDINAL_CAP", "2")
    with pytest.raises(CapExceeded):
        solvable_rank(TreeSumCantor(parse_tree("(~())")))
    monkeypatch.setenv("SOLVRANK_ORDINAL_CAP", "w*20")
    assert solvable_rank(TreeSumCantor(parse_tree("(~())"))) == 3


def test_stage_json_is_versioned():
    f = TreeSumCantor(parse_tree("(()~())"))
    js = stages_to_json(f, removed_sequence(f))
    assert js["format_version"] == 1 and js["solvable_rank"] == "3"


def _monotone(f, pts):
    seq = removed_sequence(f)
    for x in pts:
        flags = [s.set.contains(x) for s in seq]
        # once out, never back in
        assert all(a or not b for a, b in zip(flags, flags[1:])), (f, x, flags)


def test_stage_monotonicity_catalog():
    pts = probes(400, seed=7)
    for f in [SinSqExample(), BaseP(), TreeSumCantor(parse_tree("(~(~()))")),
              TreeSumCantor(parse_tree("(~*())")), TreeSumWestrick(parse_tree("(()~(~()))"))]:
        _monotone(f, pts)


@given(st.integers(0, 10**6))
def test_stage_monotonicity_random_towers(seed):
    t = tower_family(12, seed)[seed % 12]
    _monotone(TreeSumCantor(t), probes(40, seed))


@given(st.integers(0, 10**6))
def test_free_rank_never_below_identity(seed):
    # decorating can only add removed stages, never drop below limsup + 1
    t = random_schema(random.Random(seed))
    assert solvable_rank(TreeSumCantor(t)) >= limsup_rank(t) + 1


def test_numeric_probe():
    assert numeric_discontinuity_probe(Zero(), FULL, F(1, 64), F(1, 2)) == []
    pts = numeric_discontinuity_probe(SinSqExample(), FULL, F(1, 1024), F(1, 2))
    assert pts and all(x <= F(1, 1024) for x in pts)
    pts = numeric_discontinuity_probe(BaseP(), FULL, F(1, 256), F(1, 2))
    assert pts and all(min(x, 1 - x) <= F(1, 256) for x in pts)


def test_probe_consistency_with_stage_one():
    f = TreeSumCantor(parse_tree("(~())"))
    step = F(1, 243)
    s1 = stage(f, 1)
    for x in numeric_discontinuity_probe(f, FULL, step, F(1, 2)):
        near = [x + step * k / 8 for k in range(-8, 9)]
        assert any(0 <= y <= 1 and s1.contains(y) for y in near) or in_cantor_set(x)
