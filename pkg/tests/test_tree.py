import random

import pytest
from hypothesis import given, strategies as st

from solvrank.ordinal import OMEGA, Ordinal
from solvrank.tree import (
    EMPTY, LEAF, Node, SchemaSyntaxError, depth, limsup_rank, nth_subtree, parse_tree,
    random_schema, render_tree, tree_from_json, tree_of_rank, tree_to_json, wrap,
)


@pytest.mark.parametrize("text,rank", [
    ("0", "0"), ("()", "1"), ("(~())", "2"), ("(~(~()))", "3"), ("(()()~())", "2"),
    ("(~*())", "w + 1"), ("(~(~*()))", "w + 2"), ("((~()))", "2"), ("(~(0()))", "2"),
])
def test_limsup_examples(text, rank):
    from solvrank.ordinal import render_ordinal

    assert render_ordinal(limsup_rank(parse_tree(text))) == rank


def test_finite_children_take_sup():
    # finitely many children, no tail: rank is sup, no limsup bump
    t = Node((tree_of_rank(3), LEAF))
    assert limsup_rank(t) == Ordinal.of(3)


def test_ladder_subtrees():
    t = parse_tree("(~*())")
    assert nth_subtree(t, 0) == LEAF
    assert nth_subtree(t, 2) == wrap(wrap(LEAF))
    assert limsup_rank(nth_subtree(t, 5)) == Ordinal.of(6)


@pytest.mark.parametrize("bad", ["(", "())", "(~)", "(~()())", "x", ""])
def test_parse_errors(bad):
    with pytest.raises(SchemaSyntaxError):
        parse_tree(bad)


@pytest.mark.parametrize("r", [0, 1, 2, 3, 4, 7])
def test_tree_of_rank_finite(r):
    assert limsup_rank(tree_of_rank(r)) == Ordinal.of(r)


@pytest.mark.parametrize("r", [OMEGA + 1, OMEGA + 3, Ordinal.omega(1, 2) + 1])
def test_tree_of_rank_transfinite(r):
    assert limsup_rank(tree_of_rank(r)) == r


def test_tree_of_rank_rejects_limits():
    with pytest.raises(ValueError):
        tree_of_rank(OMEGA)


schemas = st.integers(0, 10**6).map(lambda s: random_schema(random.Random(s)))


@given(schemas)
def test_roundtrips(t):
    assert parse_tree(render_tree(t)) == t
    assert tree_from_json(tree_to_json(t)) == t


@given(schemas)
def test_nonempty_rank_is_successor(t):
    r = limsup_rank(t)
    assert (t == EMPTY) == r.is_zero
    if t != EMPTY:
        assert r.is_successor


@given(schemas)
def test_wrap_adds_at_most_one(t):
    # a root with all subtrees t has rank |t| + 1
    assert limsup_rank(wrap(t)) == limsup_rank(t) + 1
    assert depth(wrap(t)) == depth(t) + 1
