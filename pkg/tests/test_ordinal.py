import pytest
from hypothesis import given, strategies as st

from solvrank.ordinal import (
    OMEGA, ONE, ZERO, Ordinal, OrdinalError, OrdinalSeqSchema, compare, omax, parse_ordinal,
    render_ordinal, successor, sup_limsup,
)

def _cnf(a, b, c):
    return Ordinal(tuple((e, k) for e, k in ((2, a), (1, b), (0, c)) if k))


small = st.builds(_cnf, st.integers(0, 3), st.integers(0, 3), st.integers(0, 5))


def test_parse_render_examples():
    assert render_ordinal(parse_ordinal("w+1")) == "w + 1"
    assert parse_ordinal("w*2 + 3") == Ordinal.omega(1, 2) + 3
    assert parse_ordinal("0") == ZERO
    assert render_ordinal(ZERO) == "0"


@pytest.mark.parametrize("bad", ["", "w+w^2", "x", "-1", "1+w+"])
def test_parse_rejects(bad):
    with pytest.raises(OrdinalError):
        parse_ordinal(bad)


def test_absorption():
    assert 1 + OMEGA == OMEGA
    assert OMEGA + 1 != OMEGA
    assert Ordinal.of(3) + OMEGA == OMEGA


def test_successor_predecessor():
    assert successor(OMEGA).predecessor() == OMEGA
    with pytest.raises(OrdinalError):
        OMEGA.predecessor()
    assert (OMEGA + 2).is_successor and OMEGA.is_limit


def test_sup_limsup_tails():
    # constant tail: limsup is the tail value
    assert sup_limsup(OrdinalSeqSchema((Ordinal.of(5),), ONE)) == (Ordinal.of(5), ONE)
    # growing tail n, n+1, ...: sup = limsup = w
    assert sup_limsup(OrdinalSeqSchema((), ONE, True)) == (OMEGA, OMEGA)


@given(small)
def test_render_roundtrip(a):
    assert parse_ordinal(render_ordinal(a)) == a


@given(small, small, small)
def test_order_is_total_and_transitive(a, b, c):
    assert (a < b) + (b < a) + (a == b) == 1
    if a <= b <= c:
        assert a <= c
    assert compare(a, b) == -compare(b, a)


@given(small, small)
def test_addition_monotone_on_right(a, b):
    assert a + b >= b and a + b >= a
    assert omax([a, b]) in (a, b)
    assert successor(a) > a
