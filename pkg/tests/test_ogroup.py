import itertools

import pytest
from hypothesis import given, strategies as st

from valhyper.ogroup import (
    INF,
    ConvexSubgroup,
    Cut,
    G,
    GroupElem,
    Segment,
    gt_segment,
    parse_elem,
    parse_segment,
    quotient_map,
    seg_contains,
    seg_double_leq,
    zero,
)

coords = st.integers(-6, 6)
elems2 = st.tuples(coords, coords).map(GroupElem)


def segments2():
    nonneg = elems2.filter(lambda g: g >= zero(2))
    return st.one_of(
        st.just(Segment.zero(2)),
        nonneg.map(Segment.upto),
        st.integers(0, 2).map(lambda k: Segment.cone(k, 2)),
    )


def test_seg_contains_examples():
    assert seg_contains(Segment.upto(G(0, 2)), G(0, 1))
    assert not seg_contains(Segment.upto(G(0, 2)), G(1, 0))
    assert seg_contains(Segment.cone(1, 2), G(0, 5))


def test_gt_segment_examples():
    assert gt_segment(G(0, 3), Segment.upto(G(0, 2)), G(0, 0))
    assert not gt_segment(G(0, 2), Segment.upto(G(0, 2)), G(0, 0))
    assert gt_segment(G(1, -7), Segment.cone(1, 2), G(0, 0))
    assert gt_segment(INF, Segment.upto(G(0, 2)), INF)
    assert not gt_segment(G(5, 5), Segment.zero(2), INF)


def test_seg_double_leq_examples():
    assert seg_double_leq(Segment.upto(G(0, 1)), Segment.upto(G(0, 2)))
    for m in range(-3, 20):
        assert not seg_double_leq(Segment.upto(G(1, 0)), Segment.upto(G(1, m)))
    assert seg_double_leq(Segment.zero(2), Segment.zero(2))


def test_quotient_map_examples():
    assert quotient_map(G(3, 7), ConvexSubgroup(1, 2)) == G(3)
    assert quotient_map(G(0, 7), ConvexSubgroup(1, 2)) == G(0)
    assert quotient_map(G(-2, 5), ConvexSubgroup(2, 2)) == GroupElem(())
    assert quotient_map(INF, ConvexSubgroup(1, 2)) is INF


def test_normal_forms_and_text():
    assert Segment.upto(G(0, 0)) == Segment.zero(2) == Segment.cone(0, 2)
    assert parse_segment("cone(1)", 2) == Segment.cone(1, 2)
    assert parse_segment("[0,(0,3)]", 2) == Segment.upto(G(0, 3))
    assert parse_segment("{0}", 2) == Segment.zero(2)
    assert parse_elem("(−1,2)") == G(-1, 2)
    assert str(Segment.upto(G(0, 3))) == "[0,(0,3)]"
    with pytest.raises(ValueError):
        parse_elem("(1,x)")
    with pytest.raises(ValueError):
        Segment.upto(G(-1, 0))


def test_infinity():
    assert INF > G(10**9, 0) and not INF < G(0, 0)
    assert G(1, 2) + INF is INF
    with pytest.raises(ArithmeticError):
        INF - INF


@given(elems2, elems2, elems2)
def test_lex_order_translation_invariant(a, b, c):
    if a < b:
        assert a + c < b + c


@given(segments2(), elems2, elems2)
def test_seg_contains_downward_closed(rho, g, d):
    if seg_contains(rho, g) and zero(2) <= d <= g:
        assert seg_contains(rho, d)


@given(segments2(), elems2)
def test_gt_segment_is_complement_above_zero(rho, g):
    assert gt_segment(g, rho, zero(2)) == (not seg_contains(rho, g) and g > zero(2))


@given(elems2, elems2, st.integers(0, 2))
def test_quotient_map_homomorphic_and_monotone(a, b, k):
    D = ConvexSubgroup(k, 2)
    assert quotient_map(a + b, D) == quotient_map(a, D) + quotient_map(b, D)
    if a <= b:
        assert quotient_map(a, D) <= quotient_map(b, D)


@given(elems2, elems2, st.integers(0, 2))
def test_convex_subgroup_is_convex(a, b, k):
    D = ConvexSubgroup(k, 2)
    if zero(2) <= a <= b and D.contains(b):
        assert D.contains(a)


# brute-force oracle for cut comparison: a cut is the up-set it describes,
# sampled on a box large enough to separate the cuts below
BOX = [GroupElem(p) for p in itertools.product(range(-5, 6), repeat=2)]


def _upset(c: Cut):
    return frozenset(g for g in BOX if c.exceeded_by(g))


cuts2 = st.one_of(
    st.tuples(st.integers(-2, 2), st.integers(-2, 2)).map(lambda p: Cut(GroupElem(p), 0, 2)),
    st.integers(-2, 2).map(lambda a: Cut(GroupElem((a, 0)), 1, 2)),
)


@given(cuts2, cuts2)
def test_cut_leq_matches_set_inclusion(a, b):
    # a <= b as cuts means everything above b is above a
    assert a.leq(b) == (_upset(b) <= _upset(a))
