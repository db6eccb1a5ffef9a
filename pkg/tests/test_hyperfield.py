import random
import time

import pytest
from hypothesis import given, strategies as st

from valhyper.errors import ElementsFromDifferentHandles, NotEnumerable, TNotSubgroup
from valhyper.groundfield import PrimeField, ground_field
from valhyper.hyperfield import (
    Ball,
    Exhaustive,
    Sampled,
    TableHyperfield,
    all_pass,
    check_canonical_hypergroup,
    check_hyperfield,
    check_val_lemma,
    check_valuation,
    factor_hyperfield,
    field_as_hyperfield,
    krasner_K,
    krasner_S,
    members,
    nary_sum,
    quotient_of,
    quotient_valued,
    setwise_sum,
    ultrametric_d,
)
from valhyper.ogroup import INF, G, Segment

F3 = ground_field("f3")


def H_upto(n):
    return quotient_of(F3, Segment.upto(G(n)))


def status(reports):
    return {r.axiom: r.status for r in reports}


def failing(reports):
    return [r for r in reports if r.status == "fail"]


def test_krasner_tables():
    K, S = krasner_K(), krasner_S()
    assert len(K.elements()) == 2 and len(S.elements()) == 3
    one = K.one
    assert members(K.add(one, one)) == {K.zero, one}
    assert members(S.add(S.one, S.neg(S.one))) == set(S.elements())


def test_field_as_hyperfield_is_single_valued():
    F = field_as_hyperfield(PrimeField(3))
    S = F.add(F.elem(1), F.elem(2))
    assert S.kind == "singleton" and S.witness == F.zero


def test_setwise_sum_examples():
    K, S = krasner_K(), krasner_S()
    assert setwise_sum(K, [K.one], [K.zero, K.one]) == {K.zero, K.one}
    assert setwise_sum(S, [S.one, S.neg(S.one)], [S.one]) == set(S.elements())
    assert setwise_sum(K, [], [K.one]) == frozenset()


def test_quotient_sum_of_opposites_is_zero_ball():
    H = H_upto(1)
    S = H.add(H.from_rf("1"), H.from_rf("-1"))
    assert S.kind == "zeroball" and S.cut.c == G(1)
    # brute force: 1 - t for t in 1 + x^2 F3[[x]] always has value above 1
    rng = random.Random(0)
    for _ in range(50):
        t = F3.one() + H.random_series(rng, G(2))
        d = F3.one() - t
        assert d.is_exact_zero() or d.val() > G(1)
        assert H.member(S, H.theta(d) if not d.is_exact_zero() else H.zero)


@pytest.mark.parametrize("H", [krasner_K(), krasner_S()], ids=["K", "S"])
def test_finite_hyperfields_pass_exhaustively(H):
    t = time.perf_counter()
    assert all_pass(check_hyperfield(H, Exhaustive))
    assert time.perf_counter() - t < 1


def test_corrupted_tables_are_caught():
    add = {(0, 0): {0}, (0, 1): {1}, (1, 0): {1}, (1, 1): {1}}
    mul = {(a, b): a * b for a in (0, 1) for b in (0, 1)}
    bad = TableHyperfield("K-no-inverse", [0, 1], add, mul)
    (r,) = [r for r in check_canonical_hypergroup(bad) if r.axiom == "CH3"]
    assert r.status == "fail" and r.witness["x"] == "1"

    mul2 = dict(mul)
    mul2[(1, 1)] = 0
    good_add = {(0, 0): {0}, (0, 1): {1}, (1, 0): {1}, (1, 1): {0, 1}}
    bad2 = TableHyperfield("K-bad-mul", [0, 1], good_add, mul2)
    assert status(check_hyperfield(bad2))["HF2"] == "fail"


def test_factor_hyperfields():
    F5, F7 = field_as_hyperfield(PrimeField(5)), field_as_hyperfield(PrimeField(7))
    q = factor_hyperfield(F5, [1, 4])
    assert len(q.elements()) == 3
    assert q.fmt_set(q.add(q.one, q.one)) == "{[0],[2]}"
    assert all_pass(check_hyperfield(q))
    assert len(factor_hyperfield(F7, [1, 6]).elements()) == 4
    assert all_pass(check_hyperfield(factor_hyperfield(F7, [1, 2, 4])))
    with pytest.raises(TNotSubgroup):
        factor_hyperfield(F5, [1, 2])
    with pytest.raises(NotEnumerable):
        factor_hyperfield(H_upto(1), [])


def test_trivial_valuation_norm_axiom_failures():
    q = factor_hyperfield(field_as_hyperfield(PrimeField(7)), [1, 2, 4]).with_trivial_valuation()
    (r,) = failing(check_valuation(q))
    assert r.axiom == "V4" and r.witness == "[1]+[1] ⊇ {[1],[3]}"
    S = krasner_S().with_trivial_valuation()
    assert [r.axiom for r in failing(check_valuation(S))] == ["V4"]


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_quotients_satisfy_valuation_axioms(n):
    H = H_upto(n)
    reps = check_valuation(H, Sampled(1500, seed=n))
    assert all_pass(reps), failing(reps)
    assert all_pass(check_hyperfield(H, Sampled(300, seed=n)))
    assert all_pass(check_val_lemma(H, Sampled(500, seed=n)))


def test_val_lemma_skips_and_planted_defect():
    assert set(status(check_val_lemma(krasner_S())).values()) == {"skipped"}
    S = krasner_S()
    planted = S.with_valuation({0: INF, 1: G(0), -1: G(1)}, Segment.zero(1), "S-planted")
    st_ = status(check_val_lemma(planted))
    assert st_["(i)"] == "fail"


def test_quotient_valued():
    H3, H1 = H_upto(3), H_upto(1)
    q = quotient_valued(H3, Segment.upto(G(1)))
    assert q is H1
    rng = random.Random(5)
    for _ in range(100):
        a = H3.random_series(rng)
        assert q.theta(a) == H1.project_from(H3, H3.theta(a))
    assert quotient_valued(H1, Segment.upto(G(4))) is H1
    assert quotient_valued(H1, Segment.zero(1)).norm == Segment.zero(1)


def test_nary_sum():
    H = H_upto(1)
    one = H.from_rf("1")
    S = nary_sum(H, [one, one, one])
    assert S.kind == "zeroball" and S.cut.c == G(1)
    S = nary_sum(H, [one, H.from_rf("x"), H.from_rf("x^2*(1+x)")])
    assert S.kind == "singleton" and S.witness == H.from_rf("1+x")
    with pytest.raises(ValueError):
        nary_sum(H, [one])


def test_ultrametric_d():
    H2, H0 = H_upto(2), H_upto(0)
    a = H2.from_rf("1")
    assert ultrametric_d(H2, a, a) is INF
    assert ultrametric_d(H2, a, H2.from_rf("1+x")) == G(1)
    assert ultrametric_d(H0, H0.from_rf("1"), H0.from_rf("2")) == G(0)
    with pytest.raises(ElementsFromDifferentHandles):
        ultrametric_d(H2, a, H0.from_rf("1"))


# ------------------------------------------------------------- properties

seeds = st.integers(0, 10**6)
levels = st.integers(0, 3)


@given(seeds, levels)
def test_binary_sum_shape(seed, n):
    H = H_upto(n)
    rng = random.Random(seed)
    x, y = H.sample_pair(rng)
    S = H.add(x, y)
    if H.is_zero(x) or H.is_zero(y):
        assert S.kind == "singleton"
        return
    m = min(H.val(x), H.val(y))
    assert (S.kind == "zeroball") == (y == H.neg(x))
    if S.kind != "singleton":
        assert S.cut.c == m + G(n)
    z = H.sample_member(S, rng)
    assert H.val(z) >= m


@given(seeds, levels)
def test_ball_membership_is_representative_independent(seed, n):
    H = H_upto(n)
    rng = random.Random(seed)
    x, y = H.sample_pair(rng)
    S = H.add(x, y)
    if S.kind != "ball":
        return
    w = H.sample_member(S, rng)
    S2 = Ball(w, S.cut)
    for _ in range(20):
        p = H.probe(S, rng)
        assert H.member(S, p) == H.member(S2, p)


@given(seeds, levels)
def test_absorbing_sum_is_singleton(seed, n):
    H = H_upto(n)
    rng = random.Random(seed)
    x, y = H.sample_pair(rng)
    S = H.add(x, y)
    if H.member(S, x):
        assert S.kind == "singleton" and S.witness == x


@given(seeds, levels)
def test_class_of_sum_lies_in_sum_of_classes(seed, n):
    H = H_upto(n)
    rng = random.Random(seed)
    a, b = H.random_series(rng), H.random_series(rng)
    s = a + b
    z = H.zero if s.is_exact_zero() else H.theta(s)
    assert H.member(H.add(H.theta(a), H.theta(b)), z)


@given(seeds, st.integers(2, 5))
def test_nary_sum_members_dominate_min_value(seed, k):
    H = H_upto(1)
    rng = random.Random(seed)
    xs = [H.sample(rng, nonzero=True) for _ in range(k)]
    S = nary_sum(H, xs)
    z = H.sample_member(S, rng)
    assert H.val(z) >= min(H.val(x) for x in xs)
