import random

import pytest
from hypothesis import given, strategies as st

from valhyper.errors import DoublingUnavailable, SegmentsNotIncreasing, Undetermined
from valhyper.groundfield import ground_field
from valhyper.hyperfield import Sampled
from valhyper.ogroup import INF, G, Segment
from valhyper.tower import (
    IsometricMap,
    builtin_tower,
    canonical_tower,
    check_claim1,
    check_isometric,
    detect_empty_sum,
    identity_map,
    induced_iso,
    limit_d,
    limit_factor_iso,
    limit_hyperfield,
    limit_val,
    paper_pair,
    triple_sum_resolve,
)

F3T = builtin_tower("f3")
P0N = builtin_tower("paper-0n")
L0N = limit_hyperfield(P0N, budget=4)


def all_ok(reports):
    return all(r.ok for r in reports)


def test_canonical_maps_are_isometric():
    assert all_ok(check_isometric(F3T.map(2, 1), Sampled(100)))
    assert all_ok(check_isometric(identity_map(F3T.stage(1)), Sampled(50)))
    assert F3T.check_composition(Sampled(10)).ok


def test_planted_scaling_breaks_value_preservation():
    H2, H1 = F3T.stage(2), F3T.stage(1)
    x = H1.monomial(G(1))
    bad = IsometricMap(H2, H1, lambda a: H1.mul(F3T.theta(2, 1, a), x), name="scaled")
    st_ = {r.axiom: r.status for r in check_isometric(bad, Sampled(50))}
    assert st_["IH3"] == "fail"


def test_induced_isomorphisms():
    assert induced_iso(F3T.map(2, 1), Sampled(100)).ok
    assert induced_iso(identity_map(F3T.stage(2)), Sampled(30)).ok
    assert induced_iso(F3T.map(1, 1), Sampled(30)).ok


def test_canonical_tower_rejects_shrinking_segments():
    K = ground_field("f3")
    with pytest.raises(SegmentsNotIncreasing):
        canonical_tower(K, lambda i: Segment.upto(G(5 - i)))


def test_limit_of_0n_tower():
    L = L0N
    assert L.norm == Segment.cone(1, 2) and not L.field_mode
    x = L.from_rf("x")
    assert limit_val(L, L.one) == G(0, 0)
    assert limit_val(L, x) == G(0, 1)
    S = L.add(L.one, x)
    assert S.kind == "singleton"
    assert limit_d(L, L.one, L.from_ground(L.K.one())) is INF
    # without ground series the distance is only known up to the budget
    c = [L.from_coeffs((0, 0), lambda k: int(k == 0)) for _ in range(2)]
    with pytest.raises(Undetermined):
        limit_d(L, *c)


def test_field_mode_tower():
    L = limit_hyperfield(builtin_tower("paper-n0"), budget=4)
    assert L.field_mode
    S = L.add(L.one, L.neg(L.one))
    assert S.kind == "singleton" and L.is_zero(S.witness)
    rng = random.Random(1)
    for _ in range(50):
        a, b = L._sampler.random_series(rng), L._sampler.random_series(rng)
        S = L.add(L.from_ground(a), L.from_ground(b))
        s = a + b
        want = L.zero if s.is_exact_zero() else L.from_ground(s)
        assert S.kind == "singleton" and S.witness == want


def test_doubling_failure_has_emptiness_witness():
    T = builtin_tower("paper-1m")
    with pytest.raises(DoublingUnavailable):
        limit_hyperfield(T)
    with pytest.raises(DoublingUnavailable) as e:
        limit_hyperfield(T, witness=True)
    assert e.value.diagnostic["emptiness"]["status"] == "empty"


def test_detect_empty_sum():
    T = builtin_tower("paper-1m")
    a, b = paper_pair(T.K)
    rep = detect_empty_sum(T, a, b, 3)
    assert rep.status == "empty" and len(rep.stages) == 2
    one = lambda k: T.K.one()  # noqa: E731
    assert detect_empty_sum(T, one, one, 3).status == "nonempty"
    assert detect_empty_sum(T, a, b, 0).status == "inconclusive"


def test_triple_sum_examples():
    L = L0N
    one, m1, x = L.one, L.neg(L.one), L.from_rf("x")
    assert triple_sum_resolve(L, one, m1, L.zero).kind == "zeroball"
    S = triple_sum_resolve(L, one, one, one)
    assert S.kind == "singleton" and S.witness == L.from_rf("3")
    S = triple_sum_resolve(L, one, m1, x)
    assert S.kind == "singleton" and S.witness == x


@pytest.mark.parametrize("tower,i", [("paper-0n", 2), ("paper-0n", 0), ("f3", 3)])
def test_limit_factor_iso(tower, i):
    L = L0N if tower == "paper-0n" else limit_hyperfield(F3T, budget=5)
    assert limit_factor_iso(L, i, Sampled(100)).ok


def test_claim_uniqueness():
    assert all_ok(check_claim1(L0N, Sampled(150), stages=3))


def test_resolution_is_memoized():
    rng = random.Random(4)
    x, y = L0N.sample_pair(rng)
    S = L0N.add(x, y)
    if S.kind == "singleton":
        e = S.witness.payload
        assert e.at(2) is e.at(2)


# ------------------------------------------------------------- properties


@given(st.integers(0, 10**6))
def test_binary_sum_members_lie_in_stage_sums(seed):
    L = L0N
    rng = random.Random(seed)
    a, b = L.sample_pair(rng)
    S = L.add(a, b)
    if b == L.neg(a):
        assert S.kind in ("zeroball", "singleton") and L.member(S, L.zero)
        return
    assert S.kind == "singleton"
    m = S.witness
    for i in range(4):
        H = P0N.stage(i)
        assert H.member(H.add(a.payload.at(i), b.payload.at(i)), m.payload.at(i))
        for j in range(i, 4):
            assert P0N.theta(j, i, m.payload.at(j)) == m.payload.at(i)


@given(st.integers(0, 10**6))
def test_limit_sum_is_associative(seed):
    L = L0N
    rng = random.Random(seed)
    a, b, c = L.sample_triple(rng)
    ab, bc = L.add(a, b), L.add(b, c)
    if ab.kind != "singleton" or bc.kind != "singleton":
        return
    left, right = L.add(ab.witness, c), L.add(a, bc.witness)
    assert left.kind == right.kind
    if left.kind == "singleton":
        assert left.witness == right.witness
