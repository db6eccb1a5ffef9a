import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from valhyper.errors import FNotField, GuardViolation, NotStringent
from valhyper.hyperfield import Sampled, krasner_K, krasner_S, quotient_of
from valhyper.ogroup import INF, G, Cut, Segment
from valhyper.rvsort import (
    HandleRV,
    RVElem,
    SequenceStructure,
    all_bracketings,
    boxplus,
    check_rv_axioms,
    derive_rv8_9_10,
    from_stringent,
    oplus,
    oplus_n,
    recover_gamma,
    sequence_structure,
    to_stringent,
)
from valhyper.groundfield import ground_field

QZ = sequence_structure("q,z")
F3Z2 = sequence_structure("f3,z2")


def el(S, f, *g):
    return S.make(Fraction(f) if S is QZ else f, G(*g))


def status(reports):
    return {r.axiom: r.status for r in reports}


def test_boxplus_cases():
    a = el(QZ, 1, 0)
    assert boxplus(QZ, a, a).witness == el(QZ, 2, 0)
    assert boxplus(QZ, a, el(QZ, 5, 3)).witness == a
    Z = boxplus(QZ, a, el(QZ, -1, 0))
    assert Z.kind == "zeroball" and Z.cut == Cut(G(0), 0, 1)


def test_oplus_cases():
    assert oplus(QZ, el(QZ, 1, 0), el(QZ, -1, 0)) == QZ.zero
    assert oplus(QZ, el(QZ, 2, 0), el(QZ, 3, 0)) == el(QZ, 5, 0)
    assert oplus(QZ, el(QZ, 1, 2), el(QZ, 1, 0)) == el(QZ, 1, 0)
    assert QZ.fmt(el(QZ, 3, 2)) == "(3; 2)" and QZ.fmt(QZ.zero) == "0"


@pytest.mark.parametrize("S", [QZ, F3Z2], ids=["Q,Z", "F3,Z2"])
def test_sequence_structures_pass(S):
    scope = Sampled(1000, seed=1)
    assert all(r.ok for r in check_rv_axioms(S, scope))
    assert all(r.ok for r in derive_rv8_9_10(S, scope))


class SkewAssoc(SequenceStructure):
    """Planted: same-value sums are doubled, so oplus stops associating."""

    def oplus(self, a, b):
        s = super().oplus(a, b)
        if a.f is not None and b.f is not None and a.g == b.g and s.f is not None:
            return RVElem(2 * s.f, s.g)
        return s


class NonUniform(SequenceStructure):
    """Planted: a larger summand with residue 2 is not absorbed."""

    def oplus(self, a, b):
        if a.f is not None and b.f is not None and a.g != b.g:
            hi = a if a.g > b.g else b
            if hi.f == 2:
                return hi
        return super().oplus(a, b)


def test_planted_rv3_defect():
    S = SkewAssoc(QZ.F, 1, "skew")
    (r,) = [r for r in check_rv_axioms(S, Sampled(500)) if r.axiom == "RV3"]
    assert r.status == "fail" and "(a+b)+c" in r.witness


def test_planted_rv7_defect_breaks_order():
    S = NonUniform(QZ.F, 1, "nonuniform")
    reps = status(check_rv_axioms(S, Sampled(500)) + derive_rv8_9_10(S, Sampled(500)))
    assert reps["RV7"] == "fail" and reps["RV10"] == "fail"


def test_krasner_as_rv_sort_fails_field_axiom():
    assert status(check_rv_axioms(HandleRV(krasner_K()), Sampled(50)))["RV6"] == "fail"


def test_recover_gamma():
    H = to_stringent(QZ)
    Gm = recover_gamma(H)
    rng = random.Random(2)
    for _ in range(200):
        x, y = H.sample(rng, True), H.sample(rng, True)
        assert Gm.same(x, y) == (H.val(x) == H.val(y))
        assert Gm.lt(x, y) == (H.val(x) < H.val(y))
    assert len(recover_gamma(krasner_S()).classes()) == 1
    with pytest.raises(NotStringent):
        recover_gamma(quotient_of(ground_field("f3"), Segment.upto(G(1))))


@pytest.mark.parametrize("spec", ["q,z", "f5,z2"])
def test_round_trip_is_identity(spec):
    S = sequence_structure(spec)
    H = to_stringent(S)
    R = from_stringent(H)
    assert R.n == S.n
    rng = random.Random(3)
    for _ in range(200):
        a = S.sample(rng)
        b = R.split(H.wrap(a))
        if a.f is None:
            assert b == R.zero
            continue
        assert H.unwrap(b.f) == S.iota(a.f) and b.g == a.g
        assert R.unsplit(b) == H.wrap(a)


def test_from_sign_hyperfield_is_not_a_field():
    with pytest.raises(FNotField):
        from_stringent(krasner_S())


def test_guarded_oplus_refuses_mixed_values():
    a, b, c = el(QZ, 1, 0), el(QZ, 1, 0), el(QZ, 1, 1)
    with pytest.raises(GuardViolation):
        oplus_n(QZ, [a, b, c])
    assert oplus_n(QZ, [a, b, c], guard=False) == el(QZ, 2, 0)


# ------------------------------------------------------------- properties

residues = st.integers(-3, 3).filter(bool)
exps = st.integers(-2, 2)
elems = st.one_of(st.just(None), st.tuples(residues, exps)).map(lambda t: QZ.zero if t is None else el(QZ, *t))


@given(elems, elems)
def test_oplus_agrees_with_boxplus(a, b):
    B = boxplus(QZ, a, b)
    s = oplus(QZ, a, b)
    if B.kind == "singleton":
        assert s == B.witness
    else:
        assert B.kind == "zeroball" and s == QZ.zero and b == QZ.neg(a)


@given(elems, elems)
def test_oplus_value_bound(a, b):
    s = oplus(QZ, a, b)
    va, vb = QZ.nu(a), QZ.nu(b)
    vs = INF if s.f is None else QZ.nu(s)
    assert vs >= min(va, vb)
    if va != vb:
        assert vs == min(va, vb)


@given(st.lists(residues, min_size=2, max_size=5), exps)
def test_guarded_sum_of_equal_values_ignores_brackets(fs, g):
    xs = [el(QZ, f, g) for f in fs]
    want = oplus_n(QZ, xs)
    for perm in itertools.permutations(xs):
        assert all_bracketings(QZ, perm) == {want}


@given(st.lists(st.tuples(residues, exps), min_size=2, max_size=5, unique_by=lambda t: t[1]))
def test_guarded_sum_of_distinct_values_ignores_brackets(ts):
    xs = [el(QZ, f, g) for f, g in ts]
    want = oplus_n(QZ, xs)
    assert want == min(xs, key=lambda x: x.g)
    for perm in itertools.permutations(xs):
        assert all_bracketings(QZ, perm) == {want}
