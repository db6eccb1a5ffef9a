import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from valhyper.errors import IndistinguishableFromZero, MixedSorts, NewtonConditionFails
from valhyper.hahn import (
    HahnField,
    check_rv_round_trip,
    eval_expr,
    fmt_poly,
    fmt_sparse,
    from_json,
    hensel_lift,
    hs_inverse,
    hs_val,
    refinement_sign,
    rv_project,
    sqrt_series,
    to_json,
)
from valhyper.hyperfield import Sampled
from valhyper.ogroup import INF, G
from valhyper.rvsort import sequence_structure

HQ = HahnField(sequence_structure("q,z"))
H32 = HahnField(sequence_structure("f3,z2"))
t = HQ.t((1,))


def test_addition_examples():
    one = HQ.one
    assert one + HQ.zero == one
    s = HQ.make([((0,), HQ.R.iota(1))], prec=(4,)) + (-one)
    assert s.terms == () and s.prec == G(4)
    assert (one + t) + one == HQ.const(2) + t


def test_multiplication_examples():
    a = HQ.const(3) + t
    assert a * HQ.one == a
    assert (HQ.one + t) * (HQ.one - t) == HQ.one - t * t
    assert HQ.t((-1,)) * t == HQ.one


def test_valuation_and_rv():
    assert hs_val(HQ.one + t) == G(0)
    assert hs_val(HQ.zero) is INF
    with pytest.raises(IndistinguishableFromZero):
        hs_val(HQ.make([], prec=(3,)))
    assert rv_project(HQ.one + t) == HQ.R.iota(1)
    assert HQ.R.fmt(rv_project(HQ.const(3) * t * t + t * t * t * t * t)) == "(3; 2)"
    assert rv_project(HQ.zero) == HQ.R.zero


def test_inverse_examples():
    assert refinement_sign() == 1
    assert fmt_poly(hs_inverse(HQ.one - t, (3,))) == "1 + t + t^2 + t^3 + O(t^4)"
    assert hs_inverse(t, (3,)).terms == HQ.t((-1,)).terms
    trace = []
    b = hs_inverse(HQ.const(2) + t, (2,), trace)
    assert b.agrees_below(HQ.const(Fraction(1, 2)) - HQ.const(Fraction(1, 4)) * t + HQ.const(Fraction(1, 8)) * t * t, G(3))
    assert trace == [G(1), G(2)]


def test_hensel_examples():
    r = sqrt_series(HQ.one + t, (3,))
    assert fmt_poly(r) == "1 + 1/2*t - 1/8*t^2 + 1/16*t^3 + O(t^4)"
    a = HQ.const(5) + t * t
    assert hensel_lift([-a, HQ.one], a, (4,)) == a
    with pytest.raises(NewtonConditionFails):
        sqrt_series(t, (3,), HQ.zero)


def test_sqrt_matches_binomial_series():
    r = sqrt_series(HQ.one + t, (5,))
    for k in range(6):
        want = Fraction(1)
        for j in range(k):
            want *= Fraction(1, 2) - j
        want /= factorial(k)
        assert r.coeff(G(k)) == (HQ.R.make(want, G(k)) if want else HQ.R.zero)


def test_text_and_json():
    a = HQ.const(3) * t * t + t.truncate(None)
    assert fmt_sparse(a.truncate(G(5))) == "(1;1)*t^1 + (3;2)*t^2 + O(t^5)"
    assert from_json(HQ, to_json(a.truncate(G(5)))) == a.truncate(G(5))
    assert fmt_poly(eval_expr("1/(1-t)", HQ, (4,))) == "1 + t + t^2 + t^3 + O(t^4)"


def test_mixed_sorts_rejected():
    with pytest.raises(MixedSorts):
        HQ.one + H32.one


@pytest.mark.parametrize("spec", ["q,z", "f3,z2"])
def test_rv_round_trip(spec):
    assert all(r.ok for r in check_rv_round_trip(sequence_structure(spec), Sampled(300)))


# ------------------------------------------------------------- properties

fields = st.sampled_from([HQ, H32])
seeds = st.integers(0, 10**6)


def _series(H, seed, k=1):
    rng = random.Random(seed)
    return [H.sample(rng) for _ in range(k)]


def _above(x, bound):
    return x.is_exact_zero() or (x.terms[0][0] > bound if x.terms else x.prec > bound)


@given(fields, seeds, st.integers(0, 4))
def test_inverse_up_to_precision(H, seed, k):
    (a,) = _series(H, seed)
    N = G(*([0] * (H.n - 1) + [k]))
    b = hs_inverse(a, N)
    assert _above(H.one - a * b, N)


@given(fields, seeds, st.integers(0, 3))
def test_inverse_refinement_is_strict(H, seed, k):
    (a,) = _series(H, seed)
    trace = []
    hs_inverse(a, G(*([0] * (H.n - 1) + [k])), trace)
    assert all(x < y for x, y in zip(trace, trace[1:]))


@given(fields, seeds, st.integers(0, 3))
def test_inverse_precision_is_sound(H, seed, k):
    (a,) = _series(H, seed)
    N = G(*([0] * (H.n - 1) + [k]))
    lo, hi = hs_inverse(a, N), hs_inverse(a, N + G(*([0] * (H.n - 1) + [2])))
    if lo.is_exact:
        assert lo == hi
    else:
        assert lo.agrees_below(hi, lo.prec)


@given(fields, seeds)
def test_valuation_laws(H, seed):
    a, b = _series(H, seed, 2)
    assert hs_val(a * b) == hs_val(a) + hs_val(b)
    s = a + b
    if not s.is_exact_zero():
        assert hs_val(s) >= min(hs_val(a), hs_val(b))
        if hs_val(a) != hs_val(b):
            assert hs_val(s) == min(hs_val(a), hs_val(b))


@given(fields, seeds)
def test_ring_laws_on_exact_series(H, seed):
    a, b, c = _series(H, seed, 3)
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a and a + b == b + a
    assert a - a == H.zero
