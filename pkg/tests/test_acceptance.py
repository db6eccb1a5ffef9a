"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from math import factorial

import pytest

from valhyper.groundfield import PrimeField, ground_field
from valhyper.hahn import HahnField, check_rv_round_trip, hs_inverse, sqrt_series
from valhyper.hyperfield import (
    Exhaustive,
    Sampled,
    check_canonical_hypergroup,
    check_hyperfield,
    check_val_lemma,
    check_valuation,
    factor_hyperfield,
    field_as_hyperfield,
    krasner_K,
    krasner_S,
    quotient_of,
    sample_pairs,
)
from valhyper.ogroup import G, ConvexSubgroup, Segment, seg_double_leq
from valhyper.reconstruct import paper_example_iso, reconstruct, verify_theorem
from valhyper.rvsort import check_rv_axioms, derive_rv8_9_10, from_stringent, sequence_structure, to_stringent
from valhyper.tower import (
    builtin_tower,
    check_claim1,
    check_isometric,
    detect_empty_sum,
    induced_iso,
    limit_factor_iso,
    limit_hyperfield,
    paper_pair,
)


@contextmanager
def criterion(capsys, n, title, limit=None):
    t = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t
        if ok and limit is not None and dt >= limit:
            ok = False
            title += f" (too slow: limit {limit}s)"
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} [{dt:.1f}s] {title}")
    if limit is not None:
        assert dt < limit, f"criterion {n} took {dt:.1f}s"


def bad(reports):
    return [(r.axiom, r.witness) for r in reports if r.status == "fail"]


def test_criterion_1_exhaustive_axioms(capsys):
    with criterion(capsys, 1, "exhaustive axiom suite on finite hyperfields", limit=1.0):
        for H in (krasner_K(), krasner_S()):
            assert not bad(check_canonical_hypergroup(H, Exhaustive))
            assert not bad(check_hyperfield(H, Exhaustive))
        F5, F7 = field_as_hyperfield(PrimeField(5)), field_as_hyperfield(PrimeField(7))
        assert not bad(check_hyperfield(factor_hyperfield(F5, [1, 4])))
        assert not bad(check_hyperfield(factor_hyperfield(F7, [1, 6])))
        q = factor_hyperfield(F7, [1, 2, 4])
        assert not bad(check_hyperfield(q))
        fails = bad(check_valuation(q.with_trivial_valuation()))
        assert fails == [("V4", "[1]+[1] ⊇ {[1],[3]}")]


def test_criterion_2_quotients(capsys):
    with criterion(capsys, 2, "H_UpTo(n)(F3((x))), n <= 3, 10^4 samples", limit=10.0):
        F3 = ground_field("f3")
        for n in range(4):
            H = quotient_of(F3, Segment.upto(G(n)))
            pairs = sample_pairs(H, Sampled(10_000, seed=n))
            assert not bad(check_valuation(H, Sampled(10_000, seed=n), pairs))
            assert not bad(check_val_lemma(H, Sampled(10_000, seed=n), pairs))


def test_criterion_3_isometric_tower(capsys):
    with criterion(capsys, 3, "canonical maps isometric, induced isomorphisms, stages <= 4"):
        for name in ("f3", "paper-0n"):
            T = builtin_tower(name)
            for j in range(5):
                for i in range(j):
                    th = T.map(j, i)
                    reps = check_isometric(th, Sampled(100, seed=10 * j + i))
                    assert not bad(reps), (name, j, i)
                    assert {r.axiom for r in reps} >= {"IH1", "IH2'", "IH3", "IH2", "IH2<=>IH2'"}
                    assert induced_iso(th, Sampled(100, seed=j + i)).ok, (name, j, i)


def test_criterion_4_inverse_limit(capsys):
    with criterion(capsys, 4, "inverse limit of the (0,n) tower", limit=60.0):
        L = limit_hyperfield(builtin_tower("paper-0n"), budget=4)
        assert not bad(check_hyperfield(L, Sampled(150, seed=1)))
        assert not bad(check_valuation(L, Sampled(300, seed=2)))
        assert not bad(check_val_lemma(L, Sampled(300, seed=3)))
        assert not bad(check_claim1(L, Sampled(1000, seed=4), stages=3))
        for i in range(5):
            assert limit_factor_iso(L, i, Sampled(100, seed=i)).ok, i


def test_criterion_5_field_mode(capsys):
    with criterion(capsys, 5, "field mode over F3((x)) matches Laurent arithmetic"):
        L = limit_hyperfield(builtin_tower("f3"), budget=6)
        assert L.field_mode
        T, rng = L.T, random.Random(5)
        for _ in range(1000):
            a, b = L._sampler.random_series(rng), L._sampler.random_series(rng)
            S = L.add(L.from_ground(a), L.from_ground(b))
            assert S.kind == "singleton"
            s = a + b
            for i in range(L.budget + 1):
                H = T.stage(i)
                want = H.zero if s.is_exact_zero() else H.theta(s)
                assert S.witness.payload.at(i) == want


def test_criterion_6_negative_example(capsys):
    with criterion(capsys, 6, "the (1,m) tower is rejected with an emptiness witness"):
        T = builtin_tower("paper-1m")
        assert T.doubling is None
        assert not any(seg_double_leq(T.rho(i), T.rho(j)) for i in range(9) for j in range(i, 9))
        a, b = paper_pair(T.K)
        rep = detect_empty_sum(T, a, b, 3)
        assert rep.status == "empty", rep.to_json()


def test_criterion_7_rv_sorts(capsys):
    with criterion(capsys, 7, "RV axioms for three sorts, stringent round trip"):
        L = limit_hyperfield(builtin_tower("paper-0n"), budget=4)
        sorts = [sequence_structure("q,z"), sequence_structure("f3,z2"), from_stringent(L, delta=ConvexSubgroup(1, 2))]
        for R in sorts:
            n = 200 if R is sorts[2] else 1000
            assert not bad(check_rv_axioms(R, Sampled(n, seed=7))), R
            assert not bad(derive_rv8_9_10(R, Sampled(n, seed=8))), R
        for spec in ("q,z", "f3,z2"):
            S = sequence_structure(spec)
            H = to_stringent(S)
            back = from_stringent(H)
            rng = random.Random(9)
            for _ in range(1000):
                a = S.sample(rng)
                s = back.split(H.wrap(a))
                assert (s.f is None and a.f is None) or (H.unwrap(s.f) == S.iota(a.f) and s.g == a.g)


def test_criterion_8_hahn_field(capsys):
    with criterion(capsys, 8, "Hahn inverse, rv round trip, Hensel lift"):
        HQ = HahnField(sequence_structure("q,z"))
        rng = random.Random(8)
        for _ in range(100):
            a = HQ.sample(rng, length=4, width=3)
            c = HQ.one - a * hs_inverse(a, (10,))
            assert c.is_exact_zero() or (all(e > G(10) for e, _ in c.terms) and (c.prec is None or c.prec > G(10)))
        L = limit_hyperfield(builtin_tower("paper-0n"), budget=4)
        for R in (HQ.R, sequence_structure("f3,z2"), from_stringent(L, delta=ConvexSubgroup(1, 2))):
            assert not bad(check_rv_round_trip(R, Sampled(100, seed=3))), R
        t = HQ.t((1,))
        r = sqrt_series(HQ.one + t, (5,))
        for k in range(6):
            q = Fraction(1)
            for j in range(k):
                q *= Fraction(1, 2) - j
            q /= factorial(k)
            assert r.coeff(G(k)) == HQ.R.make(q, G(k))


def test_criterion_9_main_theorem(capsys):
    with criterion(capsys, 9, "reconstruction of the (0,n) tower end to end", limit=120.0):
        R = reconstruct(builtin_tower("paper-0n"), ConvexSubgroup(1, 2), budget=3, samples=100)
        assert not bad(R.reports)
        assert not bad(verify_theorem(R, range(4), 100))
        assert not bad(paper_example_iso(4, 100))
