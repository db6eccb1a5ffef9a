import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from valhyper.errors import DoublingUnavailable, HypothesisMismatch
from valhyper.hahn import hs_val, rv_project
from valhyper.ogroup import ConvexSubgroup, quotient_map
from valhyper.reconstruct import (
    default_delta,
    paper_example_iso,
    reconstruct,
    sample_pair,
    verify_theorem,
)
from valhyper.tower import builtin_tower

P0N = builtin_tower("paper-0n")
R0N = reconstruct(P0N, ConvexSubgroup(1, 2), budget=3, samples=60)


def failing(reports):
    return [(r.axiom, r.witness) for r in reports if not r.ok]


def test_0n_tower_reconstruction():
    assert R0N.ok, failing(R0N.reports)
    assert R0N.sort.n == 1 and R0N.field.n == 1
    d = R0N.to_json()
    assert set(d) == {"pipeline", "reports", "seed", "budget"}
    json.dumps(d)


def test_rank_one_reconstruction():
    T = builtin_tower("f3")
    assert default_delta(T) == ConvexSubgroup(1, 1)
    R = reconstruct(T, budget=3, samples=40)
    assert R.ok and R.sort.n == 0
    assert not failing(verify_theorem(R, range(4), 40))


def test_rejections():
    with pytest.raises(DoublingUnavailable):
        reconstruct(builtin_tower("paper-1m"))
    with pytest.raises(HypothesisMismatch):
        reconstruct(P0N, ConvexSubgroup(2, 2))


def test_verify_theorem_on_0n_tower():
    assert not failing(verify_theorem(R0N, range(3), 40))


def test_planted_skip_w_breaks_value_preservation():
    R = reconstruct(P0N, ConvexSubgroup(1, 2), budget=3, samples=30, defect="skip-w")
    bad = {a for a, _ in failing(verify_theorem(R, range(2), 30))}
    assert "[0] value" in bad


def test_explicit_example_map():
    assert not failing(paper_example_iso(4, 60))
    assert not failing(paper_example_iso(1, 30))


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_end_to_end_valuation(seed):
    rng = random.Random(seed)
    A, B = sample_pair(R0N, rng)
    assert rv_project(A * B) == R0N.sort.mul(rv_project(A), rv_project(B))
    C = A + B
    if not C.is_exact_zero():
        assert R0N.val(C) >= min(R0N.val(A), R0N.val(B))
        assert quotient_map(R0N.val(C), R0N.delta) == hs_val(C)
