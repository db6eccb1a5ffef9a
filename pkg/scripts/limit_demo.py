"""Inverse limits of towers of quotient hyperfields: build the limit of the
(0,n) tower, check it, and show why the (1,m) tower has no limit sum.

    python scripts/limit_demo.py --budget 4 --samples 200
"""
import argparse
import json
from dataclasses import dataclass

from valhyper.errors import DoublingUnavailable
from valhyper.hyperfield import Sampled, check_hyperfield, check_val_lemma, check_valuation
from valhyper.tower import (
    builtin_tower,
    check_claim1,
    detect_empty_sum,
    limit_factor_iso,
    limit_hyperfield,
    limit_val,
    paper_pair,
)


@dataclass
class Config:
    budget: int = 4
    samples: int = 200
    seed: int = 0


def summary(name, reports):
    bad = [r for r in reports if not r.ok]
    print(f"  {name:<18} {len(reports) - len(bad)}/{len(reports)} pass")
    for r in bad:
        print(f"    {r.axiom}: {r.witness}")
    return len(bad)


def run(cfg: Config) -> int:
    fails = 0
    T = builtin_tower("paper-0n")
    L = limit_hyperfield(T, budget=cfg.budget)
    print(f"limit of {T.name}: norm {L.norm}, field mode {L.field_mode}")
    x = L.from_rf("x")
    print(f"  v(1) = {limit_val(L, L.one)}, v(x) = {limit_val(L, x)}")
    print(f"  1 + x = {L.add(L.one, x).kind}, 1 + (-1) = {L.add(L.one, L.neg(L.one)).kind}")
    s = Sampled(cfg.samples, seed=cfg.seed)
    fails += summary("hyperfield", check_hyperfield(L, s))
    fails += summary("valuation", check_valuation(L, s))
    fails += summary("val lemma", check_val_lemma(L, s))
    fails += summary("unique sums", check_claim1(L, s, stages=3))
    for i in range(cfg.budget + 1):
        r = limit_factor_iso(L, i, s)
        print(f"  limit -> stage {i} factor iso: {'ok' if r.ok else 'FAIL'}")
        fails += not r.ok

    T = builtin_tower("paper-1m")
    print(f"\n{T.name}: doubling {T.doubling}")
    try:
        limit_hyperfield(T, witness=True)
    except DoublingUnavailable as e:
        print("  rejected:", e)
        print(json.dumps(e.diagnostic.get("emptiness"), indent=2, default=str))
    a, b = paper_pair(T.K)
    print("  emptiness check:", detect_empty_sum(T, a, b, 3).status)
    return fails


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=Config.budget)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    raise SystemExit(1 if run(Config(a.budget, a.samples, a.seed)) else 0)


if __name__ == "__main__":
    main()
