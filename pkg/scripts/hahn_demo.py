"""Hahn series over a sequence structure: inverses, square roots by
Hensel lifting, and the rv round trip.

    python scripts/hahn_demo.py --sort q,z --prec 6
"""
import argparse
from dataclasses import dataclass

from valhyper.hahn import HahnField, check_rv_round_trip, eval_expr, fmt_poly, hs_inverse, sqrt_series
from valhyper.hyperfield import Sampled
from valhyper.rvsort import sequence_structure


@dataclass
class Config:
    sort: str = "q,z"
    prec: int = 6
    samples: int = 300
    seed: int = 0


def run(cfg: Config) -> int:
    HF = HahnField(sequence_structure(cfg.sort))
    N = (0,) * (HF.n - 1) + (cfg.prec,)
    t = HF.t((0,) * (HF.n - 1) + (1,))
    trace = []
    inv = hs_inverse(HF.one - t, N, trace)
    print("1/(1-t)      =", fmt_poly(inv))
    print("  refinement :", ", ".join(map(str, trace)))
    print("sqrt(1+t)    =", fmt_poly(sqrt_series(HF.one + t, N)))
    print("eval (1+t)^2/(1-t) =", fmt_poly(eval_expr("(1+t)^2/(1-t)", HF, N)))
    reps = check_rv_round_trip(HF.R, Sampled(cfg.samples, seed=cfg.seed))
    for r in reps:
        print(f"  {r.axiom:<20} {r.status.upper()}")
    return sum(not r.ok for r in reps)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sort", default=Config.sort)
    ap.add_argument("--prec", type=int, default=Config.prec)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    raise SystemExit(1 if run(Config(a.sort, a.prec, a.samples, a.seed)) else 0)


if __name__ == "__main__":
    main()
