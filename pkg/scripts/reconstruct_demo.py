"""End to end: tower -> limit -> sequence structure -> Hahn field, then
check that the field's quotient hyperfields match the tower stages.

    python scripts/reconstruct_demo.py --tower paper-0n --samples 60
"""
import argparse
import json
from dataclasses import dataclass

from valhyper.ogroup import ConvexSubgroup
from valhyper.reconstruct import default_delta, paper_example_iso, reconstruct, verify_theorem
from valhyper.tower import builtin_tower


@dataclass
class Config:
    tower: str = "paper-0n"
    delta: int | None = None
    budget: int = 3
    samples: int = 60
    seed: int = 0
    defect: str | None = None
    example: bool = True


def run(cfg: Config) -> int:
    T = builtin_tower(cfg.tower)
    delta = default_delta(T) if cfg.delta is None else ConvexSubgroup(cfg.delta, T.K.n)
    R = reconstruct(T, delta, budget=cfg.budget, samples=cfg.samples, seed=cfg.seed, defect=cfg.defect)
    for step in R.pipeline():
        print(json.dumps(step, default=str))
    reps = R.reports + verify_theorem(R, range(cfg.budget + 1), cfg.samples, cfg.seed)
    if cfg.example:
        reps += paper_example_iso(4, cfg.samples, cfg.seed)
    bad = [r for r in reps if not r.ok]
    for r in reps:
        print(f"  {r.axiom:<28} {r.status.upper()}" + (f"  {r.witness}" if not r.ok else ""))
    print(f"{len(reps) - len(bad)}/{len(reps)} checks pass")
    return len(bad)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tower", default=Config.tower)
    ap.add_argument("--delta", type=int, default=Config.delta, help="k for the convex subgroup; omit for the default")
    ap.add_argument("--budget", type=int, default=Config.budget)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--defect", choices=["skip-w"])
    ap.add_argument("--no-example", dest="example", action="store_false")
    a = ap.parse_args()
    cfg = Config(a.tower, a.delta, a.budget, a.samples, a.seed, a.defect, a.example)
    raise SystemExit(1 if run(cfg) else 0)


if __name__ == "__main__":
    main()
