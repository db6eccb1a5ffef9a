"""Command line: axiom checks, the reconstruction pipeline, and an evaluator.

Exit codes: 0 pass, 1 mathematical failure (witness printed), 2 usage,
3 precision exhausted.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import asdict, dataclass

from .errors import DoublingUnavailable, ParseError, ValHyperError
from .groundfield import PrimeField, expand, ground_field, series_poly_str
from .hahn import HahnField, eval_expr, fmt_poly, hensel_lift, hs_inverse, check_rv_round_trip
from .hyperfield import (
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
from .ogroup import ConvexSubgroup, Segment, parse_elem, parse_segment
from .reconstruct import default_delta, paper_example_iso, reconstruct, verify_theorem
from .rvsort import HandleRV, check_rv_axioms, derive_rv8_9_10, from_stringent, sequence_structure
from .tower import (
    BUILTIN_TOWERS,
    IsometricMap,
    builtin_tower,
    check_isometric,
    induced_iso,
    limit_factor_iso,
    limit_hyperfield,
    tower_from_json,
)

FAMILIES = ("ch", "hf", "v", "ih", "rv")


@dataclass
class RunConfig:
    seed: int = 0
    budget: int = 3
    samples: int = 100
    precision: str | None = None
    output: str = "text"


class Usage(ValHyperError):
    exit_code = 2


def _config(args) -> RunConfig:
    return RunConfig(args.seed, args.budget, args.samples, args.prec, "json" if args.json else "text")


def _emit(cfg: RunConfig, payload: dict, lines: list[str]):
    if cfg.output == "json":
        print(json.dumps({"config": asdict(cfg), **payload}, sort_keys=True, ensure_ascii=False))
    else:
        print("\n".join(lines))


def _report_lines(reports) -> list[str]:
    out = []
    for r in reports:
        line = f"{r.axiom}: {r.status} ({r.trials} trials)"
        if r.witness is not None:
            line += f"  witness: {json.dumps(r.witness, ensure_ascii=False, default=str)}"
        if r.note:
            line += f"  [{r.note}]"
        out.append(line)
    return out


# ------------------------------------------------------------------ check


def _tower(spec: str):
    if spec in BUILTIN_TOWERS:
        return builtin_tower(spec)
    if os.path.exists(spec):
        with open(spec) as fh:
            return tower_from_json(fh.read())
    raise Usage(f"unknown tower {spec!r}: use {', '.join(BUILTIN_TOWERS)} or a JSON file")


def _structure(words: list[str], args):
    """Parse a structure selector; returns (kind, object)."""
    if not words:
        raise Usage("missing structure")
    head, rest = words[0], words[1:]
    need = {"k": 0, "s": 0, "fq-factor": 2, "quotient": 2, "rv": 2, "limit": 1}
    if head not in need:
        raise Usage(f"unknown structure {head!r}; choose one of {', '.join(need)}")
    if len(rest) != need[head]:
        raise Usage(f"{head} takes {need[head]} argument(s)")
    if head == "k":
        return "table", krasner_K()
    if head == "s":
        return "table", krasner_S()
    if head == "fq-factor":
        p = int(rest[0])
        F = field_as_hyperfield(PrimeField(p))
        H = factor_hyperfield(F, [int(t) for t in rest[1].split(",")])
        if args.trivial_valuation:
            H = H.with_trivial_valuation()
        return "table", H
    if head == "quotient":
        K = ground_field(rest[0])
        return "quotient", quotient_of(K, parse_segment(rest[1], K.n))
    if head == "rv":
        return "sort", sequence_structure(f"{rest[0]},{rest[1]}")
    T = _tower(rest[0])
    return "limit", (T, limit_hyperfield(T, budget=args.budget, witness=True))


def _rv_sort(kind, obj, args):
    if kind == "sort":
        return obj
    if kind == "table":
        return HandleRV(obj)
    if kind == "limit":
        T, L = obj
        return from_stringent(L, scope=Sampled(50, args.seed), delta=default_delta(T))
    H = obj
    if H.norm.kind == "upto":
        raise Usage("H_rho(K) is stringent only when rho is the positive part of a convex subgroup")
    k = 0 if H.norm.kind == "zero" else H.norm.k
    return from_stringent(H, scope=Sampled(50, args.seed), delta=ConvexSubgroup(k, H.n) if k else None)


def cmd_check(args) -> int:
    cfg = _config(args)
    *words, fam = args.target
    if fam not in FAMILIES:
        raise Usage(f"the last argument must be an axiom family ({', '.join(FAMILIES)})")
    kind, obj = _structure(words, args)
    scope = Sampled(args.samples, args.seed)
    H = obj[1] if kind == "limit" else obj
    if fam in ("ch", "hf", "v") and kind == "sort":
        raise Usage("use family 'rv' for an RV-sort")
    finite = kind == "table"
    sc = Exhaustive if finite else scope
    if fam == "ch":
        reports = check_canonical_hypergroup(H, sc)
    elif fam == "hf":
        reports = check_hyperfield(H, sc)
    elif fam == "v":
        pairs = None if finite else sample_pairs(H, scope)
        reports = check_valuation(H, sc, pairs) + check_val_lemma(H, sc, pairs)
    elif fam == "ih":
        if kind == "limit":
            reports = []
            for i in range(args.budget + 1):
                iso = limit_factor_iso(H, i, scope)
                reports += [_tag(r, f"theta[{i}] ") for r in iso.reports]
        elif kind == "quotient":
            K = H.K
            src = quotient_of(K, Segment.zero(K.n))
            th = IsometricMap(src, H, lambda x: H.theta(src.rep(x)), lambda t: src.theta(H.rep(t)), name="theta")
            reports = check_isometric(th, scope) + induced_iso(th, scope).reports
        else:
            raise Usage("family 'ih' needs a quotient or a limit")
    else:
        R = _rv_sort(kind, obj, args)
        rsc = Exhaustive if R.finite else scope
        if R.finite:
            rsc = Sampled(args.samples, args.seed)
        reports = check_rv_axioms(R, rsc) + derive_rv8_9_10(R, rsc)
        if kind in ("sort", "limit", "quotient"):
            reports += check_rv_round_trip(R, scope)
    ok = all(r.ok for r in reports)
    name = getattr(H, "hid", str(H))
    lines = [f"{name} [{fam}]"] + _report_lines(reports) + [("PASS" if ok else "FAIL")]
    _emit(cfg, {"command": "check", "structure": words, "family": fam, "reports": [r.to_json() for r in reports], "ok": ok}, lines)
    return 0 if ok else 1


def _tag(r, prefix):
    r.axiom = prefix + r.axiom
    return r


# ------------------------------------------------------------ reconstruct


def cmd_reconstruct(args) -> int:
    cfg = _config(args)
    T = _tower(args.tower)
    delta = ConvexSubgroup(args.delta, T.K.n) if args.delta is not None else None
    try:
        R = reconstruct(T, delta, args.budget, args.samples, args.seed, args.defect)
    except DoublingUnavailable as e:
        diag = e.diagnostic or {}
        lines = [f"rejected: {e}"]
        em = diag.get("emptiness")
        if em:
            lines.append(f"emptiness: {em['status']} at stages {em.get('stages')} (m_max={em['m_max']})")
            if em.get("witness"):
                lines += [f"  {k}: {v}" for k, v in em["witness"].items()]
        _emit(cfg, {"command": "reconstruct", "rejected": str(e), "diagnostic": diag, "ok": False}, lines)
        return 1
    reports = list(R.reports)
    reports += verify_theorem(R, range(args.budget + 1), args.samples, args.seed)
    if args.example:
        reports += [_tag(r, "example ") for r in paper_example_iso(args.budget + 1, args.samples, args.seed)]
    ok = all(r.ok for r in reports)
    payload = R.to_json()
    payload["reports"] = [r.to_json() for r in reports]
    payload.update({"command": "reconstruct", "ok": ok, "field_mode": R.limit.field_mode})
    lines = [f"{p['step']}: " + ", ".join(f"{k}={v}" for k, v in p.items() if k != "step") for p in R.pipeline()]
    lines += _report_lines(reports) + ["PASS" if ok else "FAIL"]
    _emit(cfg, payload, lines)
    return 0 if ok else 1


# ------------------------------------------------------------------ eval


_CALL = re.compile(r"^\s*(inv|sqrt)\s*\((.*);\s*([^;()]*|\(.*\))\s*\)\s*$")


def _groups(text: str) -> list[str]:
    """Top-level parenthesized groups in order."""
    out, depth, start = [], 0, None
    for i, ch in enumerate(text):
        if ch == "(":
            if depth == 0:
                start = i + 1
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ')'", i)
            if depth == 0:
                out.append(text[start:i])
    if depth:
        raise ParseError("unbalanced '('", len(text))
    return out


def _eval_hyper(spec: str, query: str):
    m = re.match(r"^\s*h_rho\(\s*(\w+)\s*,\s*(.+)\)\s*$", spec)
    if not m:
        raise Usage(f"expected h_rho(<ground>,<segment>), got {spec!r}")
    K = ground_field(m.group(1))
    H = quotient_of(K, parse_segment(m.group(2), K.n))
    q = query.strip().replace("−", "-")
    word, _, body = q.partition(" ")
    if word == "member":
        if "∋" in body:
            lhs, rhs = body.split("∋")
        elif " contains " in body:
            lhs, rhs = body.split(" contains ")
        else:
            raise Usage("member queries look like 'member (a)+(b) ∋ (c)'")
        xs = [H.from_rf(g) for g in _groups(lhs)]
        z = H.from_rf(_groups(rhs)[0])
        S = _nary(H, xs)
        return H.member(S, z), "true" if H.member(S, z) else "false"
    if word == "sum":
        S = _nary(H, [H.from_rf(g) for g in _groups(body)])
        return H.fmt_set(S), H.fmt_set(S)
    if word == "val":
        v = H.val(H.from_rf(_groups(body)[0]))
        return repr(v), repr(v)
    raise Usage(f"unknown query {word!r} (member, sum, val)")


def _nary(H, xs):
    from .hyperfield import nary_sum

    return nary_sum(H, xs)


def _eval_rv(spec: str, expr: str, prec):
    H = HahnField(sequence_structure(spec))
    m = _CALL.match(expr)
    if m:
        fn, body, t = m.groups()
        target = parse_elem(t, H.n)
        a = eval_expr(body, H, prec or _default_prec(H, target))
        if fn == "inv":
            return fmt_poly(hs_inverse(a, target))
        return fmt_poly(hensel_lift([-a, H.zero, H.one], H.one, target))
    if prec is None:
        raise Usage("--prec is needed for expressions that divide")
    return fmt_poly(eval_expr(expr, H, prec))


def _default_prec(H, target):
    return target + H.eps * (abs(target[-1]) + 8)


def cmd_eval(args) -> int:
    cfg = _config(args)
    if args.ground:
        K = ground_field(args.ground)
        if not args.prec:
            raise Usage("--prec is required with --ground")
        s = expand(args.expr[0], parse_elem(args.prec, K.n), K)
        value, text = series_poly_str(s), series_poly_str(s)
    elif args.rv:
        prec = None
        if args.prec:
            prec = parse_elem(args.prec)
        text = _eval_rv(args.rv, args.expr[0], prec)
        value = text
    elif args.hyper:
        value, text = _eval_hyper(args.hyper, " ".join(args.expr))
    else:
        raise Usage("choose one of --ground, --rv, --hyper")
    _emit(cfg, {"command": "eval", "expr": args.expr, "value": value}, [text])
    return 0


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=3, help="stage bound for limits")
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--prec", default=None, help="precision cut, e.g. '(0,4)'")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="valhyper", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", parents=[common], help="run an axiom family on a structure")
    c.add_argument("target", nargs="+", help="structure words followed by a family (ch|hf|v|ih|rv)")
    c.add_argument("--trivial-valuation", action="store_true")
    c.set_defaults(fn=cmd_check)

    r = sub.add_parser("reconstruct", parents=[common], help="tower -> Hahn field, then verify")
    r.add_argument("tower")
    r.add_argument("--delta", type=int, default=None, help="Delta = {0}^(n-k) x Z^k")
    r.add_argument("--defect", default=None, help="plant a defect (skip-w)")
    r.add_argument("--example", action="store_true", help="also check the explicit example map")
    r.set_defaults(fn=cmd_reconstruct)

    e = sub.add_parser("eval", parents=[common], help="evaluate an expression")
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--ground")
    g.add_argument("--rv")
    g.add_argument("--hyper")
    e.add_argument("expr", nargs="+")
    e.set_defaults(fn=cmd_eval)
    return p


def main(argv=None) -> int:
    p = build_parser()
    args = p.parse_args(argv)
    try:
        return args.fn(args)
    except (Usage, ParseError, ValueError) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except ValHyperError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
