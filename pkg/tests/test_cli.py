import json

import pytest

from valhyper.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_sign_hyperfield(capsys):
    code, out, _ = run(capsys, "check", "s", "ch")
    assert code == 0 and "PASS" in out


def test_check_trivial_valuation_failure(capsys):
    code, out, _ = run(capsys, "check", "fq-factor", "7", "1,2,4", "v", "--trivial-valuation")
    assert code == 1 and "[1]+[1] ⊇ {[1],[3]}" in out


def test_check_limit_rv(capsys):
    code, out, _ = run(capsys, "check", "limit", "paper-0n", "rv", "--samples", "60")
    assert code == 0


def test_reconstruct_commands(capsys):
    assert run(capsys, "reconstruct", "paper-0n", "--delta", "1", "--budget", "3", "--samples", "30")[0] == 0
    code, out, err = run(capsys, "reconstruct", "paper-1m")
    assert code == 1 and "empty" in out + err
    assert run(capsys, "reconstruct", "paper-n0", "--delta", "2", "--samples", "30")[0] == 0


def test_eval_commands(capsys):
    code, out, _ = run(capsys, "eval", "--ground", "q2", "1/(1-x)", "--prec", "(0,4)")
    assert code == 0 and out.strip() == "1 + x + x^2 + x^3 + O(x^4)"
    code, out, _ = run(capsys, "eval", "--rv", "q,z", "inv(1 - t; 3)")
    assert code == 0 and out.strip().startswith("1 + t + t^2 + t^3")
    code, out, _ = run(capsys, "eval", "--hyper", "h_rho(q2,(0,1))", "member (1)+(-1) ∋ (x^2)")
    assert code == 0 and out.strip() == "true"


def test_usage_errors(capsys):
    assert run(capsys, "eval", "--ground", "q2", "1/(1-")[0] == 2
    assert run(capsys, "check", "nonsense", "ch")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_json_is_reproducible(capsys):
    argv = ("check", "quotient", "f3", "1", "v", "--samples", "200", "--seed", "7", "--json")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    d = json.loads(a)
    assert d["config"]["seed"] == 7 and d["config"]["samples"] == 200
