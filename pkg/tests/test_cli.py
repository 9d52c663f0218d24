"""Tests for the command line interface: exit codes, JSON output, file
indirection, and the built-in case studies."""

import json
import subprocess
import sys

import pytest

from pombox import cli, posets, terms


def run_cli(*argv):
    return subprocess.run([sys.executable, "-m", "pombox.cli"] + list(argv),
                          capture_output=True, text=True)


# ---------------------------------------------------------------------------
# exit-code contract


def test_eq_true_exits_zero():
    r = run_cli("eq", "--system", "bsp", "1;a", "a")
    assert r.returncode == 0 and r.stdout.strip() == "true"


def test_eq_false_exits_one():
    r = run_cli("eq", "--system", "bsp", "a;b", "b;a")
    assert r.returncode == 1 and r.stdout.strip() == "false"


def test_leq_box_axiom():
    r = run_cli("leq", "--system", "cmb", "[a;b]", "a;b")
    assert r.returncode == 0
    r = run_cli("leq", "--system", "cmb", "a;b", "[a;b]")
    assert r.returncode == 1


def test_parse_error_exits_two():
    r = run_cli("eq", "--system", "bsp", "a;;b", "a")
    assert r.returncode == 2 and "error" in r.stderr


def test_fragment_error_exits_two():
    r = run_cli("eq", "--system", "bsp", "a+b", "a")
    assert r.returncode == 2 and "error" in r.stderr


def test_usage_error_exits_two():
    r = run_cli("eq", "a", "b")  # missing --system
    assert r.returncode == 2
    r = run_cli("frobnicate")
    assert r.returncode == 2


# ---------------------------------------------------------------------------
# model checking


def test_mc_counter_conflict():
    faulty = "print;(rx|ry);(ix|iy);(wx|wy);print"
    r = run_cli("mc", "--relation", "rev", "--quantifier", "some",
                "--formula", "<>((rx||ry)|>(wx||wy))", faulty)
    assert r.returncode == 0 and r.stdout.strip() == "true"


def test_mc_json_payload_round_trips():
    r = run_cli("mc", "--json", "--formula", "a|>b", "a;b")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["holds"] is True and doc["witness"] is not None
    r = run_cli("mc", "--json", "--formula", "b|>a", "a;b")
    assert r.returncode == 1
    doc = json.loads(r.stdout)
    assert doc["holds"] is False and doc["witness"] is None


def test_mc_reads_poset_json(tmp_path):
    P = terms.interp_sp(terms.parse_term("a;b"))
    path = tmp_path / "poset.json"
    path.write_text(json.dumps(posets.to_json(P)), encoding="utf-8")
    r = run_cli("mc", "--formula", "a|>b", "--poset-json", str(path))
    assert r.returncode == 0


def test_formula_file_indirection(tmp_path):
    path = tmp_path / "formula.txt"
    path.write_text("a|>b\n", encoding="utf-8")
    r = run_cli("mc", "--formula", "@" + str(path), "a;b")
    assert r.returncode == 0


# ---------------------------------------------------------------------------
# synthesis, patterns, factorization, DOT


def test_synth_round_trip():
    r = run_cli("synth", "[a;(b|c)]")
    assert r.returncode == 0
    t = terms.parse_term(r.stdout.strip())
    assert terms.decide("bsp", t, terms.parse_term("[a;(b|c)]"), "eq")


def test_patterns_on_non_sp_poset(tmp_path):
    P = posets.from_edges(["a", "b", "c", "d"], [(0, 2), (1, 2), (1, 3)], [])
    path = tmp_path / "n.json"
    path.write_text(json.dumps(posets.to_json(P)), encoding="utf-8")
    r = run_cli("patterns", "--json", "--poset-json", str(path))
    assert r.returncode == 1
    doc = json.loads(r.stdout)
    assert doc["result"] is False and doc["witness"]["pattern"] == "P1"
    r = run_cli("synth", "--poset-json", str(path))
    assert r.returncode == 1


def test_patterns_ok_on_sp_term():
    r = run_cli("patterns", "a;(b|c)")
    assert r.returncode == 0 and r.stdout.strip() == "ok"


def test_factorize_outputs_two_posets():
    r = run_cli("factorize", "--json", "[a;b]", "a|b")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    R1 = posets.from_json(doc["r1"])
    R2 = posets.from_json(doc["r2"])
    P = terms.interp_sp(terms.parse_term("[a;b]"))
    Q = terms.interp_sp(terms.parse_term("a|b"))
    assert posets.subsumed_by(P, R2) and posets.subsumed_by(R1, Q)
    r = run_cli("factorize", "a|b", "[a;b]")
    assert r.returncode == 1


def test_export_dot(tmp_path):
    out = tmp_path / "g.dot"
    r = run_cli("export-dot", "-o", str(out), "[a;b]")
    assert r.returncode == 0
    text = out.read_text(encoding="utf-8")
    assert text.startswith("digraph") and "cluster" in text


# ---------------------------------------------------------------------------
# examples and fuzzing


def test_examples_counter_passes():
    r = run_cli("examples", "counter")
    assert r.returncode == 0
    assert "FAIL" not in r.stdout and "PASS" in r.stdout


def test_examples_voting_passes():
    r = run_cli("examples", "voting", "--voters", "2", "--counters", "2")
    assert r.returncode == 0
    assert "FAIL" not in r.stdout


def test_fuzz_clean():
    r = run_cli("fuzz", "--cases", "15", "--seed", "4", "--max-events", "3")
    assert r.returncode == 0 and r.stdout.strip() == ""


# ---------------------------------------------------------------------------
# builders


def test_voting_interp_sizes():
    v11 = cli.build_voting(1, 1)
    members = terms.interp(v11)
    assert len(members) == 1 and members[0].n == 5
    v22 = cli.build_voting(2, 2)
    assert len(terms.interp(v22)) == 4


def test_counter_builders():
    protected = terms.interp_sp(cli.build_counter(boxed=True))
    assert len(protected.boxes) == 2
    run = terms.interp_sp(cli.build_counter_faulty_run())
    assert run.n == 8
    assert posets.subsumed_by(run, terms.interp_sp(cli.build_counter(False)))
