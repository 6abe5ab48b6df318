import csv
import io
import json
import os
import subprocess
import sys

import pytest

from uguess.cli import run, write_atomic


def call(args, capsys, env=None):
    if env:
        os.environ.update(env)
    try:
        code = run(args)
    finally:
        for k in env or {}:
            os.environ.pop(k, None)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def bern_file(tmp_path):
    path = tmp_path / "bern.json"
    path.write_text(json.dumps({"alphabet": ["0", "1"], "probabilities": [0.8, 0.2]}))
    return str(path)


def test_parse(capsys):
    code, out, _ = call(["parse", "1011010100010"], capsys)
    manifest, data = out.splitlines()
    assert code == 0 and "manifest" in json.loads(manifest)
    data = json.loads(data)
    assert data["c"] == 7 and data["code_length"] == 21
    assert data["phrases"] == ["1", "0", "11", "01", "010", "00", "10"]


def test_sample_byte_identical(capsys):
    args = ["sample", "--strategy", "lz-bits", "--n", "16", "--count", "3", "--seed", "7"]
    _, first, _ = call(args, capsys)
    _, second, _ = call(args, capsys)
    assert first == second
    lines = first.splitlines()
    assert len(lines) == 4 and all(len(l) == 16 and set(l) <= {"0", "1"} for l in lines[1:])


def test_sample_explain_and_si(tmp_path, capsys):
    si = tmp_path / "y.txt"
    si.write_text("0011010\n")
    side = tmp_path / "explain.json"
    code, out, _ = call(["sample", "--strategy", "lz-cond", "--si-file", str(si), "--count", "2",
                         "--explain", str(side), "--seed", "1"], capsys)
    assert code == 0
    rec = json.loads(side.read_text())
    assert [g["guess"] for g in rec["guesses"]] == out.splitlines()[1:]
    assert all(g["log2_prob"] <= 0 for g in rec["guesses"])


def test_env_seed_echoed(capsys):
    _, out, _ = call(["sample", "--strategy", "kt", "--n", "5"], capsys, env={"UGUESS_SEED": "99"})
    m = json.loads(out.splitlines()[0])["manifest"]
    assert m["seed"] == 99 and m["seed_origin"] == "env:UGUESS_SEED"


def test_exponent_theory_column(bern_file, capsys):
    code, out, _ = call(["exponent", "--source-file", bern_file, "--rho", "1", "--n", "4,8,12"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.split("\n", 1)[1])))
    assert len(rows) == 9
    assert {round(float(r["theory"]), 5) for r in rows} == {0.848}


def test_attack_output_file(tmp_path, bern_file, capsys):
    dest = tmp_path / "attack.csv"
    code, out, _ = call(["attack", "--source-file", bern_file, "--n", "6", "--strategy", "lz-tree",
                         "--agents", "4", "--trials", "20", "--seed", "3", "--output", str(dest)], capsys)
    assert code == 0 and len(out.splitlines()) == 1
    rows = list(csv.DictReader(dest.open()))
    assert len(rows) == 20
    for r in rows:
        assert int(r["rounds"]) == -(-int(r["total_queries"]) // 4) and r["success"] == "1"
    assert not [p for p in tmp_path.iterdir() if p.name.endswith(".tmp")]


def test_attack_fixed_secret_json(capsys):
    code, out, _ = call(["attack", "--secret", "0110", "--strategy", "kt", "--trials", "3",
                         "--format", "json"], capsys)
    assert code == 0
    assert [r["trial"] for r in json.loads(out.split("\n", 1)[1])] == [0, 1, 2]


@pytest.mark.parametrize("args", [
    ["sample", "--strategy", "bogus", "--n", "3"],
    ["sample", "--strategy", "kt", "--n", "3", "--seed", "-4"],
    ["sample", "--strategy", "lz-cond", "--n", "3"],
    ["exponent", "--source-file", "/nonexistent.json"],
    ["attack", "--strategy", "kt"],
    ["parse", "01x"],
])
def test_errors_are_json(args, capsys):
    code, out, err = call(args, capsys)
    assert code != 0 and out == ""
    assert set(json.loads(err)) == {"error", "message"}


def test_verify_subset(capsys):
    code, out, _ = call(["verify", "--suites", "leaf-law,kraft,lemma1-grid"], capsys)
    report = json.loads(out.split("\n", 1)[1])
    assert code == 0 and report["passed"]
    assert [s["suite"] for s in report["suites"]] == ["leaf-law", "kraft", "lemma1-grid"]


@pytest.mark.slow
def test_verify_default_budget_exit_zero():
    proc = subprocess.run([sys.executable, "-m", "uguess.cli", "verify"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout.split("\n", 1)[1])
    assert all(s["passed"] for s in report["suites"]) and len(report["suites"]) == 7


def test_write_atomic_replaces(tmp_path):
    target = tmp_path / "f.txt"
    target.write_text("old")
    write_atomic(target, "new")
    assert target.read_text() == "new"
