import csv
import json
import shutil
import subprocess
import sys

import pytest

from attackaware.bundled import bundled_path
from attackaware.cli import main


@pytest.fixture
def specs(tmp_path):
    out = {}
    for name in ("case1", "case2", "case3"):
        dst = tmp_path / f"{name}.json"
        shutil.copy(bundled_path(name), dst)
        out[name] = str(dst)
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_validate_ok(specs, capsys):
    code, _, err = run(capsys, "validate", specs["case1"])
    assert code == 0 and "valid" in err


def test_validate_truncated(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"states": ["a", ')
    code, _, err = run(capsys, "validate", p)
    assert code == 1 and "line 1" in err


def test_validate_unknown_sensor(specs, tmp_path, capsys):
    raw = json.loads(open(specs["case1"]).read())
    raw["queries"][0] = ["A", "Z"]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(raw))
    code, _, err = run(capsys, "validate", p)
    assert code == 1 and "UnknownSensor" in err and "Z" in err


def test_solve_case1(specs, tmp_path, capsys):
    out = tmp_path / "strat.json"
    code, stdout, _ = run(capsys, "solve", specs["case1"], "--out", out)
    assert code == 0
    report = json.loads(stdout)
    assert report["initial_winning"] is True
    assert report["arena"]["states"] == 352
    doc = json.loads(out.read_text())
    s6 = next(b for b in doc["beliefs"] if b["states"] == ["s6"])
    assert sorted((a["control"], a["query"]) for a in s6["actions"]) == [
        ("a0", "sigma0"), ("a0", "sigma1"), ("a0", "sigma3")]
    assert doc["metadata"]["spec_sha256"]


def test_solve_case3_losing_and_winning(specs, capsys):
    code, stdout, _ = run(capsys, "solve", specs["case3"])
    assert code == 3 and json.loads(stdout)["initial_winning"] is False
    code, stdout, _ = run(capsys, "solve", specs["case3"], "--initial-state", "s0")
    assert code == 0 and json.loads(stdout)["initial_winning"] is True


def test_solve_unknown_initial(specs, capsys):
    code, _, err = run(capsys, "solve", specs["case3"], "--initial-state", "nowhere")
    assert code == 1 and "nowhere" in err


def test_solve_size_cap(specs, capsys, monkeypatch):
    monkeypatch.setenv("BELIEF_ARENA_MAX_STATES", "50")
    code, _, err = run(capsys, "solve", specs["case1"])
    assert code == 4 and "BELIEF_ARENA_MAX_STATES" in err


def test_solve_naive_agrees(specs, capsys):
    _, a, _ = run(capsys, "solve", specs["case2"], "--deterministic")
    _, b, _ = run(capsys, "solve", specs["case2"], "--deterministic", "--naive")
    ra, rb = json.loads(a), json.loads(b)
    assert ra["win_size"] == rb["win_size"] and ra["levels"] == rb["levels"]


def test_simulate(specs, tmp_path, capsys):
    strat = tmp_path / "s.json"
    run(capsys, "solve", specs["case2"], "--out", strat)
    csv_path = tmp_path / "ep.csv"
    code, stdout, _ = run(capsys, "simulate", specs["case2"], strat, "--episodes", 1, "--horizon", 200,
                          "--policy", "arena_adversary", "--policy", "no_attack", "--csv", csv_path)
    assert code == 0
    lines = [json.loads(x) for x in stdout.splitlines()]
    assert [x["policy"] for x in lines] == ["arena_adversary", "no_attack"]
    assert all(x["episodes"] == 1 and x["frequency"] == 1.0 for x in lines)
    rows = list(csv.reader(open(csv_path)))
    assert rows[0] == ["initial_state", "policy", "episode", "seed", "outcome", "steps"]
    assert len(rows) == 3


def test_simulate_zero_episodes(specs, tmp_path, capsys):
    strat = tmp_path / "s.json"
    run(capsys, "solve", specs["case2"], "--out", strat)
    code, _, err = run(capsys, "simulate", specs["case2"], strat, "--episodes", 0)
    assert code == 1 and "episodes" in err


def test_simulate_hash_mismatch(specs, tmp_path, capsys):
    strat = tmp_path / "s.json"
    run(capsys, "solve", specs["case2"], "--out", strat)
    code, _, err = run(capsys, "simulate", specs["case1"], strat)
    assert code == 5


def test_certify(specs, tmp_path, capsys):
    strat = tmp_path / "s.json"
    run(capsys, "solve", specs["case3"], "--initial-state", "s0", "--out", strat)
    code, stdout, _ = run(capsys, "certify", specs["case3"], strat)
    assert code == 0 and json.loads(stdout)["verdict"] == "pass"

    doc = json.loads(strat.read_text())
    cert = doc["certificate"]
    extra = next(i for i in range(cert["arena_states"]) if i not in set(cert["win"]))
    cert["levels"].append([extra])
    cert["win"] = sorted(cert["win"] + [extra])
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, stdout, _ = run(capsys, "certify", specs["case3"], bad)
    report = json.loads(stdout)
    assert code == 2 and report["verdict"] == "fail"

    del doc["certificate"]["levels"]
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, "certify", specs["case3"], bad)
    assert code == 1 and "levels" in err


def test_export_dot(specs, tmp_path, capsys):
    out = tmp_path / "a.dot"
    code, _, _ = run(capsys, "export-dot", specs["case1"], "--highlight-win", "--out", out)
    text = out.read_text()
    assert code == 0 and "digraph" in text and "palegreen" in text


def test_no_lambda_flag(specs, capsys):
    _, with_l, _ = run(capsys, "solve", specs["case2"], "--deterministic")
    _, without, _ = run(capsys, "solve", specs["case2"], "--deterministic", "--no-lambda")
    a, b = json.loads(with_l), json.loads(without)
    assert a["metadata"]["include_no_attack"] and not b["metadata"]["include_no_attack"]
    assert a["initial_winning"] == b["initial_winning"]


def test_byte_stable_outputs(specs, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    outs = []
    for k in range(2):
        strat = tmp_path / f"s{k}.json"
        _, report, _ = run(capsys, "solve", specs["case1"], "--deterministic", "--out", strat)
        outs.append((report, strat.read_bytes()))
    assert outs[0] == outs[1]
    assert json.loads(outs[0][0])["metadata"]["created"] == "2023-11-14T22:13:20Z"


def test_console_script_entry(specs):
    proc = subprocess.run([sys.executable, "-m", "attackaware.cli", "validate", specs["case1"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0
