import json
import math
import subprocess
import sys

import pytest

from tfinv import cli


def write(tmp_path, obj, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(tmp_path, experiment, cfg, *extra, out="out"):
    path = write(tmp_path, cfg)
    return cli.main([experiment, "--config", path, "--out", str(tmp_path / out), *extra])


WEIGHTED = {"schema": "tfinv-1", "model": {"kind": "WeightedL2", "params": {"weight": "2+sin"}}}
PLAIN = {"schema": "tfinv-1", "model": {"kind": "PlainL2"}}
SOBOLEV = {"schema": "tfinv-1", "model": {"kind": "SobolevHs", "params": {"s": 1.0}}}


def test_average_norm_plain(tmp_path, capsys):
    assert run(tmp_path, "average-norm", PLAIN) == 0
    assert "PASS" in capsys.readouterr().out
    doc = json.loads((tmp_path / "out" / "average-norm.json").read_text())
    assert doc["result"]["C"] == pytest.approx(1.0, abs=1e-9)
    assert doc["config"]["model"]["kind"] == "PlainL2"


def test_full_witness_weighted(tmp_path, capsys):
    assert run(tmp_path, "full-theorem-witness", WEIGHTED) == 0
    assert capsys.readouterr().out.startswith("PASS")
    doc = json.loads((tmp_path / "out" / "full-theorem-witness.json").read_text())
    assert doc["result"]["outcome"] == "PASS"
    avg = doc["result"]["averaging"]
    assert avg["C"] == pytest.approx(math.sqrt(2), rel=1e-2)
    assert avg["C0"] == pytest.approx(math.sqrt(3))


def test_full_witness_sobolev_stops_at_admissibility(tmp_path, capsys):
    assert run(tmp_path, "full-theorem-witness", SOBOLEV) == 0
    assert "HYPOTHESIS-VIOLATED" in capsys.readouterr().out
    doc = json.loads((tmp_path / "out" / "full-theorem-witness.json").read_text())
    assert doc["result"]["outcome"] == "HYPOTHESIS-VIOLATED"
    assert "averaging" not in doc["result"]


def test_classify_and_covariance(tmp_path):
    assert run(tmp_path, "classify", WEIGHTED) == 0
    body = (tmp_path / "out" / "classify.csv").read_text().splitlines()
    assert body[0].startswith("# tfinv-1 config=")
    assert body[1].startswith("id,tag")
    assert len(body) == 2 + 7
    assert run(tmp_path, "bargmann-covariance", WEIGHTED) == 0


def test_v0_estimate(tmp_path):
    assert run(tmp_path, "v0-estimate", WEIGHTED) == 0
    doc = json.loads((tmp_path / "out" / "v0-estimate.json").read_text())
    assert doc["result"]["verdict"] == "admissible"
    assert doc["result"]["submultiplicativity_defect"] <= doc["result"]["slack_budget"]


def test_assertion_failure_exits_one(tmp_path, capsys):
    cfg = dict(WEIGHTED, classify={"items": [{"id": "s", "canonical": "Schwartz", "expect": "H_flat"}]})
    assert run(tmp_path, "classify", cfg) == 1
    assert "growth_classifier.classify(s)" in capsys.readouterr().out


@pytest.mark.parametrize("cfg", [
    {"schema": "tfinv-1", "unknown": 1},
    {"schema": "tfinv-0"},
    {"schema": "tfinv-1", "model": {"kind": "Banach"}},
    {"schema": "tfinv-1", "model": {"kind": "WeightedL2", "extra": 1}},
    {"schema": "tfinv-1", "model": {"kind": "WeightedL2", "params": {"weight": "bogus"}}},
    {"schema": "tfinv-1", "experiment": "classify"},
    {"schema": "tfinv-1", "classify": {"items": [{"canonical": "Nope"}]}},
])
def test_config_errors_exit_two(tmp_path, cfg):
    assert run(tmp_path, "average-norm", cfg) == 2


def test_missing_config_file_exits_two(tmp_path):
    assert cli.main(["classify", "--config", str(tmp_path / "none.json")]) == 2


def test_bad_arguments_exit_two(tmp_path):
    path = write(tmp_path, PLAIN)
    assert cli.main(["not-an-experiment", "--config", path]) == 2
    assert cli.main(["classify", "--config", path, "--workers", "0"]) == 2


def test_csv_bodies_are_byte_reproducible(tmp_path):
    cfg = dict(WEIGHTED, averaging={"schedule": [5.0, 10.0, 20.0]})
    assert run(tmp_path, "average-norm", cfg, out="a") == 0
    assert run(tmp_path, "average-norm", cfg, "--workers", "3", out="b") == 0
    a = (tmp_path / "a" / "average-norm.csv").read_bytes()
    b = (tmp_path / "b" / "average-norm.csv").read_bytes()
    assert a == b


def test_seed_flag_recorded(tmp_path):
    assert run(tmp_path, "classify", PLAIN, "--seed", "17") == 0
    doc = json.loads((tmp_path / "out" / "classify.json").read_text())
    assert doc["config"]["seed"] == 17


def test_console_entry_point(tmp_path):
    path = write(tmp_path, PLAIN)
    res = subprocess.run([sys.executable, "-m", "tfinv.cli", "classify", "--config", path],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("PASS")
