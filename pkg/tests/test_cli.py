import json
import os
import subprocess
import sys

import pytest

from femtocoop.cli import main
from femtocoop.experiments import round_seeds

SCENARIO = """name: tiny
N: 2
M: 2
rounds: 2
seed: 5
cluster: [800, 0, 80]
lease: {beta_step: 0.02, power_points: 8}
"""


@pytest.fixture
def scenario(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    for k in list(os.environ):
        if k.startswith("FEMTOCOOP_"):
            monkeypatch.delenv(k)
    p = tmp_path / "tiny.yaml"
    p.write_text(SCENARIO)
    return p


def _run(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_run_quiet_stdout_is_json_only(scenario, tmp_path, capsys):
    out_dir = tmp_path / "o"
    rc, out, _ = _run(["run", "--config", str(scenario), "--out", str(out_dir), "--quiet"], capsys)
    assert rc == 0
    summary = json.loads(out)
    assert summary["command"] == "run" and summary["rounds"] == 2
    for path in summary["files"].values():
        assert os.path.dirname(path) == str(out_dir)
    assert sorted(os.listdir(tmp_path)) == ["o", "tiny.yaml"]


def test_same_seed_twice_is_byte_identical(scenario, tmp_path, capsys):
    texts = []
    for i, jobs in enumerate(("1", "2")):
        out_dir = tmp_path / f"o{i}"
        rc, out, _ = _run(["run", "--config", str(scenario), "--out", str(out_dir), "--seed", "42", "--jobs", jobs, "--quiet"], capsys)
        assert rc == 0
        texts.append(open(json.loads(out)["files"]["csv"]).read())
    assert texts[0] == texts[1]


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("M: 2\n")
    rc, _, err = _run(["run", "--config", str(bad), "--out", str(tmp_path / "o")], capsys)
    assert rc == 2 and "N: required key is missing" in err
    rc, _, _ = _run(["run", "--config", str(tmp_path / "missing.yaml")], capsys)
    assert rc == 2


def test_usage_errors_exit_2(scenario, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2
    assert _run(["run", "--config", str(scenario), "--jobs", "0"], capsys)[0] == 2
    assert _run(["sweep", "--config", str(scenario)], capsys)[0] == 2
    assert _run(["oracle-check", "--config", str(scenario), "--max-players", "9"], capsys)[0] == 2
    assert _run(["oracle-check", "--config", str(scenario), "--sizes", "2by3"], capsys)[0] == 2


def test_infeasible_exit_3(tmp_path, capsys):
    p = tmp_path / "dense.yaml"
    p.write_text("N: 3\nM: 1\nn_subchannels: 2\nsensing_factor: 200\nrounds: 2\n")
    rc, _, err = _run(["run", "--config", str(p), "--out", str(tmp_path / "o")], capsys)
    assert rc == 3 and "infeasible" in err


def test_oracle_check_single_player(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    p = tmp_path / "one.yaml"
    p.write_text("N: 0\nM: 1\nseed: 3\n")
    rc, out, _ = _run(["oracle-check", "--config", str(p), "--instances", "5", "--out", str(tmp_path / "o"), "--quiet"], capsys)
    s = json.loads(out)
    assert rc == 0
    assert s["stable"] == s["undominated_small"] == s["core_member"] == 1.0
    assert s["counterexamples"] == 0


def test_round_replays_oracle_instance(scenario, tmp_path, capsys):
    rc, out, _ = _run(["run", "--config", str(scenario), "--round", "3", "--out", str(tmp_path / "o"), "--quiet"], capsys)
    s = json.loads(out)
    assert rc == 0 and s["seeds"] == list(round_seeds(5, 0, 3))
    assert open(s["files"]["partition"]).read().startswith("coalition_id,")


def test_sweep_report_and_validate(scenario, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FEMTOCOOP_AXES", "{M: [1, 2]}")
    rc, out, _ = _run(["sweep", "--config", str(scenario), "--out", str(tmp_path / "o"), "--quiet"], capsys)
    assert rc == 0
    s = json.loads(out)
    assert s["points"] == 2 and s["axes"] == ["M"]
    rc, out, _ = _run(["report", s["files"]["json"], "--metrics", "mue_gain", "--out", str(tmp_path / "o"), "--quiet"], capsys)
    rows = open(json.loads(out)["file"]).read().splitlines()
    assert rc == 0 and len(rows) == 3 and rows[1].split(",")[2:4] == ["M=1", "mue_gain"]
    monkeypatch.setenv("FEMTOCOOP_N", "7")
    rc, out, _ = _run(["validate-config", "--config", str(scenario), "--quiet"], capsys)
    assert rc == 0 and json.loads(out)["config"]["N"] == 7


def test_module_entry_point(scenario):
    res = subprocess.run([sys.executable, "-m", "femtocoop.cli", "validate-config", "--config", str(scenario), "--quiet"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["valid"] is True
