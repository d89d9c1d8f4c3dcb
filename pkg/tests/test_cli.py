import csv
import json

import pytest

from kzlab import cli


def _run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_list_shows_every_experiment(capsys):
    code, out = _run(["list"], capsys)
    assert code == 0
    for name in cli.EXPERIMENTS:
        assert name in out.out


def test_every_criterion_has_an_experiment():
    crits = {e.criterion for e in cli.EXPERIMENTS.values() if e.criterion}
    assert crits == set(cli.ACCEPTANCE_LIMITS)


def test_run_passes_and_writes_outputs(tmp_path, capsys):
    code, out = _run(["run", "qkz-twist", "--out", str(tmp_path)], capsys)
    assert code == 0 and "PASS" in out.out
    report = json.loads((tmp_path / "qkz-twist.json").read_text())
    assert report["passed"] and report["experiment"] == "qkz-twist"
    with open(tmp_path / "qkz-twist.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 3


def test_unknown_experiment_suggests_names(capsys):
    code, out = _run(["run", "selberg-gird"], capsys)
    assert code == 2 and "selberg-grid" in out.err


@pytest.mark.parametrize("argv", [
    ["run", "barnes", "--bogus", "1"],
    ["run", "barnes", "--config", "/nonexistent.toml"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert _run(argv, capsys)[0] == 2


def test_config_validation(tmp_path):
    with pytest.raises(cli.UsageError):
        cli.make_config("barnes", {"tolerances": {"gap": -1.0}})
    with pytest.raises(cli.UsageError):
        cli.make_config("barnes", {"tolerances": {"gapp": 1e-7}})
    with pytest.raises(cli.UsageError):
        cli.make_config("barnes", {"colour": "red"})


def test_tightened_tolerance_fails_with_exit_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerances": {"gap": 1e-30}}))
    assert _run(["run", "barnes", "--config", str(cfg)], capsys)[0] == 1


def test_toml_and_json_configs_agree_and_are_deterministic(tmp_path, capsys):
    params = {"points": [[0.3, 0.5, 0.7, 0.9], [0.6, 1.7, 0.35, 0.45]]}
    (tmp_path / "c.json").write_text(json.dumps({"params": params}))
    (tmp_path / "c.toml").write_text("[params]\npoints = [[0.3, 0.5, 0.7, 0.9], [0.6, 1.7, 0.35, 0.45]]\n")
    outs = []
    for i, name in enumerate(["c.json", "c.toml", "c.toml"]):
        d = tmp_path / f"o{i}"
        assert _run(["run", "barnes", "--config", str(tmp_path / name), "--out", str(d)], capsys)[0] == 0
        outs.append((d / "barnes.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_command_line_override(tmp_path, capsys):
    code, _ = _run(["run", "barnes", "--points", "[[1.1, 0.4, 0.6, 0.2]]", "--out", str(tmp_path)], capsys)
    assert code == 0
    with open(tmp_path / "barnes.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 1 and float(rows[0]["a"]) == 1.1


def test_invalid_worker_count(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    with pytest.raises(cli.UsageError):
        cli._workers()
    monkeypatch.setenv(cli.WORKERS_ENV, "0")
    with pytest.raises(cli.UsageError):
        cli._workers()


def test_csv_quoting_round_trip(tmp_path):
    rows = [{"text": 'a,b "quoted"\nnewline', "x": 1.5}, {"text": "plain", "x": -2}]
    cli.write_csv(tmp_path / "t.csv", rows)
    raw = (tmp_path / "t.csv").read_bytes()
    assert raw.endswith(b"\r\n")
    with open(tmp_path / "t.csv", newline="") as f:
        back = list(csv.DictReader(f))
    assert back[0]["text"] == rows[0]["text"] and float(back[1]["x"]) == -2
