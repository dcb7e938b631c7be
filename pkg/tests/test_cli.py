import json

import pytest

from sepflux.cli import EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR, EXIT_PASS, build_parser, main

from .conftest import CONFIG_DIR


@pytest.fixture(autouse=True)
def no_store(monkeypatch, tmp_path):
    monkeypatch.delenv("SEPFLUX_DATABASE_URL", raising=False)
    # keep a stray .env in the working directory out of reach
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def config_file(small_raw, tmp_path):
    def write(raw=None):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps(raw or small_raw), encoding="utf-8")
        return str(path)

    return write


def test_validate_prints_normalised_config(config_file, capsys):
    assert main(["validate", config_file(), "--seed", "3"]) == EXIT_PASS
    printed = json.loads(capsys.readouterr().out)
    assert printed["n"] == 16
    assert printed["seed"] == 3


def test_config_errors_exit_with_two(config_file, small_raw, capsys):
    del small_raw["T"]
    assert main(["validate", config_file(small_raw)]) == EXIT_CONFIG_ERROR
    assert "T required" in capsys.readouterr().err


def test_missing_file_is_a_config_error(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == EXIT_CONFIG_ERROR


def test_run_writes_reports(config_file, tmp_path, capsys):
    out = tmp_path / "reports"
    assert main(["run", config_file(), "--out", str(out), "--threads", "2"]) == EXIT_PASS
    stdout = capsys.readouterr().out
    assert "status: pass" in stdout
    assert (out / "small.csv").exists()
    assert (out / "small.summary.json").exists()
    assert (out / "small.config.json").exists()


def test_failed_check_exits_with_one(config_file, small_raw, capsys):
    small_raw["checks"].append({"type": "bound", "kind": "nn", "phi": "one", "value": -1.0})
    assert main(["run", config_file(small_raw)]) == EXIT_CHECK_FAILED
    assert "status: fail" in capsys.readouterr().out


def test_oracle_prints_json_lines(capsys):
    assert main(["oracle", str(CONFIG_DIR / "oracle.json"), "--replicas", "500"]) == EXIT_PASS
    lines = capsys.readouterr().out.strip().splitlines()
    records = [json.loads(line) for line in lines]
    assert [r["L"] for r in records] == [8, 16]
    assert all(r["exact"] is not None for r in records)


def test_oracle_needs_an_oracle_section(config_file):
    assert main(["oracle", config_file()]) == EXIT_CONFIG_ERROR


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
