"""CLI contract tests; run against the binary named by ASP_CLI."""

import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("ASP_CLI")
GOLDEN = Path(__file__).resolve().parent.parent / "golden"

pytestmark = pytest.mark.skipif(not CLI, reason="ASP_CLI not set")


def run(*args, **kwargs):
    return subprocess.run(
        [CLI, *args], capture_output=True, text=True, timeout=120, **kwargs
    )


def test_help_matches_golden():
    result = run("--help")
    assert result.returncode == 0
    assert result.stdout == GOLDEN.joinpath("help.txt").read_text()


def test_train_help_matches_golden():
    result = run("train", "--help")
    assert result.returncode == 0
    assert result.stdout == GOLDEN.joinpath("help_train.txt").read_text()


def test_unknown_flag_exits_2():
    result = run("train", "--bogus")
    assert result.returncode == 2
    assert "--help" in result.stderr + result.stdout


def test_unknown_subcommand_exits_2():
    assert run("frobnicate").returncode == 2


def test_bad_enum_value_exits_2():
    assert run("train", "--metric", "psychic").returncode == 2


def test_config_error_names_field(tmp_path):
    result = run("train", "--ratio", "2.0", "--out-dir", str(tmp_path))
    assert result.returncode == 3
    payload = json.loads(result.stderr)
    assert payload["error"] == "config"
    assert payload["field"] == "schedule.ratio"


def test_missing_config_file_exits_1(tmp_path):
    result = run("train", "--config", str(tmp_path / "nope.json"))
    assert result.returncode == 1
    assert json.loads(result.stderr)["error"] == "io"


def test_generate_data_writes_csv(tmp_path):
    result = run("generate-data", "--out-dir", str(tmp_path))
    assert result.returncode == 0
    lines = (tmp_path / "dataset.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "f0"
    assert header[-2:] == ["label", "split"]
    splits = {line.rsplit(",", 1)[1] for line in lines[1:]}
    assert splits == {"train", "val", "test"}


def test_static_schedule_dump_is_flat(tmp_path):
    result = run(
        "schedule-dump",
        "--schedule", "static",
        "--ratio", "0.5",
        "--out-dir", str(tmp_path),
    )
    assert result.returncode == 0
    rows = (tmp_path / "schedule.csv").read_text().splitlines()[1:]
    sizes = {row.split(",")[2] for row in rows}
    assert len(sizes) == 1


def tiny_config(tmp_path):
    cfg = {
        "seed": 21,
        "hyperparams": {"epochs": 3, "batch_size": 16},
        "data": {
            "source": "synthetic",
            "synthetic": {"classes": 2, "per_class": 30, "dims": 3},
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_train_writes_artifacts(tmp_path):
    cfg = tiny_config(tmp_path)
    result = run("train", "--config", str(cfg), "--out-dir", str(tmp_path))
    assert result.returncode == 0
    log = json.loads((tmp_path / "run.json").read_text())
    assert len(log["epochs"]) == 3
    csv = (tmp_path / "epochs.csv").read_text().splitlines()
    assert len(csv) == 4  # header + one row per epoch


def test_train_epochs_csv_deterministic(tmp_path):
    cfg = tiny_config(tmp_path)
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    for out in (a_dir, b_dir):
        out.mkdir()
        assert run("train", "--config", str(cfg), "--out-dir", str(out)).returncode == 0
    assert (a_dir / "epochs.csv").read_bytes() == (b_dir / "epochs.csv").read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    cfg = tiny_config(tmp_path)
    result = run(
        "train", "--config", str(cfg), "--seed", "99", "--out-dir", str(tmp_path)
    )
    assert result.returncode == 0
    log = json.loads((tmp_path / "run.json").read_text())
    assert log["config"]["seed"] == 99


def test_hardness_traces_train_ids(tmp_path):
    cfg = tiny_config(tmp_path)
    result = run(
        "hardness",
        "--config", str(cfg),
        "--metric", "loss",
        "--out-dir", str(tmp_path),
    )
    assert result.returncode == 0
    rows = (tmp_path / "hardness.csv").read_text().splitlines()
    assert rows[0] == "rank,sample_id,mean_importance"
    assert (tmp_path / "importance_trace.csv").exists()
