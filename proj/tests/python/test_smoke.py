"""Smoke tests for the asp python module."""

import json
import math

import pytest

import asp


def test_default_config_round_trip():
    cfg = json.loads(asp.default_config())
    assert cfg["mode"] == "asp"
    assert cfg["schedule"]["mode"] == "dynamic"
    echoed = json.loads(asp.validate_config(asp.default_config()))
    assert echoed == cfg


def test_validate_rejects_bad_ratio():
    cfg = json.loads(asp.default_config())
    cfg["schedule"]["ratio"] = 0.0
    with pytest.raises(ValueError, match="schedule.ratio"):
        asp.validate_config(json.dumps(cfg))


def tiny_config(**overrides):
    cfg = json.loads(asp.default_config())
    cfg["seed"] = 11
    cfg["hyperparams"]["epochs"] = 4
    cfg["hyperparams"]["batch_size"] = 16
    cfg["data"]["synthetic"].update(
        {"classes": 3, "per_class": 40, "dims": 4, "overlap": 0.8}
    )
    cfg.update(overrides)
    return cfg


def test_train_produces_epoch_log():
    log = json.loads(asp.train(json.dumps(tiny_config())))
    assert len(log["epochs"]) == 4
    for record in log["epochs"]:
        assert 0.0 <= record["test_accuracy"] <= 1.0
        assert record["m"] >= 1
    assert log["config"]["seed"] == 11


def test_train_is_deterministic():
    first = json.loads(asp.train(json.dumps(tiny_config())))
    second = json.loads(asp.train(json.dumps(tiny_config())))
    for a, b in zip(first["epochs"], second["epochs"]):
        assert a["train_loss"] == b["train_loss"]
        assert a["test_accuracy"] == b["test_accuracy"]


def test_full_ratio_matches_full_mode():
    base = tiny_config()
    base["schedule"] = {"mode": "static", "ratio": 1.0}
    asp_log = json.loads(asp.train(json.dumps(base)))
    full_log = json.loads(asp.train(json.dumps(tiny_config(mode="full"))))
    assert asp_log["final"]["test_accuracy"] == full_log["final"]["test_accuracy"]
    assert asp_log["final"]["val_accuracy"] == full_log["final"]["val_accuracy"]


def test_schedule_helpers():
    assert asp.proxy_size("static", 0.5, 10, 3, 100) == 50
    assert asp.scheduled_ratio("static", 0.3, 10, 9) == 0.3
    # Dynamic schedules decay toward the end of training.
    first = asp.scheduled_ratio("dynamic", 0.3, 10, 0)
    last = asp.scheduled_ratio("dynamic", 0.3, 10, 9)
    assert first > last
    # The clamp keeps at least one sample.
    assert asp.proxy_size("dynamic", 0.3, 10, 9, 100) >= 1


def test_metric_probabilities_normalized():
    for epoch in (0, 37, 120, 199):
        probs = asp.metric_probabilities(200, epoch)
        assert len(probs) == 5
        assert math.isclose(sum(probs), 1.0, abs_tol=1e-12)
        assert all(p >= 0.0 for p in probs)


def test_sampling_probabilities_normalized():
    probs = asp.sampling_probabilities([0.5, -2.0, 1.25, 0.0])
    assert math.isclose(sum(probs), 1.0, abs_tol=1e-12)
    assert all(p > 0.0 for p in probs)
    # Larger value means larger weight.
    assert probs[3] > probs[1]


def test_select_contract():
    values = [0.5, 1.5, 0.25, 3.0, -1.0]
    ids = asp.select(values, 3, "topm")
    assert ids == sorted(ids)
    assert set(ids) == {0, 1, 3}
    picked = asp.select(values, 2, "prob", seed=5, epoch=3)
    again = asp.select(values, 2, "prob", seed=5, epoch=3)
    assert picked == again
    assert len(picked) == 2


def test_rank_statistics():
    assert asp.kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(2.0 / 3.0)
    assert asp.spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert asp.pearson([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == pytest.approx(1.0)
    assert asp.midranks([10.0, 20.0, 20.0, 5.0]) == [2.0, 3.5, 3.5, 1.0]


def test_grid_correlation_smoke():
    cfg = tiny_config()
    cfg["hyperparams"]["epochs"] = 2
    cfg["data"]["synthetic"].update({"classes": 2, "per_class": 30, "dims": 2})
    table = json.loads(asp.grid_correlation(json.dumps(cfg)))
    ratios = [row["ratio"] for row in table["rows"]]
    assert ratios == sorted(ratios)
    full = [row for row in table["rows"] if row["ratio"] == 1.0]
    assert full and full[0]["tau"] == pytest.approx(1.0)
