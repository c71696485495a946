"""Training behavior: the CC-vs-SC trend, the MUX projection contract,
report schema, and split compatibility checks.

The corpus encodes classes at spatial frequencies the on-axis pupil
cannot see (conftest), so CC is stuck at chance while SC separates; the
trend assertion mirrors the desk-scale acceptance protocol.
"""

import json
import math

import numpy as np
import pytest

import fpmharness.training as train_mod
from conftest import GRID_ARGS, NUM_LEDS, make_raw, run_fpmkit, write_raw
from fpmharness import ConfigError, TrainConfig, load_weights, train, train_multiplexed
from fpmharness.training import REPORT_KEYS


def cfg(corpus, setting, **kw):
    base = dict(setting=setting, train_path=str(corpus["train"]),
                test_path=str(corpus["test"]), dataset="gratings",
                epochs=10, batch_size=64, lr=1e-3, seed=0)
    base.update(kw)
    return TrainConfig(**base)


@pytest.fixture(scope="module")
def trend(corpus):
    cc = train(cfg(corpus, "CC"))
    sc = train(cfg(corpus, "SC"))
    return cc, sc


def test_sc_trend_over_cc(trend):
    """Desk-scale protocol: full stacks at least match the center channel."""
    cc, sc = trend
    assert sc.accuracy >= cc.accuracy - 0.5
    assert sc.accuracy >= 60.0  # SC genuinely learns the off-axis classes
    assert cc.accuracy <= 30.0  # the on-axis channel carries no class signal


def test_report_schema(trend):
    cc, sc = trend
    for result, setting in ((cc, "CC"), (sc, "SC")):
        assert tuple(result.report) == REPORT_KEYS
        assert result.report["setting"] == setting
        assert result.report["dataset"] == "gratings"
        assert result.report["radius"] == 4.5
        assert result.report["m"] is None
        assert result.report["epochs"] == 10
        assert result.report["seed"] == 0
        assert result.report["accuracy"] == round(result.accuracy, 4)
        assert 0.0 <= result.report["accuracy"] <= 100.0


def test_history_tracks_epochs(trend):
    cc, _ = trend
    assert len(cc.history) == 10
    assert cc.accuracy == cc.history[-1]
    assert cc.beta is None


def test_upper_bound_setting(corpus, tmp_path):
    report_path = tmp_path / "ub.json"
    result = train(cfg(corpus, "UB", train_path=str(corpus["train_gt"]),
                       test_path=str(corpus["test_gt"]), epochs=5,
                       report_path=str(report_path)))
    assert result.accuracy >= 35.0  # clean gratings separate quickly
    assert result.report["radius"] is None
    assert json.loads(report_path.read_text()) == result.report


def test_reconstruction_setting(recon_corpus):
    result = train(TrainConfig(
        setting="R", train_path=str(recon_corpus["rtrain_recon"]),
        test_path=str(recon_corpus["rtest_recon"]), dataset="gratings",
        epochs=2, batch_size=32, lr=1e-3, seed=0))
    assert result.report["setting"] == "R"
    assert result.report["m"] is None
    assert 0.0 <= result.accuracy <= 100.0


def test_mux_projection_contract(corpus, tmp_path, monkeypatch):
    """The combination stays non-negative after every optimizer step."""
    seen = []
    real_clamp = train_mod.clamp_front

    def recording_clamp(model):
        real_clamp(model)
        seen.append(float(model.front.weight.detach().min()))

    monkeypatch.setattr(train_mod, "clamp_front", recording_clamp)
    beta_path = tmp_path / "beta.json"
    report_path = tmp_path / "mux.json"
    config = cfg(corpus, "MUX", mux_m=4, epochs=3,
                 weights_path=str(beta_path), report_path=str(report_path))
    result = train_multiplexed(config)

    steps_per_epoch = math.ceil(400 / 64)
    assert len(seen) == 3 * steps_per_epoch
    assert all(v >= 0.0 for v in seen)

    assert result.beta.shape == (4, NUM_LEDS)
    assert (result.beta >= 0).all()
    exported = load_weights(beta_path)
    assert np.array_equal(exported, result.beta)

    report = json.loads(report_path.read_text())
    assert report == result.report
    assert report["setting"] == "MUX"
    assert report["m"] == 4


def test_exported_weights_drive_the_simulator(corpus, tmp_path):
    """Learned combinations replay on the physical forward model."""
    beta_path = tmp_path / "beta.json"
    train_multiplexed(cfg(corpus, "MUX", mux_m=3, epochs=1,
                          weights_path=str(beta_path)))
    doc = run_fpmkit("simulate", "--format", "idx",
                     "--input", corpus["train_idx"],
                     "--labels", corpus["train_lbl"], *GRID_ARGS,
                     "--limit", "5", "--out", tmp_path / "replay.fpms",
                     "--weights", beta_path)
    assert doc["count"] == 5
    assert doc["k"] == 3


def test_train_multiplexed_requires_mux(corpus):
    with pytest.raises(ConfigError, match="MUX"):
        train_multiplexed(cfg(corpus, "SC"))


def test_split_channel_mismatch(corpus, recon_corpus):
    config = cfg(corpus, "SC", test_path=str(recon_corpus["rtest_recon"]))
    with pytest.raises(ConfigError, match="train records are"):
        train(config)


def test_out_of_range_label_rejected_before_training(corpus, tmp_path):
    meta = {"grid": None, "noise": None, "multiplex": None,
            "source_ids": ["a", "b"], "labels": [0, 10]}
    bad = write_raw(tmp_path, make_raw(count=2, k=1, h=16, w=16, meta=meta))
    config = cfg(corpus, "CC", train_path=str(bad), test_path=str(bad))
    with pytest.raises(ConfigError, match="outside"):
        train(config)


def test_seeded_runs_repeat(corpus):
    a = train(cfg(corpus, "CC", epochs=1))
    b = train(cfg(corpus, "CC", epochs=1))
    assert a.accuracy == b.accuracy
    assert a.history == b.history
