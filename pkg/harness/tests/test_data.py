"""Channel contracts: every setting consumes exactly its documented slice."""

import numpy as np
import pytest

from conftest import NUM_LEDS
from fpmharness import ConfigError, TrainConfig, read_stack, select_channels
from fpmharness.container import FLAG_GROUND_TRUTH, StackFile
from fpmharness.data import prepare_pair, validate_labels

GRID3 = {"side": 3, "spacing": 2.0, "radius": 2.5}


def craft(count=4, k=1, h=6, w=6, grid=None, flags=0, multiplex=None,
          color=1, labels=None):
    rng = np.random.default_rng(7)
    payload = rng.uniform(0.0, 1.0, (count, k, h, w)).astype(np.float32)
    return StackFile(payload=payload,
                     source_ids=[f"r{i}" for i in range(count)],
                     labels=labels if labels is not None else [i % 10 for i in range(count)],
                     grid=grid, multiplex=multiplex, flags=flags,
                     extra={"color_channels": color})


# --- CC -------------------------------------------------------------------

def test_cc_slices_on_axis_channel(corpus):
    stack = read_stack(corpus["train"])
    x = select_channels(stack, "CC")
    assert x.shape == (400, 1, 16, 16)
    assert np.array_equal(x[:, 0], stack.payload[:, NUM_LEDS // 2])


def test_cc_color_picks_one_led_per_plane():
    stack = craft(k=27, grid=GRID3, color=3)
    x = select_channels(stack, "CC")
    assert x.shape == (4, 3, 6, 6)
    for plane in range(3):
        assert np.array_equal(x[:, plane], stack.payload[:, plane * 9 + 4])


def test_cc_accepts_gridless_single_channel():
    stack = craft(k=1)
    assert select_channels(stack, "CC").shape == (4, 1, 6, 6)


def test_cc_rejects_gridless_multichannel():
    with pytest.raises(ConfigError, match="gridless"):
        select_channels(craft(k=2), "CC")


def test_cc_rejects_ground_truth():
    with pytest.raises(ConfigError, match="UB setting"):
        select_channels(craft(k=1, flags=FLAG_GROUND_TRUTH), "CC")


def test_cc_rejects_multiplexed():
    stack = craft(k=4, grid=GRID3, multiplex={"m": 4})
    with pytest.raises(ConfigError, match="multiplexed"):
        select_channels(stack, "CC")


# --- SC -------------------------------------------------------------------

def test_sc_consumes_all_channels(corpus):
    stack = read_stack(corpus["train"])
    x = select_channels(stack, "SC")
    assert x.shape == (400, NUM_LEDS, 16, 16)
    assert np.array_equal(x, stack.payload)


def test_sc_accepts_multiplexed(mux_corpus):
    stack = read_stack(mux_corpus["stacks"])
    assert select_channels(stack, "SC").shape[1] == NUM_LEDS


def test_sc_rejects_ground_truth():
    with pytest.raises(ConfigError, match="UB setting"):
        select_channels(craft(flags=FLAG_GROUND_TRUTH), "SC")


# --- R --------------------------------------------------------------------

def test_r_accepts_reconstructions(recon_corpus):
    stack = read_stack(recon_corpus["rtrain_recon"])
    assert select_channels(stack, "R").shape == (60, 1, 16, 16)


def test_r_rejects_measurement_stacks():
    with pytest.raises(ConfigError, match="reconstructed images"):
        select_channels(craft(k=9, grid=GRID3), "R")


def test_r_rejects_ground_truth():
    with pytest.raises(ConfigError, match="UB setting"):
        select_channels(craft(k=1, flags=FLAG_GROUND_TRUTH), "R")


# --- UB -------------------------------------------------------------------

def test_ub_accepts_ground_truth():
    stack = craft(k=1, flags=FLAG_GROUND_TRUTH)
    assert select_channels(stack, "UB").shape == (4, 1, 6, 6)


def test_ub_rejects_everything_else(corpus):
    with pytest.raises(ConfigError, match="ground-truth"):
        select_channels(read_stack(corpus["train"]), "UB")


# --- MUX ------------------------------------------------------------------

def test_mux_consumes_full_stack(corpus):
    stack = read_stack(corpus["train"])
    x = select_channels(stack, "MUX", mux_m=4)
    assert x.shape == (400, NUM_LEDS, 16, 16)


def test_mux_m_bounds():
    stack = craft(k=9, grid=GRID3)
    select_channels(stack, "MUX", mux_m=9)
    with pytest.raises(ConfigError, match="out of range"):
        select_channels(stack, "MUX", mux_m=10)
    with pytest.raises(ConfigError, match="out of range"):
        select_channels(stack, "MUX", mux_m=0)


def test_mux_rejects_multiplexed(mux_corpus):
    stack = read_stack(mux_corpus["stacks"])
    with pytest.raises(ConfigError, match="already multiplexed"):
        select_channels(stack, "MUX", mux_m=4)


def test_mux_rejects_gridless():
    with pytest.raises(ConfigError, match="grid"):
        select_channels(craft(k=1), "MUX", mux_m=1)


def test_mux_rejects_ground_truth():
    with pytest.raises(ConfigError, match="ground truth"):
        select_channels(craft(k=1, flags=FLAG_GROUND_TRUTH), "MUX", mux_m=1)


def test_unknown_setting_rejected():
    with pytest.raises(ConfigError, match="unknown setting"):
        select_channels(craft(), "ALL")


# --- labels and split pairing ----------------------------------------------

def test_validate_labels_passes(corpus):
    labels = validate_labels(read_stack(corpus["train"]), 10, "train")
    assert labels.dtype == np.int64
    assert labels.min() == 0 and labels.max() == 9


@pytest.mark.parametrize("bad, fragment", [
    ([0, 1, 10, 3], "outside"),
    ([0, -1, 2, 3], "outside"),
    ([0, 1, 2, "x"], "non-integer"),
    ([0, True, 2, 3], "non-integer"),
    ([0, 1.0, 2, 3], "non-integer"),
], ids=["high", "negative", "string", "bool", "float"])
def test_validate_labels_rejects(bad, fragment):
    with pytest.raises(ConfigError, match=fragment):
        validate_labels(craft(labels=bad), 10, "train")


def test_prepare_pair_checks_shapes():
    cfg = TrainConfig(setting="SC", train_path="a", test_path="b")
    train = craft(k=9, grid=GRID3)
    test = craft(k=1)
    with pytest.raises(ConfigError, match="train records are"):
        prepare_pair(train, test, cfg, "a", "b")


def test_prepare_pair_returns_matched_arrays():
    cfg = TrainConfig(setting="SC", train_path="a", test_path="b")
    (xt, yt), (xe, ye) = prepare_pair(craft(), craft(count=2), cfg, "a", "b")
    assert xt.shape == (4, 1, 6, 6) and xe.shape == (2, 1, 6, 6)
    assert yt.tolist() == [0, 1, 2, 3] and ye.tolist() == [0, 1]
