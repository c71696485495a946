"""Session fixtures: a synthetic corpus pushed through the simulator CLI.

The harness talks to the simulator only through files, so the fixtures
are produced by invoking the installed ``fpmkit`` executable on IDX
inputs we write here. Classes are gratings whose spatial frequency lies
outside the on-axis pupil (radius 4.5) but inside a side pupil together
with DC, so the center channel is class-blind while the full stack is
separable. That makes the CC-vs-SC trend a property of the data, not of
training luck.
"""

import json
import shutil
import struct
import subprocess

import numpy as np
import pytest

FPMKIT = shutil.which("fpmkit")
SIZE = 16
GRID_ARGS = ["--grid-side", "3", "--spacing", "4", "--radius", "4.5"]
GRID_META = {"side": 3, "spacing": 4.0, "radius": 4.5}
NUM_LEDS = 9
CLASS_FREQS = [(6, 0), (0, 6), (5, 3), (3, 5), (6, 2),
               (2, 6), (7, 0), (0, 7), (5, -3), (-3, 5)]


def make_raw(count=2, k=1, h=4, w=5, meta=None, flags=0, payload=None,
             version=1, dtype=0, magic=b"FPMS"):
    """Assemble container bytes directly; defaults form a valid file."""
    if meta is None:
        meta = {"grid": None, "noise": None, "multiplex": None,
                "source_ids": [f"r{i:02d}" for i in range(count)],
                "labels": [i % 10 for i in range(count)]}
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    if payload is None:
        payload = np.linspace(0.0, 1.0, count * k * h * w, dtype="<f4")
    header = struct.pack("<4sIIHHHBB", magic, version, count, h, w, k, dtype, flags)
    return header + struct.pack("<I", len(blob)) + blob + payload.tobytes()


def write_raw(dirpath, raw, name="stack.fpms"):
    path = dirpath / name
    path.write_bytes(raw)
    return path


def run_fpmkit(*args):
    if FPMKIT is None:
        raise RuntimeError("fpmkit CLI not on PATH; install the simulator first")
    proc = subprocess.run([FPMKIT, *map(str, args)],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"fpmkit {args[0]} failed ({proc.returncode}): "
                           f"{proc.stderr.strip()}")
    return json.loads(proc.stdout)


def grating_images(count, seed):
    """(count, SIZE, SIZE) uint8 images, label i%10, high-frequency classes."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE]
    images = np.empty((count, SIZE, SIZE), dtype=np.uint8)
    labels = (np.arange(count) % 10).astype(np.uint8)
    for i in range(count):
        fy, fx = CLASS_FREQS[labels[i]]
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(0.28, 0.35)
        img = 0.5 + amp * np.cos(2.0 * np.pi * (fy * yy + fx * xx) / SIZE + phase)
        images[i] = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    return images, labels


def write_idx(dirpath, name, images, labels):
    count, h, w = images.shape
    img_path = dirpath / name
    with open(img_path, "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, count, h, w))
        fh.write(images.tobytes())
    lbl_path = dirpath / f"{name}.labels"
    with open(lbl_path, "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, count))
        fh.write(labels.astype(np.uint8).tobytes())
    return img_path, lbl_path


def simulate_split(dirpath, name, count, seed, noise="0.02", extra=()):
    images, labels = grating_images(count, seed)
    img_path, lbl_path = write_idx(dirpath, name, images, labels)
    out = dirpath / f"{name}.fpms"
    gt = dirpath / f"{name}_gt.fpms"
    run_fpmkit("simulate", "--format", "idx", "--input", img_path,
               "--labels", lbl_path, *GRID_ARGS, "--noise", noise,
               "--seed", seed, "--out", out, "--save-gt", gt,
               "--jobs", "2", *extra)
    return out, gt, img_path, lbl_path


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    train, train_gt, train_idx, train_lbl = simulate_split(root, "trainimgs", 400, 11)
    test, test_gt, test_idx, test_lbl = simulate_split(root, "testimgs", 200, 12)
    return {
        "root": root,
        "train": train, "train_gt": train_gt,
        "test": test, "test_gt": test_gt,
        "train_idx": train_idx, "train_lbl": train_lbl,
        "test_idx": test_idx, "test_lbl": test_lbl,
    }


@pytest.fixture(scope="session")
def recon_corpus(tmp_path_factory):
    """Smaller noiseless split reconstructed back to images (R setting)."""
    root = tmp_path_factory.mktemp("recon")
    paths = {}
    for name, count, seed in (("rtrain", 60, 21), ("rtest", 30, 22)):
        stacks, gt, _, _ = simulate_split(root, name, count, seed, noise="0")
        recon = root / f"{name}_recon.fpms"
        run_fpmkit("reconstruct", "--input", stacks, "--alpha", "0",
                   "--fidelity", "l2", "--iters", "40", "--out", recon,
                   "--jobs", "2")
        paths[name] = stacks
        paths[f"{name}_gt"] = gt
        paths[f"{name}_recon"] = recon
    return paths


@pytest.fixture(scope="session")
def mux_corpus(tmp_path_factory, corpus):
    """The train split re-simulated through an identity multiplex file."""
    root = tmp_path_factory.mktemp("mux")
    from fpmharness.weights_io import save_weights
    beta_path = root / "identity.json"
    save_weights(np.eye(NUM_LEDS), beta_path)
    out = root / "train_mux.fpms"
    run_fpmkit("simulate", "--format", "idx", "--input", corpus["train_idx"],
               "--labels", corpus["train_lbl"], *GRID_ARGS, "--noise", "0.02",
               "--seed", "11", "--out", out, "--weights", beta_path)
    return {"weights": beta_path, "stacks": out}
