"""Batch command-line interface.

Subcommands: simulate, reconstruct, multiplex, inspect, evaluate. Every
command reads an optional JSON config document (--config); explicit flags
win over config values. Human-readable chatter goes to stderr, machine-
readable JSON to stdout (or --out/--metrics files). Exit codes: 0 ok,
2 config/validation error, 3 I/O or container-format error, 4 numerical
error. FPM_LOG sets the log level.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import container as fpms
from .datasets import load_image_dir, parse_idx
from .errors import ConfigError, ContainerFormatError, NumericalError
from .forward import NO_NOISE, MeasurementStack, NoiseSpec, forward_multiplexed, forward_stack
from .fourier import fft2
from .geometry import LedGrid, grid_masks
from .metrics import mse, psnr
from .multiplex import group_multiplex, identity_multiplex, load_weights, max_normalize, save_weights
from .recon import ReconSettings, reconstruct

logger = logging.getLogger("fpmkit.cli")

SIMULATE_DEFAULTS = {
    "format": "idx", "labels": None, "size": None, "color": False,
    "grid_side": 5, "spacing": None, "radius": 5.0, "noise": 0.0, "seed": 0,
    "weights": None, "limit": None, "jobs": 1, "save_gt": None,
}
RECONSTRUCT_DEFAULTS = {
    "gt": None, "alpha": 1e-3, "step": 1.0, "iters": 500, "fidelity": "l1_smoothed",
    "eps_abs": 1e-8, "eps_fid": 1e-6, "no_backtracking": False,
    "init": "cc_measurement", "jobs": 1, "metrics": None,
}
EVALUATE_DEFAULTS = {"peak": 1.0, "out": None}
INSPECT_DEFAULTS = {"index": 0}


@dataclass
class ExperimentConfig:
    """Validated simulate/reconstruct parameters (flags merged over config)."""

    input: str
    out: str
    grid: LedGrid
    noise: NoiseSpec
    weights: object = None
    settings: ReconSettings | None = None
    seed: int = 0


def _merge(args, defaults, config, required=()):
    """Back-fill args parsed with default=None from the config file, then defaults."""
    merged = dict(defaults)
    merged.update({k: v for k, v in config.items() if k in merged or k in required})
    for key, value in vars(args).items():
        if value is not None and value is not False:
            merged[key] = value
        elif key in required and key not in merged:
            merged[key] = None
    for key in required:
        if merged.get(key) is None:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
    return argparse.Namespace(**merged)


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return doc


def _json_value(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def _sanitize(doc):
    """Recursively replace non-finite floats for strict-JSON output."""
    if isinstance(doc, dict):
        return {k: _sanitize(v) for k, v in doc.items()}
    if isinstance(doc, list):
        return [_sanitize(v) for v in doc]
    return _json_value(doc)


def _emit(doc, out_path=None):
    text = json.dumps(_sanitize(doc), sort_keys=True, indent=2, allow_nan=False)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _noise_from_sigma(sigma, seed):
    if sigma and sigma > 0:
        return NoiseSpec(kind="gaussian", sigma=float(sigma), seed=int(seed))
    return NoiseSpec(kind="none", sigma=0.0, seed=int(seed))


def _parallel_map(fn, items, jobs):
    if jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --- simulate -------------------------------------------------------------

def _load_records(ns):
    if ns.format == "idx":
        records = parse_idx(ns.input, ns.labels)
    elif ns.format == "dir":
        records = load_image_dir(ns.input, size=ns.size, grayscale=not ns.color)
    else:
        raise ConfigError(f"unknown input format {ns.format!r}")
    records = list(records)
    if ns.limit is not None:
        records = records[: int(ns.limit)]
    if not records:
        raise ConfigError(f"{ns.input}: no records to simulate")
    return records


def _validate_grid(grid, shape):
    masks = grid_masks(grid, shape)
    if any(m.popcount() == 0 for m in masks):
        raise ConfigError(
            f"grid (side={grid.grid_side}, spacing={grid.spacing}, radius={grid.radius}) "
            f"places pupils entirely outside the {shape[0]}x{shape[1]} frequency grid")


def cmd_simulate(args, config):
    ns = _merge(args, SIMULATE_DEFAULTS, config, required=("input", "out"))
    start = time.monotonic()
    grid = LedGrid(grid_side=int(ns.grid_side), spacing=ns.spacing, radius=float(ns.radius))
    base_noise = _noise_from_sigma(ns.noise, ns.seed)
    beta = load_weights(ns.weights) if ns.weights else None
    if beta is not None and beta.k != grid.num_leds:
        raise ConfigError(f"weight file has k={beta.k} columns but the grid has "
                          f"{grid.num_leds} LEDs")
    records = _load_records(ns)
    shape = records[0].image.shape[:2]
    if any(r.image.shape[:2] != shape for r in records):
        raise ConfigError("records have inconsistent image dimensions")
    _validate_grid(grid, shape)

    channels = 3 if (ns.color and records[0].is_color) else 1

    def simulate_one(idx_record):
        i, record = idx_record
        noise = base_noise.derive(i)
        planes = ([record.image[..., c] for c in range(3)] if channels == 3
                  else [record.image if not record.is_color else record.image[..., 0]])
        parts = []
        for plane in planes:
            if beta is not None:
                stack = forward_multiplexed(plane, grid, beta, noise, source_id=record.id)
            else:
                stack = forward_stack(plane, grid, noise, source_id=record.id)
            parts.append(stack.measurements)
        return np.concatenate(parts, axis=0).astype(np.float32)

    stacks = _parallel_map(simulate_one, list(enumerate(records)), int(ns.jobs))
    payload = np.stack(stacks, axis=0)
    out = fpms.StackContainer(
        payload=payload, grid=grid, noise=base_noise,
        multiplex=None if beta is None else {"m": beta.m, "source": str(ns.weights)},
        source_ids=[r.id for r in records], labels=[r.label for r in records],
        extra={"color_channels": channels})
    fpms.write_stack(out, ns.out)
    logger.info("wrote %d stacks to %s", len(records), ns.out)

    if ns.save_gt:
        gt_planes = np.stack([
            (np.moveaxis(r.image, 2, 0) if channels == 3 else r.image[None]).astype(np.float32)
            for r in records], axis=0)
        gt = fpms.StackContainer(
            payload=gt_planes, grid=None, noise=None,
            source_ids=[r.id for r in records], labels=[r.label for r in records],
            flags=fpms.FLAG_GROUND_TRUTH, extra={"color_channels": channels})
        fpms.write_stack(gt, ns.save_gt)

    _emit({"count": len(records), "k": int(payload.shape[1]),
           "height": int(shape[0]), "width": int(shape[1]),
           "out": str(ns.out), "elapsed": round(time.monotonic() - start, 6)})
    return 0


# --- reconstruct ----------------------------------------------------------

def cmd_reconstruct(args, config):
    ns = _merge(args, RECONSTRUCT_DEFAULTS, config, required=("input", "out"))
    data = fpms.read_stack(ns.input)
    if data.grid is None:
        raise ConfigError(f"{ns.input}: container has no LED-grid metadata; "
                          "cannot rebuild pupil masks")
    if data.multiplex is not None:
        raise ConfigError(f"{ns.input}: multiplexed containers cannot be reconstructed")
    if int(data.extra.get("color_channels", 1)) != 1:
        raise ConfigError(f"{ns.input}: only single-channel containers are supported")
    settings = ReconSettings(alpha=float(ns.alpha), iterations=int(ns.iters),
                             step=float(ns.step), fidelity=ns.fidelity,
                             eps_abs=float(ns.eps_abs), eps_fid=float(ns.eps_fid),
                             backtracking=not ns.no_backtracking, init=ns.init)

    gt = None
    if ns.gt:
        gt = fpms.read_stack(ns.gt)
        if gt.num_channels != 1:
            raise ConfigError(f"{ns.gt}: ground-truth container must have K=1")
        if gt.image_shape != data.image_shape or gt.num_records != data.num_records:
            raise ConfigError("ground-truth container dimensions do not match the input")
        if gt.source_ids != data.source_ids:
            raise ConfigError("ground-truth record ids do not match the input")

    def recon_one(i):
        stack = MeasurementStack(data.payload[i].astype(np.float64), grid=data.grid,
                                 noise=NO_NOISE, source_id=data.source_ids[i])
        return reconstruct(stack, settings)

    results = _parallel_map(recon_one, range(data.num_records), int(ns.jobs))

    estimates = np.stack([r.estimate.astype(np.float32) for r in results], axis=0)[:, None]
    out = fpms.StackContainer(payload=estimates, grid=None, noise=None,
                              source_ids=list(data.source_ids), labels=list(data.labels),
                              extra={"reconstruction": {
                                  "alpha": settings.alpha, "iterations": settings.iterations,
                                  "step": settings.step, "fidelity": settings.fidelity,
                                  "source": str(ns.input)}})
    fpms.write_stack(out, ns.out)

    per_record = []
    for i, result in enumerate(results):
        entry = {"id": data.source_ids[i], "label": data.labels[i],
                 "final_energy": float(result.energy_trace[-1]),
                 "iterations": len(result.energy_trace),
                 "stalled": result.stalled}
        if gt is not None:
            ref = gt.payload[i, 0].astype(np.float64)
            entry["psnr"] = psnr(result.estimate, ref, peak=1.0)
            entry["mse"] = mse(result.estimate, ref)
        per_record.append(entry)
    doc = {"records": per_record, "out": str(ns.out)}
    if gt is not None:
        values = [e["psnr"] for e in per_record]
        doc["aggregate"] = {"count": len(values),
                            "mean_psnr": float(np.mean(values)),
                            "median_psnr": float(np.median(values))}
    if ns.metrics:
        _emit(doc, ns.metrics)
    _emit(doc)
    return 0


# --- multiplex ------------------------------------------------------------

def cmd_multiplex(args, config):
    action = args.action
    if action == "identity":
        if args.k is None:
            raise ConfigError("multiplex identity needs --k")
        matrix = identity_multiplex(int(args.k))
    elif action == "random":
        if args.k is None or args.m is None:
            raise ConfigError("multiplex random needs --k and --m")
        matrix = group_multiplex(int(args.k), int(args.m), seed=int(args.seed or 0))
    elif action in ("validate", "normalize"):
        if not args.weights:
            raise ConfigError(f"multiplex {action} needs --weights")
        matrix = load_weights(args.weights)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown multiplex action {action!r}")

    if action == "normalize" or args.max_normalize:
        matrix = max_normalize(matrix)
    if action != "validate":
        if not args.out:
            raise ConfigError("multiplex: --out is required")
        save_weights(matrix, args.out)
    _emit({"m": matrix.m, "k": matrix.k,
           "min": float(matrix.weights.min()), "max": float(matrix.weights.max()),
           "out": str(args.out) if args.out else None})
    return 0


# --- inspect --------------------------------------------------------------

def _save_gray(array, path):
    """Normalize a non-negative array to 8-bit grayscale and write a PNG."""
    peak = float(array.max())
    scaled = np.zeros_like(array, dtype=np.float64) if peak == 0 else array / peak
    Image.fromarray(np.round(scaled * 255.0).astype(np.uint8), mode="L").save(path)


def contact_sheet(measurements):
    """Tile (K, H, W) measurements into a ceil(sqrt(K))-column mosaic."""
    k, h, w = measurements.shape
    cols = math.isqrt(k)
    if cols * cols < k:
        cols += 1
    rows = (k + cols - 1) // cols
    sheet = np.zeros((rows * h, cols * w))
    for i in range(k):
        r, c = divmod(i, cols)
        sheet[r * h:(r + 1) * h, c * w:(c + 1) * w] = measurements[i]
    return sheet


def cmd_inspect(args, config):
    ns = _merge(args, INSPECT_DEFAULTS, config, required=("input", "out"))
    data = fpms.read_stack(ns.input)
    index = int(ns.index)
    if not (0 <= index < data.num_records):
        raise ConfigError(f"record index {index} out of range 0..{data.num_records - 1}")
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    record = data.payload[index].astype(np.float64)
    _save_gray(contact_sheet(record), out_dir / "measurements.png")

    cc = record[record.shape[0] // 2]
    spectrum = np.log1p(np.abs(fft2(cc)))
    _save_gray(spectrum, out_dir / "spectrum.png")

    written = [str(out_dir / "measurements.png"), str(out_dir / "spectrum.png")]
    if data.grid is not None:
        layout = np.zeros(data.image_shape)
        for mask in grid_masks(data.grid, data.image_shape):
            layout += mask.support
        _save_gray(layout, out_dir / "mask_layout.png")
        written.append(str(out_dir / "mask_layout.png"))

    _emit({"index": index, "k": data.num_channels, "files": written})
    return 0


# --- evaluate -------------------------------------------------------------

def cmd_evaluate(args, config):
    ns = _merge(args, EVALUATE_DEFAULTS, config, required=("recon", "gt"))
    recon_c = fpms.read_stack(ns.recon)
    gt_c = fpms.read_stack(ns.gt)
    if recon_c.payload.shape != gt_c.payload.shape:
        raise ConfigError(
            f"shape mismatch: reconstructions {recon_c.payload.shape} vs "
            f"ground truth {gt_c.payload.shape}")
    if recon_c.source_ids != gt_c.source_ids:
        raise ConfigError("record ids of the two containers do not match")
    peak = float(ns.peak)
    per_record = []
    for i in range(recon_c.num_records):
        a = recon_c.payload[i].astype(np.float64)
        b = gt_c.payload[i].astype(np.float64)
        per_record.append({"id": recon_c.source_ids[i], "label": recon_c.labels[i],
                           "psnr": psnr(a, b, peak=peak), "mse": mse(a, b)})
    values = [e["psnr"] for e in per_record]
    errors = [e["mse"] for e in per_record]
    doc = {
        "records": per_record,
        "aggregate": {"count": len(values),
                      "mean_psnr": float(np.mean(values)),
                      "median_psnr": float(np.median(values)),
                      "mean_mse": float(np.mean(errors))}}
    _emit(doc, ns.out)
    if ns.out:
        _emit(doc)
    return 0


# --- entry point ----------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="fpmkit",
                                     description="FPM measurement simulation, multiplexing, "
                                                 "and TV-regularized reconstruction")
    parser.add_argument("--config", help="JSON config document; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate measurement stacks from a dataset")
    p.add_argument("--input")
    p.add_argument("--format", choices=["idx", "dir"])
    p.add_argument("--labels")
    p.add_argument("--size", type=int)
    p.add_argument("--color", action="store_true", default=None)
    p.add_argument("--grid-side", type=int, dest="grid_side")
    p.add_argument("--spacing", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--noise", type=float, help="gaussian sigma; 0 disables noise")
    p.add_argument("--seed", type=int)
    p.add_argument("--weights", help="multiplex weight JSON file")
    p.add_argument("--limit", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--save-gt", dest="save_gt", help="also write ground truth as a K=1 container")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct images from a stack container")
    p.add_argument("--input")
    p.add_argument("--gt", help="ground-truth container for PSNR reporting")
    p.add_argument("--alpha", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--fidelity", choices=["l1_smoothed", "l2"])
    p.add_argument("--eps-abs", type=float, dest="eps_abs")
    p.add_argument("--eps-fid", type=float, dest="eps_fid")
    p.add_argument("--no-backtracking", action="store_true", default=None, dest="no_backtracking")
    p.add_argument("--init", choices=["zeros", "cc_measurement"])
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="estimates container (K=1)")
    p.add_argument("--metrics", help="also write the metrics JSON here")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("multiplex", help="create, validate, or normalize weight files")
    p.add_argument("action", choices=["identity", "random", "validate", "normalize"])
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--weights", help="input weight file (validate/normalize)")
    p.add_argument("--max-normalize", action="store_true", dest="max_normalize")
    p.add_argument("--out")
    p.set_defaults(func=cmd_multiplex)

    p = sub.add_parser("inspect", help="render mask layout and a record's measurements")
    p.add_argument("--input")
    p.add_argument("--index", type=int)
    p.add_argument("--out", help="output directory for PNG files")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("evaluate", help="PSNR/MSE between two K-matched containers")
    p.add_argument("--recon")
    p.add_argument("--gt")
    p.add_argument("--peak", type=float)
    p.add_argument("--out", help="write metrics JSON here instead of stdout only")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    logging.basicConfig(stream=sys.stderr,
                        level=os.environ.get("FPM_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except (ConfigError, ValueError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ContainerFormatError as exc:
        print(f"container error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
