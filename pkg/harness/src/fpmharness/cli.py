"""fpm-harness: train classifiers on FPMS measurement containers.

JSON results go to stdout; log chatter goes to stderr (FPM_LOG=INFO to
raise verbosity). Exit codes: 0 ok, 2 bad configuration, 3 I/O or
container-format error.
"""

import argparse
import json
import logging
import os
import sys

from .config import SETTINGS, TrainConfig
from .errors import ConfigError, ContainerFormatError
from .training import train

logger = logging.getLogger("fpmharness")

TRAIN_DEFAULTS = {
    "setting": None, "train": None, "test": None, "dataset": "custom",
    "mux_m": 0, "num_classes": 10, "lr": 1e-3, "epochs": 20,
    "batch_size": 128, "seed": 0, "pretrained": False,
    "report": None, "export_weights": None,
}


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


def cmd_train(args, config):
    ns = _merge(args, TRAIN_DEFAULTS, config, required=("setting", "train", "test"))
    cfg = TrainConfig(
        setting=str(ns.setting).upper(), train_path=ns.train, test_path=ns.test,
        dataset=ns.dataset, mux_m=int(ns.mux_m), num_classes=int(ns.num_classes),
        lr=float(ns.lr), epochs=int(ns.epochs), batch_size=int(ns.batch_size),
        seed=int(ns.seed), pretrained=bool(ns.pretrained),
        report_path=ns.report, weights_path=ns.export_weights)
    result = train(cfg)
    print(json.dumps(result.report, sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fpm-harness",
        description="Classifier experiments on FPMS measurement containers.")
    parser.add_argument("--config", help="JSON config; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one classifier and report accuracy")
    p.add_argument("--setting", choices=[s for s in SETTINGS] + [s.lower() for s in SETTINGS])
    p.add_argument("--train", help="training FPMS container")
    p.add_argument("--test", help="test FPMS container")
    p.add_argument("--dataset", help="dataset name recorded in the report")
    p.add_argument("--mux-m", dest="mux_m", type=int,
                   help="MUX output channels per color plane")
    p.add_argument("--num-classes", dest="num_classes", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--pretrained", action="store_true", default=None)
    p.add_argument("--report", help="write the accuracy report JSON here")
    p.add_argument("--export-weights", dest="export_weights",
                   help="write the learned multiplex weights JSON here (MUX only)")
    p.set_defaults(func=cmd_train)
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


if __name__ == "__main__":
    sys.exit(main())
