"""FPMS binary container: batches of measurement stacks with metadata.

Layout (all integers little-endian):

    magic   4s   b"FPMS"
    version u32  1
    count   u32  number of records
    height  u16
    width   u16
    k       u16  channels per record
    dtype   u8   0 = float32
    flags   u8   bit 0: on-axis (CC) only; bit 1: ground-truth images
    mlen    u32  length of the UTF-8 JSON metadata block
    meta    mlen bytes of JSON
    payload count*k*height*width little-endian float32

The metadata block records the LED grid, noise spec, multiplex reference,
per-record source ids and labels, plus free-form extras. The header is
validated in full before any payload is touched.
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ContainerFormatError
from .forward import NoiseSpec
from .geometry import LedGrid

MAGIC = b"FPMS"
VERSION = 1
DTYPE_F32 = 0
FLAG_ONAXIS_ONLY = 0x01
FLAG_GROUND_TRUTH = 0x02

_HEADER = struct.Struct("<4sIIHHHBB")


@dataclass
class StackContainer:
    """In-memory image of one FPMS file."""

    payload: np.ndarray  # (N, K, H, W) float32
    grid: LedGrid | None = None
    noise: NoiseSpec | None = None
    multiplex: dict | None = None  # {"m": int, "source": str} when multiplexed
    source_ids: list[str] = field(default_factory=list)
    labels: list[int] = field(default_factory=list)
    flags: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.payload, dtype=np.float32)
        if p.ndim != 4:
            raise ValueError(f"payload must be (N, K, H, W), got shape {p.shape}")
        n = p.shape[0]
        if not self.source_ids:
            self.source_ids = [f"record-{i:05d}" for i in range(n)]
        if not self.labels:
            self.labels = [0] * n
        if len(self.source_ids) != n or len(self.labels) != n:
            raise ValueError("source_ids/labels length must match the record count")
        self.payload = p

    @property
    def num_records(self):
        return self.payload.shape[0]

    @property
    def num_channels(self):
        return self.payload.shape[1]

    @property
    def image_shape(self):
        return self.payload.shape[2:]

    @property
    def is_ground_truth(self):
        return bool(self.flags & FLAG_GROUND_TRUTH)


def _metadata_doc(container):
    meta = {
        "grid": None if container.grid is None else {
            "side": container.grid.grid_side,
            "spacing": container.grid.spacing,
            "radius": container.grid.radius,
        },
        "noise": None if container.noise is None else {
            "kind": container.noise.kind,
            "sigma": container.noise.sigma,
            "seed": container.noise.seed,
        },
        "multiplex": container.multiplex,
        "source_ids": container.source_ids,
        "labels": container.labels,
    }
    meta.update(container.extra)
    return meta


def write_stack(container, path):
    """Serialize a StackContainer; same container, same bytes."""
    flags = container.flags
    if (container.num_channels == 1 and container.grid is not None
            and container.multiplex is None and not container.is_ground_truth):
        flags |= FLAG_ONAXIS_ONLY
    meta = json.dumps(_metadata_doc(container), sort_keys=True,
                      separators=(",", ":")).encode("utf-8")
    n, k = container.num_records, container.num_channels
    h, w = container.image_shape
    header = _HEADER.pack(MAGIC, VERSION, n, h, w, k, DTYPE_F32, flags)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)
        fh.write(np.ascontiguousarray(container.payload, dtype="<f4").tobytes())


def read_stack(path):
    """Parse and validate an FPMS file into a StackContainer."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size + 4:
        raise ContainerFormatError(f"{path}: file too short for an FPMS header")
    magic, version, count, h, w, k, dtype, flags = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ContainerFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ContainerFormatError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_F32:
        raise ContainerFormatError(f"{path}: unknown dtype tag {dtype}")
    (mlen,) = struct.unpack_from("<I", raw, _HEADER.size)
    meta_start = _HEADER.size + 4
    payload_start = meta_start + mlen
    expected_payload = count * k * h * w * 4
    if len(raw) != payload_start + expected_payload:
        raise ContainerFormatError(
            f"{path}: payload is {max(len(raw) - payload_start, 0)} bytes, "
            f"expected {count}x{k}x{h}x{w}x4={expected_payload}")
    try:
        meta = json.loads(raw[meta_start:payload_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerFormatError(f"{path}: bad metadata block: {exc}") from exc
    if not isinstance(meta, dict):
        raise ContainerFormatError(f"{path}: metadata must be a JSON object")

    grid = None
    if meta.get("grid") is not None:
        g = meta["grid"]
        try:
            grid = LedGrid(grid_side=g["side"], spacing=g["spacing"], radius=g["radius"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContainerFormatError(f"{path}: bad grid metadata: {exc}") from exc
    noise = None
    if meta.get("noise") is not None:
        ns = meta["noise"]
        try:
            noise = NoiseSpec(kind=ns["kind"], sigma=ns["sigma"], seed=ns["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContainerFormatError(f"{path}: bad noise metadata: {exc}") from exc
    multiplex = meta.get("multiplex")

    source_ids = meta.get("source_ids", [])
    labels = meta.get("labels", [])
    if len(source_ids) != count or len(labels) != count:
        raise ContainerFormatError(
            f"{path}: metadata lists {len(source_ids)} ids/{len(labels)} labels "
            f"for {count} records")

    if grid is not None and not (flags & FLAG_GROUND_TRUTH):
        channels_per_led = int(meta.get("color_channels", 1))
        expected_k = (multiplex["m"] if multiplex else grid.num_leds) * channels_per_led
        if k != expected_k:
            raise ContainerFormatError(
                f"{path}: header K={k} inconsistent with metadata (expected {expected_k})")

    payload = np.frombuffer(raw, dtype="<f4", offset=payload_start).reshape(count, k, h, w)
    extra = {key: val for key, val in meta.items()
             if key not in ("grid", "noise", "multiplex", "source_ids", "labels")}
    return StackContainer(payload=payload.copy(), grid=grid, noise=noise,
                          multiplex=multiplex, source_ids=list(source_ids),
                          labels=list(labels), flags=flags, extra=extra)
