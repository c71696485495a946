"""Read-only access to FPMS measurement containers.

The container file is the interface between the simulator and this
harness, so the layout is implemented here from its documented layout
rather than by importing the producer. All integers are little-endian:

    magic    4s   b"FPMS"
    version  u32  1
    count    u32  records
    height   u16  rows per channel
    width    u16  columns per channel
    k        u16  channels per record
    dtype    u8   0 = float32
    flags    u8   bit 0 on-axis only, bit 1 ground truth
    mlen     u32  metadata length in bytes
    meta     ...  UTF-8 JSON object (grid, noise, multiplex, ids, labels)
    payload  ...  count*k*height*width little-endian float32

Malformed files raise ContainerFormatError; the payload is never touched
before the header and metadata have been validated.
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ContainerFormatError

MAGIC = b"FPMS"
VERSION = 1
DTYPE_F32 = 0
FLAG_ONAXIS_ONLY = 0x01
FLAG_GROUND_TRUTH = 0x02

_HEADER = struct.Struct("<4sIIHHHBB")
_KNOWN_META = ("grid", "noise", "multiplex", "source_ids", "labels")


@dataclass
class StackFile:
    """One parsed container: payload plus the metadata the harness uses."""

    payload: np.ndarray  # (count, k, h, w) float32
    source_ids: list
    labels: list
    grid: dict | None = None  # {"side", "spacing", "radius"}
    noise: dict | None = None  # {"kind", "sigma", "seed"}
    multiplex: dict | None = None  # {"m", ...}
    flags: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def num_records(self):
        return self.payload.shape[0]

    @property
    def num_channels(self):
        return self.payload.shape[1]

    @property
    def image_shape(self):
        return self.payload.shape[2], self.payload.shape[3]

    @property
    def is_ground_truth(self):
        return bool(self.flags & FLAG_GROUND_TRUTH)

    @property
    def color_channels(self):
        return int(self.extra.get("color_channels", 1))

    @property
    def num_leds(self):
        """LEDs per color plane, or None for gridless containers."""
        if self.grid is None:
            return None
        return int(self.grid["side"]) ** 2

    @property
    def radius(self):
        return None if self.grid is None else float(self.grid["radius"])


def _grid_meta(path, raw_grid):
    if raw_grid is None:
        return None
    try:
        side = int(raw_grid["side"])
        spacing = float(raw_grid["spacing"])
        radius = float(raw_grid["radius"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ContainerFormatError(f"{path}: bad grid metadata: {exc}") from exc
    if side < 1 or side % 2 == 0 or radius <= 0 or spacing <= 0:
        raise ContainerFormatError(
            f"{path}: grid metadata out of range "
            f"(side={side}, spacing={spacing}, radius={radius})")
    return {"side": side, "spacing": spacing, "radius": radius}


def read_stack(path):
    """Parse one FPMS file into a StackFile."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size + 4:
        raise ContainerFormatError(f"{path}: file shorter than the FPMS header")
    magic, version, count, h, w, k, dtype, flags = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ContainerFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ContainerFormatError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_F32:
        raise ContainerFormatError(f"{path}: unsupported dtype code {dtype}")

    (mlen,) = struct.unpack_from("<I", raw, _HEADER.size)
    meta_start = _HEADER.size + 4
    payload_start = meta_start + mlen
    expected_payload = count * k * h * w * 4
    if payload_start + expected_payload != len(raw):
        raise ContainerFormatError(
            f"{path}: payload is {max(len(raw) - payload_start, 0)} bytes, "
            f"expected {count}x{k}x{h}x{w}x4={expected_payload}")
    try:
        meta = json.loads(raw[meta_start:payload_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerFormatError(f"{path}: bad metadata block: {exc}") from exc
    if not isinstance(meta, dict):
        raise ContainerFormatError(f"{path}: metadata must be a JSON object")

    source_ids = meta.get("source_ids", [])
    labels = meta.get("labels", [])
    if len(source_ids) != count or len(labels) != count:
        raise ContainerFormatError(
            f"{path}: metadata lists {len(source_ids)} ids/{len(labels)} labels "
            f"for {count} records")

    grid = _grid_meta(path, meta.get("grid"))
    multiplex = meta.get("multiplex")
    if multiplex is not None and not isinstance(multiplex, dict):
        raise ContainerFormatError(f"{path}: multiplex metadata must be an object")
    extra = {key: val for key, val in meta.items() if key not in _KNOWN_META}

    color = int(extra.get("color_channels", 1))
    if grid is not None and not (flags & FLAG_GROUND_TRUTH):
        per_plane = int(multiplex["m"]) if multiplex else int(grid["side"]) ** 2
        if k != per_plane * color:
            raise ContainerFormatError(
                f"{path}: header K={k} inconsistent with metadata "
                f"(expected {per_plane * color})")

    payload = np.frombuffer(raw, dtype="<f4", offset=payload_start)
    payload = payload.reshape(count, k, h, w).copy()
    if not np.isfinite(payload).all():
        raise ContainerFormatError(f"{path}: payload contains non-finite values")
    return StackFile(payload=payload, source_ids=list(source_ids),
                     labels=list(labels), grid=grid, noise=meta.get("noise"),
                     multiplex=multiplex, flags=flags, extra=extra)
