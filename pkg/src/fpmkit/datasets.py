"""Ground-truth data ingestion: MNIST-style IDX files and raster image directories."""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

logger = logging.getLogger("fpmkit.datasets")

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
NUM_CLASSES = 10

LUMA_NUMERATORS = (299.0, 587.0, 114.0)  # ITU-R 601 weights, x1000


@dataclass
class DatasetRecord:
    """One normalized ground-truth image with its class label and stable id."""

    image: np.ndarray  # (H, W) or (H, W, 3) float64 in [0, 1]
    label: int
    id: str

    def __post_init__(self):
        img = np.asarray(self.image, dtype=np.float64)
        if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] != 3):
            raise ValueError(f"image must be (H, W) or (H, W, 3), got shape {img.shape}")
        if not np.all(np.isfinite(img)):
            raise ValueError(f"record {self.id}: image contains non-finite values")
        if img.size and (img.min() < 0.0 or img.max() > 1.0):
            raise ValueError(f"record {self.id}: image values outside [0, 1]")
        if not (0 <= self.label < NUM_CLASSES):
            raise ValueError(f"record {self.id}: label {self.label} outside 0..{NUM_CLASSES - 1}")
        self.image = img

    @property
    def is_color(self):
        return self.image.ndim == 3


def _read_idx_images(path):
    data = Path(path).read_bytes()
    if len(data) < 16:
        raise ValueError(f"{path}: truncated IDX image header")
    magic, count, rows, cols = struct.unpack(">IIII", data[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise ValueError(f"{path}: bad IDX image magic 0x{magic:08x}")
    expected = 16 + count * rows * cols
    if len(data) != expected:
        raise ValueError(f"{path}: payload is {len(data) - 16} bytes, "
                         f"expected {count}x{rows}x{cols}={expected - 16}")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=16).reshape(count, rows, cols)
    return pixels


def _read_idx_labels(path):
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise ValueError(f"{path}: truncated IDX label header")
    magic, count = struct.unpack(">II", data[:8])
    if magic != IDX_LABEL_MAGIC:
        raise ValueError(f"{path}: bad IDX label magic 0x{magic:08x}")
    if len(data) != 8 + count:
        raise ValueError(f"{path}: payload is {len(data) - 8} bytes, expected {count}")
    return np.frombuffer(data, dtype=np.uint8, offset=8)


def parse_idx(images_path, labels_path=None):
    """Stream DatasetRecords from an IDX image file, optionally paired with labels.

    Pixel bytes are scaled to [0, 1] by /255. Without a labels file every
    record gets label 0.
    """
    images = _read_idx_images(images_path)
    labels = None
    if labels_path is not None:
        labels = _read_idx_labels(labels_path)
        if len(labels) != len(images):
            raise ValueError(f"{images_path} has {len(images)} images but "
                             f"{labels_path} has {len(labels)} labels")
    stem = Path(images_path).stem
    for i in range(len(images)):
        label = int(labels[i]) if labels is not None else 0
        yield DatasetRecord(image=images[i].astype(np.float64) / 255.0,
                            label=label, id=f"{stem}-{i:05d}")


def bilinear_resize(image, out_h, out_w):
    """Separable bilinear resize with half-pixel-aligned sample centers.

    Source coordinate of output pixel d along an axis of length n_in resized
    to n_out is (d + 0.5) * n_in / n_out - 0.5, clamped to the valid range.
    Works on (H, W) and (H, W, C) arrays; no antialiasing.
    """
    image = np.asarray(image, dtype=np.float64)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target size must be >= 1, got {out_h}x{out_w}")

    def axis_weights(n_in, n_out):
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1.0)
        lo = np.floor(src).astype(np.intp)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = src - lo
        return lo, hi, frac

    lo, hi, fr = axis_weights(image.shape[0], out_h)
    fr = fr.reshape(-1, *([1] * (image.ndim - 1)))
    tmp = image[lo] * (1.0 - fr) + image[hi] * fr
    lo, hi, fr = axis_weights(image.shape[1], out_w)
    fr = fr.reshape(1, -1, *([1] * (image.ndim - 2)))
    return tmp[:, lo] * (1.0 - fr) + tmp[:, hi] * fr


def to_grayscale(image):
    """ITU-R 601 luma of an (H, W, 3) image in [0, 1]; 2-D images pass through.

    Written as (299R + 587G + 114B)/1000 so neutral inputs (R=G=B) survive
    exactly.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    r, g, b = LUMA_NUMERATORS
    return (r * image[..., 0] + g * image[..., 1] + b * image[..., 2]) / 1000.0


def _decode_raster(path):
    with Image.open(path) as img:
        img = img.convert("RGB")
        return np.asarray(img, dtype=np.float64) / 255.0


def load_image_dir(path, size=None, grayscale=True):
    """Stream DatasetRecords from a directory of class-named subdirectories.

    Classes are the sorted subdirectory names (at most 10); files within a
    class are visited in sorted order, so two runs over the same tree yield
    identical record sequences. Undecodable files are skipped with a warning.
    """
    root = Path(path)
    if not root.is_dir():
        raise ValueError(f"{path}: not a directory")
    class_dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not class_dirs:
        raise ValueError(f"{path}: no class subdirectories found")
    if len(class_dirs) > NUM_CLASSES:
        raise ValueError(f"{path}: {len(class_dirs)} classes exceed the supported {NUM_CLASSES}")
    for label, class_dir in enumerate(class_dirs):
        produced = 0
        skipped = 0
        for file in sorted(p for p in class_dir.iterdir() if p.is_file()):
            try:
                image = _decode_raster(file)
            except (UnidentifiedImageError, OSError):
                logger.warning("skipping undecodable file %s", file)
                skipped += 1
                continue
            if size is not None:
                image = bilinear_resize(image, size, size)
            if grayscale:
                image = to_grayscale(image)
            image = np.clip(image, 0.0, 1.0)
            yield DatasetRecord(image=image, label=label,
                                id=f"{class_dir.name}/{file.name}")
            produced += 1
        if produced == 0:
            raise ValueError(f"{class_dir}: class directory yielded no usable images "
                             f"({skipped} skipped)")


def shuffle_split(records, test_fraction=0.2, seed=0):
    """Seeded shuffle of a record list into (train, test) sublists."""
    if not (0.0 <= test_fraction <= 1.0):
        raise ValueError(f"test_fraction must be in [0, 1], got {test_fraction}")
    records = list(records)
    order = np.random.default_rng(seed).permutation(len(records))
    n_test = int(round(test_fraction * len(records)))
    test = [records[i] for i in order[:n_test]]
    train = [records[i] for i in order[n_test:]]
    return train, test
