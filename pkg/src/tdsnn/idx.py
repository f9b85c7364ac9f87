"""Readers for the big-endian IDX files the MNIST set ships in."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ShapeError

__all__ = ["load_idx_images", "load_idx_labels", "load_dataset"]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def load_idx_images(path) -> np.ndarray:
    """(n, rows, cols) float64 array scaled to [0, 1] by dividing by 255."""
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise ShapeError(f"{path}: too short for an IDX image header")
    magic, n, rows, cols = struct.unpack(">iiii", raw[:16])
    if magic != IMAGE_MAGIC:
        raise ShapeError(f"{path}: bad magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}")
    expected = 16 + n * rows * cols
    if len(raw) != expected:
        raise ShapeError(f"{path}: expected {expected} bytes, found {len(raw)}")
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
    return pixels.reshape(n, rows, cols).astype(np.float64) / 255.0


def load_idx_labels(path) -> np.ndarray:
    """(n,) int64 label array."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ShapeError(f"{path}: too short for an IDX label header")
    magic, n = struct.unpack(">ii", raw[:8])
    if magic != LABEL_MAGIC:
        raise ShapeError(f"{path}: bad magic {magic:#010x}, expected {LABEL_MAGIC:#010x}")
    if len(raw) != 8 + n:
        raise ShapeError(f"{path}: expected {8 + n} bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, offset=8).astype(np.int64)


def load_dataset(images_path, labels_path, limit: int | None = None):
    """(images, labels) pair, optionally truncated to the first ``limit``."""
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise ShapeError(
            f"{images.shape[0]} images vs {labels.shape[0]} labels"
        )
    if limit is not None:
        images, labels = images[:limit], labels[:limit]
    return images, labels
