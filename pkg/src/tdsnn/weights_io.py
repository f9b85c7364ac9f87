"""Two-file weight bundle: a JSON manifest plus a raw float32 blob.

The manifest is human-inspectable and trivially writable from any training
ecosystem; the blob is the concatenation of all weight and bias tensors as
little-endian IEEE-754 float32, row-major, in manifest order. A CRC-32 of
the blob stored in the manifest catches corruption, and byte offsets make
every tensor independently addressable.

Manifest schema (format_version 1):

    {
      "format_version": 1,
      "input_shape": [28, 28, 1],
      "class_count": 10,
      "layers": [
        {"kind": "dense", "shape": [784, 128], "weights_offset": 0,
         "bias_offset": 401408, "threshold": 1.0, "activation": "relu"},
        {"kind": "avgpool", "pool": [2, 2]},
        ...
      ],
      "blob_bytes": 521080,
      "blob_crc32": 3735928559,
      "activation_stats": {"percentile": 0.999, "values": [...]}   # optional
    }

Offsets are byte positions into the blob; bias_offset is null for bias-free
layers. Saving is deterministic: identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path
from typing import Optional

import numpy as np

from .conversion import ActivationStats
from .errors import (
    BundleChecksumError,
    BundleError,
    BundleLayerKindError,
    BundleLengthError,
    BundleVersionError,
    ShapeError,
)
from .network import Activation, Layer, LayerKind, NetworkSpec

__all__ = ["save", "load", "FORMAT_VERSION"]

FORMAT_VERSION = 1

_F32 = np.dtype("<f4")


def _dense_shape(layer: Layer) -> list[int]:
    return list(layer.weights.shape)


def save(
    manifest_path,
    blob_path,
    spec: NetworkSpec,
    stats: Optional[ActivationStats] = None,
) -> None:
    """Write ``spec`` (and optional activation stats) as manifest + blob."""
    spec.validate()
    parts: list[bytes] = []
    offset = 0
    layers_doc = []
    for layer in spec.layers:
        entry: dict = {"kind": layer.kind.value}
        if layer.has_weights:
            w = np.ascontiguousarray(layer.weights, dtype=_F32)
            entry["shape"] = list(w.shape)
            entry["weights_offset"] = offset
            parts.append(w.tobytes())
            offset += w.nbytes
            if layer.bias is not None:
                b = np.ascontiguousarray(layer.bias, dtype=_F32)
                entry["bias_offset"] = offset
                parts.append(b.tobytes())
                offset += b.nbytes
            else:
                entry["bias_offset"] = None
            entry["threshold"] = float(layer.threshold)
            entry["activation"] = layer.activation.value
        else:
            entry["pool"] = list(layer.pool or (2, 2))
        layers_doc.append(entry)

    blob = b"".join(parts)
    doc = {
        "format_version": FORMAT_VERSION,
        "input_shape": list(spec.input_shape),
        "class_count": int(spec.class_count),
        "layers": layers_doc,
        "blob_bytes": len(blob),
        "blob_crc32": zlib.crc32(blob) & 0xFFFFFFFF,
    }
    if stats is not None:
        doc["activation_stats"] = {
            "percentile": stats.percentile,
            "values": [float(v) for v in stats.values],
        }

    Path(blob_path).write_bytes(blob)
    Path(manifest_path).write_text(
        json.dumps(doc, indent=2, sort_keys=False) + "\n", encoding="utf-8"
    )


def _read_tensor(blob: bytes, offset: int, shape: tuple[int, ...]) -> np.ndarray:
    count = int(np.prod(shape))
    end = offset + count * 4
    if offset < 0 or end > len(blob):
        raise BundleLengthError(
            f"tensor at offset {offset} needs {count * 4} bytes, "
            f"blob holds {len(blob)}"
        )
    arr = np.frombuffer(blob, dtype=_F32, count=count, offset=offset)
    return arr.reshape(shape).astype(np.float32)


def load(manifest_path, blob_path):
    """Read a bundle back into a NetworkSpec (+ ActivationStats if present).

    Raises distinct errors for version mismatch, blob-length mismatch,
    CRC-32 mismatch, unknown layer kinds, and non-composing shapes.
    """
    try:
        doc = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise BundleError(f"manifest is not valid JSON: {e}") from e
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise BundleVersionError(
            f"manifest format_version {version!r}, this reader supports {FORMAT_VERSION}"
        )

    blob = Path(blob_path).read_bytes()
    expected = doc.get("blob_bytes")
    if expected is not None and expected != len(blob):
        raise BundleLengthError(
            f"manifest expects a {expected}-byte blob, file has {len(blob)} bytes"
        )
    crc = zlib.crc32(blob) & 0xFFFFFFFF
    if crc != doc.get("blob_crc32"):
        raise BundleChecksumError(
            f"blob CRC-32 {crc:#010x} != manifest {doc.get('blob_crc32'):#010x}"
        )

    layers = []
    for i, entry in enumerate(doc.get("layers", [])):
        kind_name = entry.get("kind")
        try:
            kind = LayerKind(kind_name)
        except ValueError:
            raise BundleLayerKindError(
                f"layer {i}: unknown kind {kind_name!r}"
            ) from None
        if kind is LayerKind.AVGPOOL:
            layers.append(Layer(kind=kind, pool=tuple(entry.get("pool", (2, 2)))))
            continue
        shape = tuple(entry["shape"])
        weights = _read_tensor(blob, entry["weights_offset"], shape)
        bias = None
        if entry.get("bias_offset") is not None:
            bias_shape = (shape[-1],)
            bias = _read_tensor(blob, entry["bias_offset"], bias_shape)
        try:
            activation = Activation(entry.get("activation", "relu"))
        except ValueError:
            raise BundleError(
                f"layer {i}: unknown activation {entry.get('activation')!r}"
            ) from None
        layers.append(
            Layer(
                kind=kind,
                weights=weights.astype(np.float64),
                bias=None if bias is None else bias.astype(np.float64),
                threshold=float(entry.get("threshold", 1.0)),
                activation=activation,
            )
        )

    spec = NetworkSpec(
        layers=layers,
        input_shape=tuple(doc.get("input_shape", ())),
        class_count=int(doc.get("class_count", 0)),
    )
    try:
        spec.validate()
    except ShapeError as e:
        raise ShapeError(f"bundle shapes do not compose: {e}") from e

    stats = None
    if "activation_stats" in doc:
        s = doc["activation_stats"]
        stats = ActivationStats(tuple(float(v) for v in s["values"]), s["percentile"])
    return spec, stats
