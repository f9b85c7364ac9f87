"""Layered network description shared by the ANN oracle and the SNN engine.

Layers are channel-last and row-major. Dense weights have shape
``(fan_in, fan_out)``; conv weights ``(kh, kw, c_in, c_out)`` with stride 1
and valid padding; average pooling is ``(ph, pw)`` non-overlapping windows.
Hidden weight layers are ReLU-activated, the last one is usually linear;
the SNN side reads the same weights, so the two evaluations stay comparable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError, ShapeError

__all__ = ["LayerKind", "Activation", "Layer", "NetworkSpec", "ann_forward"]


class LayerKind(enum.Enum):
    DENSE = "dense"
    CONV2D = "conv2d"
    AVGPOOL = "avgpool"


class Activation(enum.Enum):
    RELU = "relu"
    LINEAR = "linear"


@dataclass
class Layer:
    kind: LayerKind
    weights: Optional[np.ndarray] = None
    bias: Optional[np.ndarray] = None
    threshold: float = 1.0
    activation: Activation = Activation.RELU
    pool: Optional[tuple[int, int]] = None

    @property
    def has_weights(self) -> bool:
        return self.kind in (LayerKind.DENSE, LayerKind.CONV2D)


@dataclass
class NetworkSpec:
    layers: list[Layer] = field(default_factory=list)
    input_shape: tuple[int, ...] = ()
    class_count: int = 0

    def validate(self) -> None:
        """Raise if shapes do not compose front to back."""
        shape = tuple(self.input_shape)
        for i, layer in enumerate(self.layers):
            if layer.threshold <= 0:
                raise ConfigurationError(f"layer {i}: threshold must be > 0")
            if layer.kind is LayerKind.AVGPOOL and layer.weights is not None:
                raise ConfigurationError(f"layer {i}: avgpool carries no weights")
            shape = _out_shape(layer, shape, i)
        n_out = int(np.prod(shape))
        if self.class_count and n_out != self.class_count:
            raise ShapeError(
                f"network emits {n_out} values but class_count is {self.class_count}"
            )

    @property
    def weight_layers(self) -> list[Layer]:
        return [l for l in self.layers if l.has_weights]

    @property
    def neuron_count(self) -> int:
        """Spiking units: one per output of every weight layer."""
        total = 0
        shape = tuple(self.input_shape)
        for i, layer in enumerate(self.layers):
            shape = _out_shape(layer, shape, i)
            if layer.has_weights:
                total += int(np.prod(shape))
        return total

    def copy(self) -> "NetworkSpec":
        layers = [
            replace(
                l,
                weights=None if l.weights is None else l.weights.copy(),
                bias=None if l.bias is None else l.bias.copy(),
            )
            for l in self.layers
        ]
        return NetworkSpec(layers, tuple(self.input_shape), self.class_count)


def _out_shape(layer: Layer, in_shape: tuple[int, ...], idx: int) -> tuple[int, ...]:
    if layer.kind is LayerKind.DENSE:
        fan_in = int(np.prod(in_shape))
        if layer.weights is None or layer.weights.ndim != 2:
            raise ShapeError(f"layer {idx}: dense needs 2-d weights")
        if layer.weights.shape[0] != fan_in:
            raise ShapeError(
                f"layer {idx}: dense expects fan_in {layer.weights.shape[0]}, "
                f"input provides {fan_in}"
            )
        return (layer.weights.shape[1],)
    if layer.kind is LayerKind.CONV2D:
        if len(in_shape) != 3:
            raise ShapeError(f"layer {idx}: conv2d needs (h, w, c) input")
        h, w, c = in_shape
        if layer.weights is None or layer.weights.ndim != 4:
            raise ShapeError(f"layer {idx}: conv2d needs 4-d weights")
        kh, kw, c_in, c_out = layer.weights.shape
        if c_in != c:
            raise ShapeError(f"layer {idx}: conv2d expects {c_in} channels, got {c}")
        if kh > h or kw > w:
            raise ShapeError(f"layer {idx}: kernel larger than input")
        return (h - kh + 1, w - kw + 1, c_out)
    if layer.kind is LayerKind.AVGPOOL:
        if len(in_shape) != 3:
            raise ShapeError(f"layer {idx}: avgpool needs (h, w, c) input")
        h, w, c = in_shape
        ph, pw = layer.pool or (2, 2)
        if h % ph or w % pw:
            raise ShapeError(f"layer {idx}: pool {ph}x{pw} does not tile {h}x{w}")
        return (h // ph, w // pw, c)
    raise ConfigurationError(f"layer {idx}: unknown kind {layer.kind}")


# ---------------------------------------------------------------------------
# Linear layer application (shared by the ANN oracle and the spiking engine)
# ---------------------------------------------------------------------------


def apply_linear(layer: Layer, x: np.ndarray, in_shape: tuple[int, ...]) -> np.ndarray:
    """Affine part of a layer on a batch ``x`` of shape (n, *in_shape flat).

    Returns the pre-activation batch, flattened to (n, fan_out). Pool layers
    return the window averages (no bias, no activation ever applies).
    """
    n = x.shape[0]
    if layer.kind is LayerKind.DENSE:
        out = x.reshape(n, -1) @ layer.weights
        if layer.bias is not None:
            out = out + layer.bias
        return out
    if layer.kind is LayerKind.CONV2D:
        h, w, c = in_shape
        kh, kw, c_in, c_out = layer.weights.shape
        cols = _im2col(x.reshape(n, h, w, c), kh, kw)
        out = cols @ layer.weights.reshape(kh * kw * c_in, c_out)
        if layer.bias is not None:
            out = out + layer.bias
        return out.reshape(n, -1)
    if layer.kind is LayerKind.AVGPOOL:
        h, w, c = in_shape
        ph, pw = layer.pool or (2, 2)
        xr = x.reshape(n, h // ph, ph, w // pw, pw, c)
        return xr.mean(axis=(2, 4)).reshape(n, -1)
    raise ConfigurationError(f"unknown layer kind {layer.kind}")


def _im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    n, h, w, c = x.shape
    oh, ow = h - kh + 1, w - kw + 1
    s = x.strides
    windows = np.lib.stride_tricks.as_strided(
        x,
        shape=(n, oh, ow, kh, kw, c),
        strides=(s[0], s[1], s[2], s[1], s[2], s[3]),
        writeable=False,
    )
    return windows.reshape(n, oh * ow, kh * kw * c)


def layer_shapes(spec: NetworkSpec) -> list[tuple[int, ...]]:
    """Output shape of every layer, in order."""
    shapes = []
    shape = tuple(spec.input_shape)
    for i, layer in enumerate(spec.layers):
        shape = _out_shape(layer, shape, i)
        shapes.append(shape)
    return shapes


def ann_forward(spec: NetworkSpec, x: np.ndarray) -> np.ndarray:
    """Deterministic ReLU forward pass; returns class scores.

    ``x`` is one input or a batch; shapes must match ``spec.input_shape``
    (a flattened vector of the same size is accepted).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == len(spec.input_shape) or (
        x.ndim == 1 and x.size == int(np.prod(spec.input_shape))
    )
    if single:
        x = x[None, ...]
    n = x.shape[0]
    if x.reshape(n, -1).shape[1] != int(np.prod(spec.input_shape)):
        raise ShapeError(
            f"input size {x.reshape(n, -1).shape[1]} does not match "
            f"input_shape {spec.input_shape}"
        )
    a = x.reshape(n, -1)
    shape = tuple(spec.input_shape)
    for i, layer in enumerate(spec.layers):
        a = apply_linear(layer, a, shape)
        shape = _out_shape(layer, shape, i)
        if layer.has_weights and layer.activation is Activation.RELU:
            a = np.maximum(a, 0.0)
    return a[0] if single else a
