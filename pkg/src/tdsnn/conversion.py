"""Data-based weight normalization for ANN-to-SNN conversion.

A trained ReLU network is rescaled layer by layer so that on a calibration
set no activation (at the chosen percentile) exceeds 1. With unit thresholds
a neuron's firing rate then approximates its ReLU activation. The rescaling

    W_l <- W_l * lam_{l-1} / lam_l       b_l <- b_l / lam_l

uses lam_l = per-layer activation percentile (lam_0 = 1: inputs are already
in [0, 1]), is argmax-preserving for every input, and is idempotent once
applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, ShapeError, UnsupportedNetworkError
from .network import Activation, NetworkSpec, apply_linear, _out_shape

__all__ = ["ActivationStats", "collect_stats", "normalize"]


@dataclass(frozen=True)
class ActivationStats:
    """Per-weight-layer activation scale, plus the percentile it was taken at."""

    values: tuple[float, ...]
    percentile: float = 1.0

    def __post_init__(self):
        if not 0 < self.percentile <= 1:
            raise CalibrationError(f"percentile must be in (0, 1], got {self.percentile}")
        for i, v in enumerate(self.values):
            if not v > 0:
                raise CalibrationError(
                    f"activation scale for weight layer {i} is {v}; "
                    "calibration inputs never drove it positive"
                )


def _check_activations(spec: NetworkSpec) -> None:
    wl = spec.weight_layers
    for i, layer in enumerate(wl):
        last = i == len(wl) - 1
        if layer.activation is Activation.RELU:
            continue
        if layer.activation is Activation.LINEAR and last:
            continue
        raise UnsupportedNetworkError(
            f"weight layer {i} has activation {layer.activation.value}; "
            "only ReLU (hidden) and linear (output) convert"
        )


def _weight_layer_activations(spec: NetworkSpec, x: np.ndarray) -> list[np.ndarray]:
    """Post-nonlinearity activations of each weight layer on batch ``x``.

    The output layer contributes its positive part, which is what the spike
    rate of an output neuron can represent.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1 or x.ndim == len(spec.input_shape):
        x = x.reshape(1, -1)
    n = x.shape[0]
    a = x.reshape(n, -1)
    if a.shape[1] != int(np.prod(spec.input_shape)):
        raise ShapeError(
            f"calibration input size {a.shape[1]} does not match {spec.input_shape}"
        )
    out = []
    shape = tuple(spec.input_shape)
    for i, layer in enumerate(spec.layers):
        a = apply_linear(layer, a, shape)
        shape = _out_shape(layer, shape, i)
        if layer.has_weights:
            if layer.activation is Activation.RELU:
                a = np.maximum(a, 0.0)
                out.append(a)
            else:
                out.append(np.maximum(a, 0.0))
    return out


def collect_stats(
    spec: NetworkSpec, calibration_inputs: np.ndarray, percentile: float = 0.999
) -> ActivationStats:
    """Per-layer activation percentile over a calibration batch.

    ``percentile=1.0`` is the exact maximum. The percentile is taken over the
    pooled activations of the whole layer (all units, all samples, zeros
    included), matching the usual robust-normalization practice.
    """
    calibration_inputs = np.asarray(calibration_inputs, dtype=np.float64)
    if calibration_inputs.size == 0:
        raise CalibrationError("calibration set is empty")
    _check_activations(spec)
    acts = _weight_layer_activations(spec, calibration_inputs)
    values = []
    for a in acts:
        flat = a.ravel()
        lam = float(flat.max()) if percentile >= 1.0 else float(
            np.percentile(flat, percentile * 100.0)
        )
        values.append(lam)
    stats = ActivationStats(tuple(values), percentile)  # raises on lam <= 0
    return stats


def normalize(spec: NetworkSpec, stats: ActivationStats) -> NetworkSpec:
    """Rescaled copy of ``spec`` with every layer threshold set to 1.

    Scaling a ReLU layer's inputs and outputs by positive constants commutes
    with the nonlinearity, so predicted classes are identical to the
    unnormalized network on every input.
    """
    _check_activations(spec)
    n_weight = len(spec.weight_layers)
    if len(stats.values) != n_weight:
        raise CalibrationError(
            f"stats carry {len(stats.values)} entries for {n_weight} weight layers"
        )
    out = spec.copy()
    lam_prev = 1.0
    k = 0
    for layer in out.layers:
        layer.threshold = 1.0
        if not layer.has_weights:
            continue
        lam = stats.values[k]
        if not lam > 0:
            raise CalibrationError(f"non-positive scale {lam} for weight layer {k}")
        layer.weights = layer.weights * (lam_prev / lam)
        if layer.bias is not None:
            layer.bias = layer.bias / lam
        lam_prev = lam
        k += 1
    return out
