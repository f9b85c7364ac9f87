"""Time-stepped spiking inference over a layered network.

Each step: the input layer receives encoded drive, every weight layer's
neurons integrate their drive and emit 0/1 spikes, and those spikes are
weight-multiplied into the next layer within the same step (single-pass
feed-forward). Cumulative output statistics give a decision per step, so
one run yields the whole error-versus-latency curve.

Rate bookkeeping: sustained unit activation corresponds to a firing rate of
``rate_scale`` spikes per step. For the ideal and voltage models this is 1
(one algorithmic step per unit-rate period); for the time-domain model it is
``(f_max - f_ref) * dt``, the oscillator headroom expressed per step, and
input drive and biases are scaled by it so every layer codes activations on
the same rate axis.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError, ShapeError
from .network import LayerKind, NetworkSpec, apply_linear, layer_shapes
from .neurons import (
    IdealIFParams,
    NeuronModelParams,
    TimeDomainParams,
    VoltageDomainParams,
    initial_state,
    max_firing_rate,
    step,
)

__all__ = [
    "InputEncoding",
    "DecisionRule",
    "SimConfig",
    "InferenceTrace",
    "EvalResult",
    "SweepPoint",
    "make_time_domain_config",
    "run_inference",
    "evaluate",
    "latency_sweep",
]


class InputEncoding(enum.Enum):
    CONSTANT_CURRENT = "constant"
    POISSON_RATE = "poisson"


class DecisionRule(enum.Enum):
    SPIKE_COUNT_ARGMAX = "spike_count"
    POTENTIAL_ARGMAX = "potential"


@dataclass(frozen=True)
class SimConfig:
    dt: float
    max_steps: int
    neuron_model: NeuronModelParams
    input_encoding: InputEncoding = InputEncoding.CONSTANT_CURRENT
    decision_rule: DecisionRule = DecisionRule.SPIKE_COUNT_ARGMAX
    seed: int = 0
    rate_scale: Optional[float] = None  # None = derive from the neuron model

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if self.max_steps < 1:
            raise ConfigurationError(f"max_steps must be >= 1, got {self.max_steps}")

    @property
    def resolved_rate_scale(self) -> float:
        if self.rate_scale is not None:
            return self.rate_scale
        if isinstance(self.neuron_model, TimeDomainParams):
            return max_firing_rate(self.neuron_model) * self.dt
        return 1.0


def make_time_domain_config(
    f_max: float,
    *,
    f_ref_ratio: float = 0.5,
    steps_per_period: int = 10,
    max_steps: Optional[int] = None,
    cycle_budget: float = 150.0,
    counter_bits: int = 16,
    input_encoding: InputEncoding = InputEncoding.CONSTANT_CURRENT,
    decision_rule: DecisionRule = DecisionRule.SPIKE_COUNT_ARGMAX,
    seed: int = 0,
) -> SimConfig:
    """Canonical time-domain run: dt = 1/(steps_per_period * f_max).

    ``f_ref_ratio`` places the reference oscillator (default mid-range, which
    leaves symmetric headroom for excitation and inhibition).  When
    ``max_steps`` is not given it is chosen so the run can accumulate
    ``cycle_budget`` full threshold cycles at saturation, which makes runs at
    different ``f_max`` statistically identical step for step.
    """
    if not 0 < f_ref_ratio < 1:
        raise ConfigurationError("f_ref_ratio must be in (0, 1)")
    dt = 1.0 / (steps_per_period * f_max)
    params = TimeDomainParams(
        f_ref=f_ref_ratio * f_max,
        f_max=f_max,
        k_ico=1.0,
        f_min=0.0,
        counter_bits=counter_bits,
    )
    if max_steps is None:
        per_step = max_firing_rate(params) * dt
        max_steps = int(round(cycle_budget / per_step))
    return SimConfig(
        dt=dt,
        max_steps=max_steps,
        neuron_model=params,
        input_encoding=input_encoding,
        decision_rule=decision_rule,
        seed=seed,
    )


@dataclass
class InferenceTrace:
    """Everything observable from one image's run."""

    output_counts: np.ndarray  # (steps, classes) cumulative spike counts
    output_potential: np.ndarray  # (steps, classes) cumulative un-reset drive
    predicted: np.ndarray  # (steps,) decision from each step prefix
    steps_to_stable_decision: int  # 1-based; first step after which argmax is fixed
    spikes_per_layer: np.ndarray  # (weight_layers,) total spikes
    dt: float

    @property
    def predicted_class(self) -> int:
        return int(self.predicted[-1])


@dataclass
class EvalResult:
    error_rate: float
    error_vs_step: np.ndarray  # (steps,) error using decisions at step k+1
    times: np.ndarray  # (steps,) absolute seconds, (k+1)*dt
    predictions: np.ndarray  # (n,) final decisions
    spikes_per_neuron: np.ndarray  # (steps,) cumulative, averaged over images
    dt: float

    @property
    def error_vs_time(self) -> np.ndarray:
        return self.error_vs_step  # same series; ``times`` is the x axis


@dataclass
class SweepPoint:
    f_max: float
    dt: float
    reached: bool
    steps_to_target: Optional[int]
    time_to_target: Optional[float]
    final_error: float
    spikes_per_neuron: float  # cumulative at the target step (or run end)


# ---------------------------------------------------------------------------
# Core stepping
# ---------------------------------------------------------------------------


def _check_normalized(spec: NetworkSpec) -> None:
    for i, layer in enumerate(spec.layers):
        if layer.has_weights and layer.threshold != 1.0:
            raise ConfigurationError(
                f"layer {i} threshold is {layer.threshold}; run the conversion "
                "step first (engine expects unit thresholds)"
            )


def _flat_inputs(spec: NetworkSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    d = int(np.prod(spec.input_shape))
    if x.ndim == 1 and x.size == d:
        x = x[None, :]
    elif x.ndim == len(spec.input_shape) and x.shape == tuple(spec.input_shape):
        x = x.reshape(1, d)
    else:
        x = x.reshape(x.shape[0], -1)
    if x.shape[1] != d:
        raise ShapeError(f"input size {x.shape[1]} does not match {spec.input_shape}")
    if x.min() < -1e-9 or x.max() > 1 + 1e-9:
        raise ConfigurationError("inputs must be scaled to [0, 1]")
    return x


def _simulate(
    spec: NetworkSpec,
    x: np.ndarray,
    config: SimConfig,
    collect_trace: bool = False,
):
    """Batched stepping; x is (n, flat_input). Returns per-step statistics.

    Signals between layers travel as duty streams: a spike gates its outgoing
    synapses for one full maximum-rate period (1/rate_scale steps), so a
    neuron firing at its sustained ceiling drives the next layer continuously
    and sub-ceiling rates produce a proportional duty cycle. Drive into a
    weight layer is rate_scale * (duty @ W + b). At rate_scale 1 (ideal and
    voltage models) the gate is one step and this reduces to plain same-step
    spike impulses.
    """
    n = x.shape[0]
    params = config.neuron_model
    rate = config.resolved_rate_scale
    gate_steps = max(1, int(round(1.0 / rate)))
    shapes = layer_shapes(spec)
    in_shapes = [tuple(spec.input_shape)] + shapes[:-1]
    if not spec.layers or not spec.layers[-1].has_weights:
        raise ConfigurationError("network must end in a weight layer")

    weight_idx = [i for i, l in enumerate(spec.layers) if l.has_weights]
    layer_slot = {i: k for k, i in enumerate(weight_idx)}
    states = {
        i: initial_state(params, (n, int(np.prod(shapes[i]))))
        for i in weight_idx
    }
    pending = {
        i: np.zeros((n, int(np.prod(shapes[i]))), dtype=np.int32)
        for i in weight_idx[:-1]
    }
    classes = int(np.prod(shapes[-1]))
    out_counts = np.zeros((n, classes))
    out_potential = np.zeros((n, classes))
    spikes_per_layer = np.zeros(len(weight_idx))

    constant = config.input_encoding is InputEncoding.CONSTANT_CURRENT
    rng = None if constant else np.random.default_rng(config.seed)
    pending_in = None if constant else np.zeros((n, x.shape[1]), dtype=np.int32)

    first_w = weight_idx[0]
    cached_pre = None
    if constant:
        # Constant-current input never changes, so everything up to the first
        # weight layer's pre-activation is computed once.
        cur = x
        for i in range(first_w + 1):
            cur = apply_linear(spec.layers[i], cur, in_shapes[i])
        cached_pre = rate * cur

    steps = config.max_steps
    counts_hist = np.zeros((steps, classes)) if collect_trace else None
    potential_hist = np.zeros((steps, classes)) if collect_trace else None
    predicted = np.zeros((steps, n), dtype=np.int16)
    spikes_cum = np.zeros(steps)

    last = len(spec.layers) - 1
    for t in range(steps):
        if constant:
            cur = None
            begin = first_w
        else:
            spikes_in = rng.random((n, x.shape[1])) < rate * x
            pending_in[spikes_in] += gate_steps
            open_in = pending_in > 0
            pending_in -= open_in
            cur = open_in.astype(np.float64)
            begin = 0

        for i in range(begin, len(spec.layers)):
            layer = spec.layers[i]
            if not layer.has_weights:
                cur = apply_linear(layer, cur, in_shapes[i])
                continue
            if constant and i == first_w:
                pre = cached_pre
            else:
                pre = rate * apply_linear(layer, cur, in_shapes[i])
            states[i], spikes = step(states[i], pre, config.dt, params)
            spikes_per_layer[layer_slot[i]] += float(np.count_nonzero(spikes))
            if i == last:
                out_counts += spikes
                out_potential += pre
            else:
                pnd = pending[i]
                pnd[spikes] += gate_steps
                opened = pnd > 0
                pnd -= opened
                cur = opened.astype(np.float64)

        spikes_cum[t] = spikes_per_layer.sum()
        if config.decision_rule is DecisionRule.SPIKE_COUNT_ARGMAX:
            predicted[t] = np.argmax(out_counts, axis=1)
        else:
            predicted[t] = np.argmax(out_potential, axis=1)
        if collect_trace:
            counts_hist[t] = out_counts[0]
            potential_hist[t] = out_potential[0]

    return {
        "predicted": predicted,
        "spikes_cum": spikes_cum,
        "spikes_per_layer": spikes_per_layer,
        "counts_hist": counts_hist,
        "potential_hist": potential_hist,
    }


def run_inference(spec: NetworkSpec, x, config: SimConfig) -> InferenceTrace:
    """Single-input inference with a full per-step trace."""
    _check_normalized(spec)
    xf = _flat_inputs(spec, np.asarray(x))
    if xf.shape[0] != 1:
        raise ShapeError("run_inference takes one input; use evaluate for batches")
    r = _simulate(spec, xf, config, collect_trace=True)
    predicted = r["predicted"][:, 0]
    final = predicted[-1]
    changed = np.nonzero(predicted != final)[0]
    stable_from = int(changed[-1]) + 2 if changed.size else 1
    return InferenceTrace(
        output_counts=r["counts_hist"],
        output_potential=r["potential_hist"],
        predicted=predicted,
        steps_to_stable_decision=stable_from,
        spikes_per_layer=r["spikes_per_layer"],
        dt=config.dt,
    )


def _thread_count() -> int:
    raw = os.environ.get("SNN_SIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def evaluate(
    spec: NetworkSpec,
    dataset: tuple[np.ndarray, np.ndarray],
    config: SimConfig,
) -> EvalResult:
    """Dataset error rate plus the error-versus-step/time series.

    ``error_vs_step[k]`` is the error rate had every decision been read at
    step k+1; the final error rate is its last entry. Images are evaluated
    in fixed index order; SNN_SIM_THREADS > 1 splits constant-current
    batches across threads (Poisson runs stay single-batch so the draw
    sequence is a pure function of the seed).
    """
    images, labels = dataset
    if len(images) == 0:
        raise ConfigurationError("dataset is empty")
    _check_normalized(spec)
    x = _flat_inputs(spec, np.asarray(images))
    labels = np.asarray(labels, dtype=np.int64)
    n = x.shape[0]

    workers = _thread_count()
    if workers > 1 and config.input_encoding is InputEncoding.CONSTANT_CURRENT and n >= 2 * workers:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        chunks = [(x[a:b],) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda c: _simulate(spec, c[0], config), chunks)
            )
        predicted = np.concatenate([r["predicted"] for r in results], axis=1)
        spikes_cum = np.sum([r["spikes_cum"] for r in results], axis=0)
    else:
        r = _simulate(spec, x, config)
        predicted = r["predicted"]
        spikes_cum = r["spikes_cum"]

    wrong = predicted != labels[None, :]
    error_vs_step = wrong.mean(axis=1)
    times = config.dt * np.arange(1, config.max_steps + 1)
    spikes_per_neuron = spikes_cum / (n * max(spec.neuron_count, 1))
    return EvalResult(
        error_rate=float(error_vs_step[-1]),
        error_vs_step=error_vs_step,
        times=times,
        predictions=predicted[-1].astype(np.int64),
        spikes_per_neuron=spikes_per_neuron,
        dt=config.dt,
    )


def latency_sweep(
    spec: NetworkSpec,
    dataset: tuple[np.ndarray, np.ndarray],
    firing_rates: Sequence[float],
    target_error: float,
    *,
    f_ref_ratio: float = 0.5,
    steps_per_period: int = 10,
    cycle_budget: float = 150.0,
    input_encoding: InputEncoding = InputEncoding.CONSTANT_CURRENT,
    decision_rule: DecisionRule = DecisionRule.SPIKE_COUNT_ARGMAX,
    seed: int = 0,
) -> list[SweepPoint]:
    """Time-to-target-error for each maximum ICO frequency.

    dt scales as 1/(steps_per_period * f_max), so every rate runs the same
    number of steps and differs only in its time axis. Targets that are never
    reached are reported (``reached=False``), not raised.
    """
    points = []
    for f_max in firing_rates:
        config = make_time_domain_config(
            f_max,
            f_ref_ratio=f_ref_ratio,
            steps_per_period=steps_per_period,
            cycle_budget=cycle_budget,
            input_encoding=input_encoding,
            decision_rule=decision_rule,
            seed=seed,
        )
        res = evaluate(spec, dataset, config)
        hit = np.nonzero(res.error_vs_step <= target_error)[0]
        if hit.size:
            k = int(hit[0])
            points.append(
                SweepPoint(
                    f_max=f_max,
                    dt=config.dt,
                    reached=True,
                    steps_to_target=k + 1,
                    time_to_target=float(res.times[k]),
                    final_error=res.error_rate,
                    spikes_per_neuron=float(res.spikes_per_neuron[k]),
                )
            )
        else:
            points.append(
                SweepPoint(
                    f_max=f_max,
                    dt=config.dt,
                    reached=False,
                    steps_to_target=None,
                    time_to_target=None,
                    final_error=res.error_rate,
                    spikes_per_neuron=float(res.spikes_per_neuron[-1]),
                )
            )
    return points
