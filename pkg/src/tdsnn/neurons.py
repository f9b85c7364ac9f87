"""Per-timestep dynamics of three integrate-and-fire neuron variants.

All three models share one stepping shape: ``step_*(state, drive, ...) ->
(new_state, spike)``. ``drive`` is the weighted sum of input spikes arriving
during the timestep (dimensionless after conversion); synaptic pulse width and
amplitude are absorbed into the model gains.

* ideal         -- membrane accumulates drive, fires at a threshold,
                   reset by subtraction (default) or to zero.
* voltage       -- current-mirror charging of a capacitor; channel-length
                   modulation makes the charging increment shrink as the
                   membrane voltage rises, which is the nonlinearity that
                   costs accuracy.
* time domain   -- a signal oscillator whose frequency is steered by the
                   drive, an identical fixed-frequency reference oscillator,
                   and two edge counters. One full turn (2*pi) of accumulated
                   phase lead over the reference is the firing threshold;
                   firing adds one to the reference counter, which subtracts
                   exactly one threshold from the phase difference.

Step functions are pure: they never mutate their inputs and work elementwise,
so ``state`` fields may be scalars or numpy arrays of any common shape (one
entry per neuron). A single neuron's trajectory is inherently sequential.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError, ModelStateError

__all__ = [
    "ResetMode",
    "IdealIFParams",
    "VoltageDomainParams",
    "TimeDomainParams",
    "IdealState",
    "VoltageDomainState",
    "TimeDomainState",
    "step_ideal",
    "step_voltage_domain",
    "step_time_domain",
    "max_firing_rate",
]

ArrayLike = Union[float, np.ndarray]

TWO_PI = 2.0 * math.pi

# Absorbs float accumulation error when a phase lands on an exact cycle
# boundary: a fraction within EDGE_EPS cycles below an integer counts as
# having crossed it (the threshold test is closed from above).
EDGE_EPS = 1e-9


class ResetMode(enum.Enum):
    SUBTRACT_THRESHOLD = "subtract"
    RESET_TO_ZERO = "zero"


# ---------------------------------------------------------------------------
# Parameter sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdealIFParams:
    """Ideal integrate-and-fire: unit-gain accumulation, exact reset."""

    threshold: float = 1.0
    reset_mode: ResetMode = ResetMode.SUBTRACT_THRESHOLD

    def __post_init__(self):
        if not self.threshold > 0:
            raise ConfigurationError(f"threshold must be > 0, got {self.threshold}")


@dataclass(frozen=True)
class VoltageDomainParams:
    """Current-mirror neuron charging a capacitor between 0 V and ``v_dd``.

    ``lambda_clm`` (1/V) is the channel-length-modulation coefficient: the
    mirror's output device sees a drain-source voltage of ``v_dd - v_mem``,
    so the charging increment is

        dv = gain * drive * (1 + lambda_clm*(v_dd - v_mem)) / (1 + lambda_clm*v_dd)

    normalized so that ``dv == gain*drive`` exactly at ``v_mem == 0``.
    ``lambda_clm == 0`` and ``leak_rate == 0`` degenerate to the ideal model
    with threshold ``threshold_voltage / gain``.
    """

    threshold_voltage: float = 1.0
    v_dd: float = 2.0
    lambda_clm: float = 0.0
    gain: float = 1.0
    leak_rate: float = 0.0
    reset_mode: ResetMode = ResetMode.RESET_TO_ZERO

    def __post_init__(self):
        if not 0 < self.threshold_voltage <= self.v_dd:
            raise ConfigurationError(
                f"need 0 < threshold_voltage <= v_dd, got "
                f"{self.threshold_voltage} vs v_dd={self.v_dd}"
            )
        if self.lambda_clm < 0:
            raise ConfigurationError("lambda_clm must be >= 0")
        if self.leak_rate < 0:
            raise ConfigurationError("leak_rate must be >= 0")
        if not self.gain > 0:
            raise ConfigurationError("gain must be > 0")


@dataclass(frozen=True)
class TimeDomainParams:
    """Dual-oscillator neuron.

    ``f_ref`` is the reference oscillator frequency; the signal oscillator
    runs at ``clamp(f_ref + k_ico*drive/dt, f_min, f_max)``.  ``k_ico`` is
    the integrated frequency gain in cycles of relative phase per unit
    drive (pulse charge absorbed), so one unit of drive advances the phase
    difference by ``2*pi*k_ico`` regardless of dt.  ``counter_bits`` is the
    wrap-around width of both edge counters; ``sync_delay_steps`` models the
    clock-domain-crossing latency of the signal-counter value as seen by the
    spike generator (0 = ideal transfer).
    """

    f_ref: float
    f_max: float
    k_ico: float = 1.0
    f_min: float = 0.0
    counter_bits: int = 16
    sync_delay_steps: int = 0

    def __post_init__(self):
        if not 0 <= self.f_min <= self.f_ref <= self.f_max:
            raise ConfigurationError(
                f"need 0 <= f_min <= f_ref <= f_max, got "
                f"({self.f_min}, {self.f_ref}, {self.f_max})"
            )
        if self.counter_bits < 2:
            raise ConfigurationError("counter_bits must be >= 2")
        if not self.k_ico > 0:
            raise ConfigurationError("k_ico must be > 0")
        if self.sync_delay_steps < 0:
            raise ConfigurationError("sync_delay_steps must be >= 0")

    @property
    def modulus(self) -> int:
        return 1 << self.counter_bits


NeuronModelParams = Union[IdealIFParams, VoltageDomainParams, TimeDomainParams]


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


@dataclass
class IdealState:
    v_mem: ArrayLike = 0.0

    @classmethod
    def zeros(cls, shape) -> "IdealState":
        return cls(v_mem=np.zeros(shape))


@dataclass
class VoltageDomainState:
    v_mem: ArrayLike = 0.0

    @classmethod
    def zeros(cls, shape) -> "VoltageDomainState":
        return cls(v_mem=np.zeros(shape))


@dataclass
class TimeDomainState:
    """Phase pair plus counter pair.

    Phases are stored as (integer edge count, fractional cycle) pairs so the
    edge bookkeeping stays exact no matter how much total phase accumulates;
    ``phi_clk``/``phi_ref`` expose them in radians. ``cnt_clk``/``cnt_ref``
    are the wrapped hardware counter registers (mod 2**counter_bits);
    ``cnt_ref`` additionally carries +1 per emitted spike, which is what
    implements reset-by-subtraction of exactly one full cycle.
    """

    clk_edges: ArrayLike = 0
    clk_frac: ArrayLike = 0.0
    ref_edges: ArrayLike = 0
    ref_frac: ArrayLike = 0.0
    cnt_clk: ArrayLike = 0
    cnt_ref: ArrayLike = 0
    clk_hist: tuple = ()  # pending counter values when sync_delay_steps > 0

    @classmethod
    def zeros(cls, shape, sync_delay_steps: int = 0) -> "TimeDomainState":
        z = lambda dt_: np.zeros(shape, dtype=dt_)
        return cls(
            clk_edges=z(np.int64),
            clk_frac=z(float),
            ref_edges=z(np.int64),
            ref_frac=z(float),
            cnt_clk=z(np.int64),
            cnt_ref=z(np.int64),
            clk_hist=tuple(z(np.int64) for _ in range(sync_delay_steps)),
        )

    @property
    def phi_clk(self) -> ArrayLike:
        return TWO_PI * (self.clk_edges + self.clk_frac)

    @property
    def phi_ref(self) -> ArrayLike:
        return TWO_PI * (self.ref_edges + self.ref_frac)


NeuronState = Union[IdealState, VoltageDomainState, TimeDomainState]


# ---------------------------------------------------------------------------
# Step functions
# ---------------------------------------------------------------------------


def step_ideal(state: IdealState, drive: ArrayLike, params: IdealIFParams):
    """One timestep of the ideal neuron. Ties at the threshold fire.

    Returns (new_state, spike). At most one spike per step; with
    SUBTRACT_THRESHOLD any surplus above the threshold persists, and
    negative membrane potential is allowed (inhibition accumulates).
    """
    if not isinstance(state, IdealState):
        raise ModelStateError(f"expected IdealState, got {type(state).__name__}")
    v = state.v_mem + drive
    spike = v >= params.threshold
    if params.reset_mode is ResetMode.SUBTRACT_THRESHOLD:
        v = v - params.threshold * spike
    else:
        v = np.where(spike, 0.0, v)
    return IdealState(v_mem=v), spike


def step_voltage_domain(
    state: VoltageDomainState,
    drive: ArrayLike,
    params: VoltageDomainParams,
    dt: float = 1.0,
):
    """One timestep of the current-mirror neuron.

    Order of effects: leak, nonlinear charging, clamp to [0, v_dd],
    threshold test (closed), reset. Charging happens through a PMOS mirror
    whose output device sees V_DS = v_dd - v_mem, so with channel-length
    modulation the increment for positive drive is scaled by
    (1 + lambda*(v_dd - v_mem)); at ``v_mem == 0`` it equals ``gain * drive``
    exactly. Discharge (negative drive) flows through the complementary NMOS
    device, which sees V_DS = v_mem, so its increment scales with
    (1 + lambda*v_mem) instead. Both share the v_mem = 0 charging
    normalization. The asymmetry means balanced +/- input fluctuations pump
    the membrane toward v_dd/2 when ``lambda_clm > 0``.
    """
    if not isinstance(state, VoltageDomainState):
        raise ModelStateError(
            f"expected VoltageDomainState, got {type(state).__name__}"
        )
    if dt <= 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    v = state.v_mem
    if params.leak_rate > 0:
        v = v * (1.0 - params.leak_rate * dt)
    lam = params.lambda_clm
    drive = np.asarray(drive, dtype=np.float64)
    v_ds = np.where(drive >= 0, params.v_dd - v, v)
    dv = params.gain * drive * (1.0 + lam * v_ds) / (1.0 + lam * params.v_dd)
    v = np.clip(v + dv, 0.0, params.v_dd)
    spike = v >= params.threshold_voltage
    if params.reset_mode is ResetMode.RESET_TO_ZERO:
        v = np.where(spike, 0.0, v)
    else:
        v = np.clip(v - params.threshold_voltage * spike, 0.0, params.v_dd)
    return VoltageDomainState(v_mem=v), spike


def _advance_phase(edges, frac, inc):
    # inc >= 0 (frequencies are clamped non-negative), so phase never
    # decreases. EDGE_EPS closes the crossing test from above.
    t = frac + inc + EDGE_EPS
    k = np.floor(t)
    frac = np.maximum(t - k - EDGE_EPS, 0.0)
    return edges + k.astype(np.int64), frac


def step_time_domain(
    state: TimeDomainState,
    drive: ArrayLike,
    dt: float,
    params: TimeDomainParams,
):
    """One timestep of the dual-oscillator neuron.

    The signal frequency is ``clamp(f_ref + k_ico*drive/dt, f_min, f_max)``;
    both phases advance by ``2*pi*f*dt`` and the wrapped edge counters follow
    ``floor(phase / 2*pi) mod 2**counter_bits``. A spike is emitted when the
    signal counter leads the reference counter by at least one edge, read
    through a two's-complement window so that a neuron whose phase lags the
    reference (net inhibition) never fires; the comparison is exact while the
    true lead stays within +/- 2**(counter_bits-1). Firing increments the
    reference counter, so surplus lead beyond one cycle persists and emits on
    later steps (one spike per step).
    """
    if not isinstance(state, TimeDomainState):
        raise ModelStateError(f"expected TimeDomainState, got {type(state).__name__}")
    if dt <= 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")

    f_sig = np.clip(params.f_ref + params.k_ico * drive / dt, params.f_min, params.f_max)

    clk_edges, clk_frac = _advance_phase(state.clk_edges, state.clk_frac, f_sig * dt)
    ref_edges, ref_frac = _advance_phase(
        state.ref_edges, state.ref_frac, params.f_ref * dt
    )

    m = params.modulus
    cnt_clk = (state.cnt_clk + (clk_edges - state.clk_edges)) % m
    cnt_ref = (state.cnt_ref + (ref_edges - state.ref_edges)) % m

    if params.sync_delay_steps > 0:
        hist = state.clk_hist or tuple(
            np.zeros_like(cnt_clk) for _ in range(params.sync_delay_steps)
        )
        seen_clk, hist = hist[0], hist[1:] + (cnt_clk,)
    else:
        seen_clk, hist = cnt_clk, ()

    diff = (seen_clk - cnt_ref) % m
    diff = diff - m * (diff >= m // 2)  # two's-complement window
    spike = diff >= 1
    cnt_ref = (cnt_ref + spike) % m

    new_state = TimeDomainState(
        clk_edges=clk_edges,
        clk_frac=clk_frac,
        ref_edges=ref_edges,
        ref_frac=ref_frac,
        cnt_clk=cnt_clk,
        cnt_ref=cnt_ref,
        clk_hist=hist,
    )
    return new_state, spike


def max_firing_rate(params: TimeDomainParams) -> float:
    """Sustained spike-rate ceiling in Hz: ``f_max - f_ref``.

    One spike requires one full turn (2*pi) of phase lead over the
    reference, and with the drive saturated at the clamp ceiling the lead
    grows at ``f_max - f_ref`` turns per second.
    """
    return params.f_max - params.f_ref


def initial_state(params: NeuronModelParams, shape=None) -> NeuronState:
    """Zero-initialized state of the matching variant (scalar if shape is None)."""
    if isinstance(params, IdealIFParams):
        return IdealState() if shape is None else IdealState.zeros(shape)
    if isinstance(params, VoltageDomainParams):
        return VoltageDomainState() if shape is None else VoltageDomainState.zeros(shape)
    if isinstance(params, TimeDomainParams):
        if shape is None:
            return TimeDomainState(
                clk_hist=tuple(0 for _ in range(params.sync_delay_steps))
            )
        return TimeDomainState.zeros(shape, params.sync_delay_steps)
    raise ConfigurationError(f"unknown parameter type {type(params).__name__}")


def step(state: NeuronState, drive: ArrayLike, dt: float, params: NeuronModelParams):
    """Model-dispatching step with the uniform (state, drive, dt) signature."""
    if isinstance(params, IdealIFParams):
        return step_ideal(state, drive, params)
    if isinstance(params, VoltageDomainParams):
        return step_voltage_domain(state, drive, params, dt=dt)
    if isinstance(params, TimeDomainParams):
        return step_time_domain(state, drive, dt, params)
    raise ConfigurationError(f"unknown parameter type {type(params).__name__}")
