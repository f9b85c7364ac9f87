"""Behavioral simulator for time-domain spiking neural network inference.

Converts trained ANNs to rate-coded spiking networks and simulates them
step by step with three neuron back ends (ideal integrate-and-fire, a
voltage-domain current-mirror model, and a time-domain dual-oscillator
model), plus latency and energy sweeps over the oscillator frequency.
"""

from .conversion import ActivationStats, collect_stats, normalize
from .energy import (
    EnergyModelParams,
    EnergyReport,
    EnergyRow,
    energy_per_inference,
    energy_sweep,
    fit_two_anchor,
    power_per_neuron,
)
from .engine import (
    DecisionRule,
    EvalResult,
    InferenceTrace,
    InputEncoding,
    SimConfig,
    SweepPoint,
    evaluate,
    latency_sweep,
    make_time_domain_config,
    run_inference,
)
from .errors import (
    BundleChecksumError,
    BundleError,
    BundleLayerKindError,
    BundleLengthError,
    BundleVersionError,
    CalibrationError,
    ConfigurationError,
    ModelStateError,
    ShapeError,
    SweepFailureError,
    TdsnnError,
    UnsupportedNetworkError,
)
from .estimators import AnnClassifier, SnnClassifier
from .network import Activation, Layer, LayerKind, NetworkSpec, ann_forward
from .neurons import (
    IdealIFParams,
    IdealState,
    ResetMode,
    TimeDomainParams,
    TimeDomainState,
    VoltageDomainParams,
    VoltageDomainState,
    initial_state,
    max_firing_rate,
    step,
    step_ideal,
    step_time_domain,
    step_voltage_domain,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # neurons
    "ResetMode",
    "IdealIFParams",
    "VoltageDomainParams",
    "TimeDomainParams",
    "IdealState",
    "VoltageDomainState",
    "TimeDomainState",
    "step",
    "step_ideal",
    "step_voltage_domain",
    "step_time_domain",
    "initial_state",
    "max_firing_rate",
    # network / conversion
    "LayerKind",
    "Activation",
    "Layer",
    "NetworkSpec",
    "ann_forward",
    "ActivationStats",
    "collect_stats",
    "normalize",
    # engine
    "SimConfig",
    "InputEncoding",
    "DecisionRule",
    "InferenceTrace",
    "EvalResult",
    "SweepPoint",
    "run_inference",
    "evaluate",
    "latency_sweep",
    "make_time_domain_config",
    # energy
    "EnergyModelParams",
    "EnergyRow",
    "EnergyReport",
    "power_per_neuron",
    "energy_sweep",
    "energy_per_inference",
    "fit_two_anchor",
    # estimators
    "AnnClassifier",
    "SnnClassifier",
    # errors
    "TdsnnError",
    "ConfigurationError",
    "ModelStateError",
    "CalibrationError",
    "UnsupportedNetworkError",
    "ShapeError",
    "BundleError",
    "BundleVersionError",
    "BundleChecksumError",
    "BundleLengthError",
    "BundleLayerKindError",
    "SweepFailureError",
]
