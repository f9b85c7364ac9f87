"""Parametric power and energy model for the time-domain neuron.

Per-neuron power is modeled as a static leak plus an edge-energy term for
the two oscillators:

    P(f) = p_static + (1 + ref_amortization) * e_edge * f

The reference oscillator can be shared across a neuron population, so its
contribution is scaled by ``ref_amortization`` (1 for a private reference,
1/N when N neurons share one). Energy to reach a target error combines this
power with the measured latency, an optional fixed readout overhead
(``latency_floor``), and a per-spike charge:

    E(f) = p_static * t + (1 + a) * e_edge * f * t + e_spike * spikes,
    t = latency_to_target + latency_floor

With latency scaling as 1/f the floor is what turns the energy curve from
monotone into U-shaped, giving an interior optimum frequency.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import CalibrationError, ConfigurationError
from .engine import SweepPoint

__all__ = [
    "EnergyModelParams",
    "EnergyRow",
    "EnergyReport",
    "power_per_neuron",
    "energy_parts",
    "energy_sweep",
    "energy_per_inference",
    "fit_two_anchor",
    "write_energy_csv",
]


@dataclass(frozen=True)
class EnergyModelParams:
    p_static: float = 0.0  # watts of leakage per neuron
    e_edge: float = 0.0  # joules per oscillator edge
    e_spike: float = 0.0  # joules per generated spike (spike gen + counter)
    ref_amortization: float = 1.0  # reference-ICO share per neuron
    latency_floor: float = 0.0  # seconds of fixed readout/sync overhead
    f_to_supply: Optional[Mapping[float, float]] = None  # documentation only

    def __post_init__(self):
        for name in ("p_static", "e_edge", "e_spike", "ref_amortization", "latency_floor"):
            v = getattr(self, name)
            if v < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class EnergyRow:
    frequency_hz: float
    power_w: float
    reached: bool
    latency_s: Optional[float]  # includes latency_floor; None if target missed
    spikes_per_neuron: float
    energy_per_neuron_j: Optional[float]


@dataclass(frozen=True)
class EnergyReport:
    rows: tuple[EnergyRow, ...]
    argmin_frequency: Optional[float]
    target_reached: bool

    @property
    def argmin_row(self) -> Optional[EnergyRow]:
        if self.argmin_frequency is None:
            return None
        for row in self.rows:
            if row.frequency_hz == self.argmin_frequency:
                return row
        return None


def power_per_neuron(f: float, params: EnergyModelParams) -> float:
    if f < 0:
        raise ConfigurationError(f"frequency must be >= 0, got {f}")
    return params.p_static + (1.0 + params.ref_amortization) * params.e_edge * f


def energy_parts(
    f: float, latency: float, spikes: float, params: EnergyModelParams
) -> tuple[float, float, float]:
    """(static, oscillator, spike) joules; their sum is the row energy."""
    t = latency + params.latency_floor
    static = params.p_static * t
    dynamic = (1.0 + params.ref_amortization) * params.e_edge * f * t
    return static, dynamic, params.e_spike * spikes


def energy_sweep(
    points: Sequence[SweepPoint],
    params: EnergyModelParams,
) -> EnergyReport:
    """Energy per neuron at each swept frequency, with the argmin.

    Frequencies whose runs never reached the target error keep their power
    figure but are flagged and excluded from the argmin. If nothing reached
    the target the report says so rather than raising.
    """
    if len(points) == 0:
        raise ConfigurationError("energy sweep needs at least one point")
    rows = []
    best: Optional[EnergyRow] = None
    for p in points:
        power = power_per_neuron(p.f_max, params)
        if p.reached:
            energy = sum(
                energy_parts(p.f_max, p.time_to_target, p.spikes_per_neuron, params)
            )
            row = EnergyRow(
                frequency_hz=p.f_max,
                power_w=power,
                reached=True,
                latency_s=p.time_to_target + params.latency_floor,
                spikes_per_neuron=p.spikes_per_neuron,
                energy_per_neuron_j=energy,
            )
            if best is None or energy < best.energy_per_neuron_j:
                best = row
        else:
            row = EnergyRow(
                frequency_hz=p.f_max,
                power_w=power,
                reached=False,
                latency_s=None,
                spikes_per_neuron=p.spikes_per_neuron,
                energy_per_neuron_j=None,
            )
        rows.append(row)
    return EnergyReport(
        rows=tuple(rows),
        argmin_frequency=None if best is None else best.frequency_hz,
        target_reached=best is not None,
    )


def energy_per_inference(report: EnergyReport, neuron_count: int) -> float:
    """Network energy at the argmin frequency: neuron_count x per-neuron."""
    if neuron_count < 1:
        raise ConfigurationError(f"neuron_count must be >= 1, got {neuron_count}")
    row = report.argmin_row
    if row is None or row.energy_per_neuron_j is None:
        raise ConfigurationError("report has no frequency that reached the target")
    return neuron_count * row.energy_per_neuron_j


def fit_two_anchor(
    anchor_a: tuple[float, float, float],
    anchor_b: tuple[float, float, float],
    *,
    ref_amortization: float = 1.0,
    latency_floor: float = 0.0,
    e_spike: float = 0.0,
) -> EnergyModelParams:
    """Solve (p_static, e_edge) from two (frequency, latency, energy) anchors.

    Latencies are the raw measured values; the floor is applied here the same
    way the sweep applies it. Anchors that imply a negative leak or edge
    energy are rejected.
    """
    (f1, l1, e1), (f2, l2, e2) = anchor_a, anchor_b
    t1, t2 = l1 + latency_floor, l2 + latency_floor
    k = 1.0 + ref_amortization
    a = np.array([[t1, k * f1 * t1], [t2, k * f2 * t2]], dtype=np.float64)
    b = np.array([e1, e2], dtype=np.float64)
    try:
        p_static, e_edge = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise CalibrationError(f"anchor system is singular: {exc}") from None
    if p_static < 0 or e_edge < 0:
        raise CalibrationError(
            f"anchors imply negative parameters (p_static={p_static:.3e}, "
            f"e_edge={e_edge:.3e}); check latencies and floor"
        )
    return EnergyModelParams(
        p_static=float(p_static),
        e_edge=float(e_edge),
        e_spike=e_spike,
        ref_amortization=ref_amortization,
        latency_floor=latency_floor,
    )


def write_energy_csv(path, report: EnergyReport, neuron_count: int) -> None:
    """CSV rows per frequency; missed targets leave energy fields blank."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "frequency_hz",
                "power_w",
                "latency_s",
                "energy_per_neuron_j",
                "energy_per_inference_j",
                "reached_target",
            ]
        )
        for row in report.rows:
            if row.reached:
                w.writerow(
                    [
                        repr(row.frequency_hz),
                        repr(row.power_w),
                        repr(row.latency_s),
                        repr(row.energy_per_neuron_j),
                        repr(neuron_count * row.energy_per_neuron_j),
                        "true",
                    ]
                )
            else:
                w.writerow(
                    [repr(row.frequency_hz), repr(row.power_w), "", "", "", "false"]
                )
