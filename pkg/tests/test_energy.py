"""Power/energy model, two-anchor calibration, sweep reports, CSV."""

import csv

import numpy as np
import pytest

from tdsnn.energy import (
    EnergyModelParams,
    energy_parts,
    energy_per_inference,
    energy_sweep,
    fit_two_anchor,
    power_per_neuron,
    write_energy_csv,
)
from tdsnn.engine import SweepPoint
from tdsnn.errors import CalibrationError, ConfigurationError


def reached(f, latency, spikes=10.0):
    return SweepPoint(f_max=f, dt=1.0 / (10 * f), reached=True,
                      steps_to_target=100, time_to_target=latency,
                      final_error=0.01, spikes_per_neuron=spikes)


def missed(f):
    return SweepPoint(f_max=f, dt=1.0 / (10 * f), reached=False,
                      steps_to_target=None, time_to_target=None,
                      final_error=0.5, spikes_per_neuron=3.0)


class TestPower:
    def test_zero_frequency_is_static_only(self):
        p = EnergyModelParams(p_static=4e-8, e_edge=2e-15)
        assert power_per_neuron(0.0, p) == 4e-8

    def test_paper_anchor_230_nanowatts(self):
        # 1.15 fJ per edge, two oscillators, 100 MHz -> 0.230 uW
        p = EnergyModelParams(p_static=0.0, e_edge=1.15e-15, ref_amortization=1.0)
        assert power_per_neuron(100e6, p) == pytest.approx(0.230e-6, rel=1e-12)

    def test_dynamic_term_linear_in_f(self):
        p = EnergyModelParams(p_static=7e-9, e_edge=1e-15)
        d1 = power_per_neuron(10e6, p) - p.p_static
        d2 = power_per_neuron(20e6, p) - p.p_static
        assert d2 == pytest.approx(2 * d1, rel=1e-12)

    def test_shared_reference_amortization(self):
        private = EnergyModelParams(e_edge=1e-15, ref_amortization=1.0)
        shared = EnergyModelParams(e_edge=1e-15, ref_amortization=1.0 / 100)
        assert power_per_neuron(1e7, shared) < power_per_neuron(1e7, private)

    def test_negative_frequency_rejected(self):
        with pytest.raises(ConfigurationError):
            power_per_neuron(-1.0, EnergyModelParams())

    def test_negative_params_rejected(self):
        with pytest.raises(ConfigurationError):
            EnergyModelParams(p_static=-1e-9)
        with pytest.raises(ConfigurationError):
            EnergyModelParams(latency_floor=-1e-6)


class TestEnergySweep:
    def test_static_only_prefers_fastest(self):
        # e_edge = e_spike = 0: energy tracks latency, fastest wins
        params = EnergyModelParams(p_static=1e-7)
        pts = [reached(f, latency=1e-3 / f) for f in (3e6, 15e6, 100e6)]
        report = energy_sweep(pts, params)
        assert report.argmin_frequency == 100e6
        energies = [r.energy_per_neuron_j for r in report.rows]
        assert energies == sorted(energies, reverse=True)

    def test_inverse_latency_without_floor_prefers_fastest(self):
        # with latency = c/f, E = p_static*c/f + 2*e_edge*c: monotone in f
        params = EnergyModelParams(p_static=1e-7, e_edge=1e-15)
        c = 12.0
        pts = [reached(f, latency=c / f) for f in (3e6, 15e6, 100e6)]
        report = energy_sweep(pts, params)
        assert report.argmin_frequency == 100e6
        for row in report.rows:
            want = params.p_static * c / row.frequency_hz + 2 * 1e-15 * c
            assert row.energy_per_neuron_j == pytest.approx(want, rel=1e-12)

    def test_latency_floor_creates_interior_optimum(self):
        # adding a fixed readout time t0 makes E(f) U-shaped with the
        # analytic minimum at sqrt(p_static*c / (2*e_edge*t0))
        p_static, e_edge, t0, c = 1e-7, 6e-15, 1e-6, 12.0
        params = EnergyModelParams(p_static=p_static, e_edge=e_edge,
                                   latency_floor=t0)
        freqs = [3e6, 6e6, 15e6, 30e6, 60e6, 100e6]
        report = energy_sweep([reached(f, c / f) for f in freqs], params)
        f_star = np.sqrt(p_static * c / (2 * e_edge * t0))
        assert freqs[0] < f_star < freqs[-1]
        best = report.argmin_frequency
        assert best not in (freqs[0], freqs[-1])
        assert best == min(freqs, key=lambda f: abs(np.log(f / f_star)))

    def test_decomposition_is_exact(self):
        params = EnergyModelParams(p_static=3e-8, e_edge=2e-15, e_spike=5e-14,
                                   latency_floor=2e-7)
        pts = [reached(f, 7e-6, spikes=21.0) for f in (3e6, 30e6)]
        report = energy_sweep(pts, params)
        for row in report.rows:
            static, dynamic, spike = energy_parts(
                row.frequency_hz, 7e-6, row.spikes_per_neuron, params)
            # grouped in the same order the sweep sums them: bit-exact zero
            assert row.energy_per_neuron_j - sum((static, dynamic, spike)) == 0.0
            # sequential subtraction: zero to machine precision
            residual = row.energy_per_neuron_j - static - dynamic - spike
            assert abs(residual) <= 4 * np.finfo(float).eps * row.energy_per_neuron_j

    def test_argmin_stable_under_rescaling(self):
        base = dict(p_static=1e-7, e_edge=6e-15, e_spike=1e-14,
                    latency_floor=1e-6)
        pts = [reached(f, 12.0 / f) for f in (3e6, 6e6, 15e6, 30e6, 100e6)]
        r1 = energy_sweep(pts, EnergyModelParams(**base))
        scaled = {k: v * 137.0 if k != "latency_floor" else v
                  for k, v in base.items()}
        r2 = energy_sweep(pts, EnergyModelParams(**scaled))
        assert r1.argmin_frequency == r2.argmin_frequency

    def test_missed_frequencies_flagged_and_excluded(self):
        params = EnergyModelParams(p_static=1e-7)
        report = energy_sweep([missed(3e6), reached(30e6, 1e-6)], params)
        assert report.target_reached
        assert report.argmin_frequency == 30e6
        assert report.rows[0].reached is False
        assert report.rows[0].energy_per_neuron_j is None
        assert report.rows[0].power_w > 0  # power is still defined

    def test_nothing_reached_is_a_report_not_a_crash(self):
        report = energy_sweep([missed(3e6), missed(30e6)], EnergyModelParams())
        assert report.target_reached is False
        assert report.argmin_frequency is None
        with pytest.raises(ConfigurationError):
            energy_per_inference(report, 10)

    def test_empty_sweep_rejected(self):
        with pytest.raises(ConfigurationError):
            energy_sweep([], EnergyModelParams())


class TestEnergyPerInference:
    def test_single_neuron_equals_per_neuron_energy(self):
        report = energy_sweep([reached(1e7, 2e-6)],
                              EnergyModelParams(p_static=1e-7))
        assert energy_per_inference(report, 1) == report.rows[0].energy_per_neuron_j

    def test_scales_linearly_with_neurons(self):
        report = energy_sweep([reached(1e7, 2e-6)],
                              EnergyModelParams(p_static=1e-7))
        assert energy_per_inference(report, 138) == pytest.approx(
            138 * energy_per_inference(report, 1), rel=1e-12)

    def test_bad_neuron_count(self):
        report = energy_sweep([reached(1e7, 2e-6)],
                              EnergyModelParams(p_static=1e-7))
        with pytest.raises(ConfigurationError):
            energy_per_inference(report, 0)


class TestTwoAnchorFit:
    def test_recovers_known_parameters(self):
        truth = EnergyModelParams(p_static=9e-8, e_edge=5e-15,
                                  latency_floor=1e-6)
        anchors = []
        for f, lat in ((3e6, 4e-6), (15e6, 8e-7)):
            e = sum(energy_parts(f, lat, 0.0, truth))
            anchors.append((f, lat, e))
        fit = fit_two_anchor(anchors[0], anchors[1], latency_floor=1e-6)
        assert fit.p_static == pytest.approx(truth.p_static, rel=1e-9)
        assert fit.e_edge == pytest.approx(truth.e_edge, rel=1e-9)

    def test_fit_reproduces_anchors_through_sweep(self):
        anchors = ((3e6, 4e-6, 0.646e-12), (15e6, 8e-7, 0.488e-12))
        fit = fit_two_anchor(*anchors, latency_floor=1e-6)
        pts = [reached(f, lat, spikes=0.0) for f, lat, _ in anchors]
        report = energy_sweep(pts, fit)
        for row, (_, _, e) in zip(report.rows, anchors):
            assert row.energy_per_neuron_j == pytest.approx(e, rel=1e-9)

    def test_negative_implied_params_rejected(self):
        # energy dropping faster than latency implies negative edge energy
        with pytest.raises(CalibrationError):
            fit_two_anchor((3e6, 4e-6, 1.0e-12), (15e6, 4e-6, 0.5e-12))

    def test_singular_anchors_rejected(self):
        with pytest.raises(CalibrationError):
            fit_two_anchor((1e7, 1e-6, 1e-12), (1e7, 1e-6, 1e-12))


class TestCsv:
    def test_columns_and_missed_rows(self, tmp_path):
        params = EnergyModelParams(p_static=1e-7, e_edge=1e-15)
        report = energy_sweep([missed(3e6), reached(30e6, 1e-6)], params)
        path = tmp_path / "energy.csv"
        write_energy_csv(path, report, neuron_count=138)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["frequency_hz", "power_w", "latency_s",
                           "energy_per_neuron_j", "energy_per_inference_j",
                           "reached_target"]
        assert rows[1][5] == "false" and rows[1][2] == ""
        assert rows[2][5] == "true"
        per_neuron = float(rows[2][3])
        assert float(rows[2][4]) == pytest.approx(138 * per_neuron, rel=1e-12)

    def test_bytes_deterministic(self, tmp_path):
        params = EnergyModelParams(p_static=1e-7, e_edge=1e-15)
        report = energy_sweep([reached(f, 12.0 / f) for f in (3e6, 30e6)], params)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_energy_csv(a, report, 10)
        write_energy_csv(b, report, 10)
        assert a.read_bytes() == b.read_bytes()
