"""
Tests for the one-dimensional storage and retrieval simulator
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import trapezoid

from crib_reversal.exceptions import IntegratorStabilityError, ProtocolError
from crib_reversal.oracles import (
    backward_crib_efficiency,
    beer_lambert_transmission,
    forward_crib_efficiency,
)
from crib_reversal.propagation_sim import (
    DetuningLine,
    GaussianPulse,
    PropagationConfig,
    RetrievalMode,
    SweepRow,
    SweepTable,
    calibrate_coupling,
    calibration_config,
    check_moving_frame,
    efficiency_sweep,
    moving_frame_ratio,
    residual_phase_from_profile,
    run_memory,
    simulate_retrieval,
    simulate_storage,
    transmission,
)

MODES = (RetrievalMode.FORWARD_CRIB, RetrievalMode.BACKWARD_CONJUGATE)


@pytest.fixture
def small_config():
    """Coarse run that finishes quickly."""
    return PropagationConfig(
        optical_depth=1.0, nz=16, dt=0.05, line=DetuningLine.flat(classes=32)
    )


def _table(depths, forward, backward):
    rows = tuple(
        SweepRow(d, {MODES[0].value: f, MODES[1].value: b})
        for d, f, b in zip(depths, forward, backward)
    )
    return SweepTable(rows=rows, modes=MODES)


class TestDetuningLine:
    """Tests for detuning class construction."""

    def test_flat_line_density(self):
        line = DetuningLine.flat(classes=128, width=8 * math.pi)
        assert line.weights.sum() == pytest.approx(1.0)
        assert line.density_at_zero == pytest.approx(1 / (8 * math.pi))
        assert line.revival_time == pytest.approx(32.0)

    def test_flat_line_is_symmetric(self):
        line = DetuningLine.flat(classes=16)
        flipped = line.flipped()
        np.testing.assert_allclose(flipped.detunings, line.detunings)
        np.testing.assert_allclose(flipped.weights, line.weights)

    def test_lorentzian_peaks_at_centre(self):
        line = DetuningLine.lorentzian(classes=64)
        assert line.weights.sum() == pytest.approx(1.0)
        assert line.weights.argmax() in (31, 32)

    def test_lorentzian_revives_after_the_read_window(self):
        line = DetuningLine.lorentzian()
        config = PropagationConfig(optical_depth=1.0)
        assert line.revival_time == pytest.approx(32.0)
        assert line.revival_time > config.write_time + config.read_time

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ProtocolError):
            DetuningLine([-1.0, 1.0], [0.5, 0.6])

    def test_classes_must_increase(self):
        with pytest.raises(ProtocolError):
            DetuningLine([1.0, -1.0], [0.5, 0.5])


class TestPropagationConfig:
    """Tests for run settings."""

    @pytest.mark.parametrize(
        'overrides',
        [{'optical_depth': -1.0}, {'nz': 1}, {'dt': 0.0}, {'read_time': 0.0}],
    )
    def test_invalid_settings(self, overrides):
        values = dict(optical_depth=1.0)
        values.update(overrides)
        with pytest.raises(ProtocolError):
            PropagationConfig(**values)

    def test_mode_accepts_strings(self):
        config = PropagationConfig(optical_depth=1.0, mode='forward_crib')
        assert config.mode is RetrievalMode.FORWARD_CRIB

    def test_refined_doubles_resolution(self, small_config):
        refined = small_config.refined()
        assert refined.nz == 32
        assert refined.nt_write == 2 * small_config.nt_write

    def test_default_line_is_lorentzian(self):
        line = PropagationConfig(optical_depth=1.0).line
        assert len(line.detunings) == 64
        assert line.weights.argmax() in (31, 32)
        assert line.weights[0] < line.weights.max() / 4

    def test_analytic_coupling(self):
        config = PropagationConfig(optical_depth=2.0, line=DetuningLine.flat())
        # 2π g² n(0) = αL with n(0) = 1/(8π)
        assert config.analytic_coupling() ** 2 == pytest.approx(8.0)

    def test_gaussian_pulse_has_unit_energy(self):
        pulse = GaussianPulse(center=5.0, width=1.0, amplitude=2.0)
        t = np.linspace(0.0, 10.0, 4001)
        energy = trapezoid(np.abs(pulse(t)) ** 2, t)
        assert energy == pytest.approx(pulse.energy, rel=1e-6)


class TestMovingFrame:
    """Tests for the retardation check."""

    def test_millimetre_sample_is_fine(self):
        ratio = check_moving_frame(1e-3, 1.8, 1e-6)
        assert ratio == pytest.approx(6.0e-6, rel=1e-3)

    def test_long_sample_with_short_pulse(self):
        assert moving_frame_ratio(1.0, 1.8, 1e-9) > 1
        with pytest.raises(ProtocolError):
            check_moving_frame(1.0, 1.8, 1e-9)


class TestIntegrator:
    """Tests for the storage and retrieval integrator."""

    def test_unstable_step_rejected(self):
        config = PropagationConfig(optical_depth=1.0, nz=8, dt=1.0)
        with pytest.raises(IntegratorStabilityError):
            simulate_storage(config, coupling=config.analytic_coupling())

    def test_empty_medium_transmits_everything(self, small_config):
        config = replace(small_config, optical_depth=0.0)
        assert calibrate_coupling(config) == 0.0
        outcome = run_memory(config)
        assert outcome.transmitted_energy == pytest.approx(outcome.input_energy)
        assert outcome.efficiency == 0.0
        assert outcome.ledger_error < 1e-12

    def test_transparent_calibration_run(self, small_config):
        calibration = calibration_config(replace(small_config, optical_depth=0.0))
        assert transmission(calibration, 0.0) == pytest.approx(1.0)

    def test_calibration_needs_a_round(self, small_config):
        with pytest.raises(ProtocolError):
            calibrate_coupling(small_config, max_rounds=0)

    def test_gradient_ramp_needs_residual(self, small_config):
        stored = simulate_storage(small_config, coupling=small_config.analytic_coupling())
        with pytest.raises(ProtocolError):
            simulate_retrieval(stored, RetrievalMode.GRADIENT_RAMP)

    def test_zero_residual_ramp_matches_conjugate(self, small_config):
        config = replace(small_config, residual_phase=lambda z: np.zeros_like(z))
        stored = simulate_storage(config, coupling=config.analytic_coupling())
        ramp = simulate_retrieval(stored, RetrievalMode.GRADIENT_RAMP)
        conjugate = simulate_retrieval(stored, RetrievalMode.BACKWARD_CONJUGATE)
        assert ramp.efficiency == pytest.approx(conjugate.efficiency, rel=1e-12)

    def test_response_is_linear_in_the_input(self, small_config):
        coupling = small_config.analytic_coupling()
        louder = replace(small_config, pulse=GaussianPulse(amplitude=2.0))
        base = simulate_storage(small_config, coupling)
        scaled = simulate_storage(louder, coupling)
        np.testing.assert_allclose(scaled.output, 2 * base.output, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(
            scaled.polarization, 2 * base.polarization, rtol=1e-9, atol=1e-12
        )
        assert scaled.input_energy == pytest.approx(4 * base.input_energy, rel=1e-9)
        assert scaled.transmitted_energy == pytest.approx(4 * base.transmitted_energy, rel=1e-9)
        for mode in MODES:
            quiet = simulate_retrieval(base, mode)
            loud = simulate_retrieval(scaled, mode)
            np.testing.assert_allclose(loud.output, 2 * quiet.output, rtol=1e-9, atol=1e-12)
            assert loud.emitted_energy == pytest.approx(4 * quiet.emitted_energy, rel=1e-9)
            assert loud.efficiency == pytest.approx(quiet.efficiency, rel=1e-9)

    def test_outcome_serializes(self, small_config):
        stored = simulate_storage(small_config, coupling=small_config.analytic_coupling())
        data = simulate_retrieval(stored, RetrievalMode.FORWARD_CRIB).to_dict()
        assert data['mode'] == 'forward_crib'
        assert set(data) >= {'efficiency', 'ledger_error'}


class TestResidualPhase:
    """Tests for mapping a shift residual onto the sample."""

    def test_constant_residual(self):
        x = np.linspace(-1.0, 1.0, 11)
        phase = residual_phase_from_profile(x, np.ones(11), t_rev=0.25)
        np.testing.assert_allclose(phase(np.linspace(0.0, 1.0, 5)), np.full(5, math.pi / 2))

    def test_linear_residual_spans_the_sample(self):
        x = np.linspace(0.0, 2.0, 3)
        phase = residual_phase_from_profile(x, np.array([-1.0, 0.0, 1.0]), t_rev=1.0)
        expected = [-2 * math.pi, 0.0, 2 * math.pi]
        np.testing.assert_allclose(phase(np.array([0.0, 0.5, 1.0])), expected)


class TestSweepTable:
    """Tests for sweep diagnostics."""

    def test_crossover_depth(self):
        table = _table([1.0, 2.0, 5.0], [0.37, 0.54, 0.17], [0.40, 0.75, 0.99])
        assert table.crossover_depth() == 1.0
        assert table.backward_monotone()

    def test_crossover_after_forward_lead(self):
        table = _table([0.5, 1.0, 3.0], [0.20, 0.40, 0.45], [0.15, 0.35, 0.90])
        assert table.crossover_depth() == 3.0

    def test_no_crossover(self):
        table = _table([0.5, 1.0], [0.2, 0.4], [0.1, 0.3])
        assert table.crossover_depth() is None

    def test_rows(self):
        table = _table([1.0], [0.3], [0.4])
        assert table.to_rows() == [(1.0, 0.3, 0.4)]
        np.testing.assert_allclose(table.column(RetrievalMode.BACKWARD_CONJUGATE), [0.4])

    def test_empty_grid(self):
        with pytest.raises(ProtocolError):
            efficiency_sweep([])


@pytest.mark.slow
class TestRetrievalOracles:
    """Simulated efficiencies against the closed-form forward and backward laws."""

    DEPTHS = (1.0, 2.0, 5.0)

    @pytest.fixture(scope='class')
    def outcomes(self):
        results = {}
        for depth in self.DEPTHS:
            config = PropagationConfig(optical_depth=depth, line=DetuningLine.flat())
            coupling = calibrate_coupling(config)
            stored = simulate_storage(config, coupling)
            results[depth] = {
                'transmission': transmission(calibration_config(config), coupling),
                'forward': simulate_retrieval(stored, RetrievalMode.FORWARD_CRIB),
                'backward': simulate_retrieval(stored, RetrievalMode.BACKWARD_CONJUGATE),
            }
        return results

    @pytest.mark.parametrize('depth, rel', [(1.0, 0.01), (2.0, 0.01), (5.0, 0.02)])
    def test_calibrated_transmission(self, outcomes, depth, rel):
        expected = beer_lambert_transmission(depth)
        assert outcomes[depth]['transmission'] == pytest.approx(expected, rel=rel)

    @pytest.mark.parametrize('depth', DEPTHS)
    def test_forward_efficiency(self, outcomes, depth):
        expected = forward_crib_efficiency(depth)
        assert outcomes[depth]['forward'].efficiency == pytest.approx(expected, rel=0.02)

    @pytest.mark.parametrize('depth', DEPTHS)
    def test_backward_efficiency(self, outcomes, depth):
        expected = backward_crib_efficiency(depth)
        assert outcomes[depth]['backward'].efficiency == pytest.approx(expected, rel=0.02)

    @pytest.mark.parametrize('depth', DEPTHS)
    def test_energy_ledger_closes(self, outcomes, depth):
        assert outcomes[depth]['forward'].ledger_error < 1e-3
        assert outcomes[depth]['backward'].ledger_error < 1e-3

    def test_backward_wins_at_high_depth(self, outcomes):
        assert outcomes[5.0]['backward'].efficiency > outcomes[5.0]['forward'].efficiency


@pytest.mark.slow
@pytest.mark.parametrize('mode', MODES)
def test_efficiency_converges_with_grid(mode):
    config = PropagationConfig(optical_depth=2.0, nz=64, dt=0.02, line=DetuningLine.flat())
    coupling = config.analytic_coupling()
    coarse = simulate_retrieval(simulate_storage(config, coupling), mode)
    fine = simulate_retrieval(simulate_storage(config.refined(), coupling), mode)
    assert fine.efficiency == pytest.approx(coarse.efficiency, rel=0.01)
