"""
Tests for the phased-array ensemble simulator
"""

import math

import numpy as np
import pytest

from crib_reversal.ensemble_sim import (
    Direction,
    FieldMapResidual,
    GaussianResidual,
    Placement,
    ProtocolConfig,
    TwoPointResidual,
    emission_rate,
    evolve,
    init_ensemble,
    report,
    residual_dephasing_study,
    run_protocol,
)
from crib_reversal.exceptions import ProfileSpanError, ProtocolError
from crib_reversal.field_solver import ShiftProfile, linearity_report
from crib_reversal.oracles import two_point_dephasing
from crib_reversal.reversal_protocol import FieldSchedule

LX = 1e-3
DELTA_NU = 1.11e9


def _freeze_forward(optical_depth, m):
    """Forward rate of an exponential profile twisted by m full periods."""
    a = optical_depth / 2
    return a**2 / (a**2 + (2 * math.pi * m) ** 2)


@pytest.fixture
def pr_config(pr_preset):
    return ProtocolConfig(preset=pr_preset, lx=LX, delta_nu=DELTA_NU)


class TestInitEnsemble:
    """Tests for the freshly written state."""

    def test_written_state_radiates_forward(self):
        state = init_ensemble(1000, LX, 1e7)
        assert state.norm == pytest.approx(1.0)
        assert emission_rate(state, Direction.FORWARD) == pytest.approx(1.0)
        assert emission_rate(state, Direction.BACKWARD) < 1e-3

    def test_equispaced_positions_are_cell_centres(self):
        state = init_ensemble(4, 1.0, 2 * math.pi)
        np.testing.assert_allclose(state.positions, [-0.375, -0.125, 0.125, 0.375])

    def test_exponential_excitation_profile(self):
        state = init_ensemble(10_000, LX, 1e7, optical_depth=2.0)
        intensity = np.abs(state.amplitudes) ** 2
        assert intensity[-1] / intensity[0] == pytest.approx(math.exp(-2.0), rel=0.01)

    def test_uniform_placement_is_seeded(self):
        first = init_ensemble(100, LX, 1e7, placement=Placement.UNIFORM, seed=7)
        second = init_ensemble(100, LX, 1e7, placement=Placement.UNIFORM, seed=7)
        other = init_ensemble(100, LX, 1e7, placement=Placement.UNIFORM, seed=8)
        np.testing.assert_array_equal(first.positions, second.positions)
        assert not np.array_equal(first.positions, other.positions)
        assert np.all(np.abs(first.positions) <= LX / 2)

    @pytest.mark.parametrize(
        'kwargs',
        [
            {'n_atoms': 1, 'lx': LX},
            {'n_atoms': 10, 'lx': 0.0},
            {'n_atoms': 10, 'lx': LX, 'optical_depth': -1.0},
        ],
    )
    def test_invalid_inputs(self, kwargs):
        with pytest.raises(ProtocolError):
            init_ensemble(k0=1e7, **kwargs)


class TestEvolve:
    """Tests for phase accumulation under a field schedule."""

    def test_subradiant_at_first_twist(self, pr_preset):
        k0 = 2 * math.pi * pr_preset.refractive_index / pr_preset.lambda_vac
        state = init_ensemble(10_000, LX, k0)
        profile = ShiftProfile.linear(DELTA_NU, LX)
        t1 = 1 / (2 * DELTA_NU)
        state = evolve(state, profile, FieldSchedule.rectangular(t1), t1)
        assert emission_rate(state) < 1e-12
        assert state.elapsed == pytest.approx(t1)

    def test_field_off_freezes_phases(self):
        state = init_ensemble(100, 1.0, 2 * math.pi)
        profile = ShiftProfile.linear(1.0, 1.0)
        held = evolve(state, profile, FieldSchedule.off(5.0), 5.0)
        np.testing.assert_array_equal(held.phases, state.phases)

    def test_t2_decay(self):
        state = init_ensemble(100, 1.0, 2 * math.pi, t2=2.0)
        profile = ShiftProfile.linear(1.0, 1.0)
        decayed = evolve(state, profile, FieldSchedule.off(1.0), 1.0)
        assert decayed.norm == pytest.approx(math.exp(-1.0))

    def test_negative_time_rejected(self):
        state = init_ensemble(10, 1.0, 2 * math.pi)
        with pytest.raises(ProtocolError):
            evolve(state, ShiftProfile.linear(1.0, 1.0), FieldSchedule.off(1.0), -1.0)

    def test_profile_narrower_than_sample(self):
        state = init_ensemble(100, LX, 1e7)
        narrow = ShiftProfile.linear(DELTA_NU, LX / 2)
        with pytest.raises(ProfileSpanError):
            evolve(state, narrow, FieldSchedule.rectangular(1e-9), 1e-9)

    def test_wrong_offset_count(self):
        state = init_ensemble(10, 1.0, 2 * math.pi)
        with pytest.raises(ProtocolError):
            state.with_offsets(np.zeros(3))

    def test_subradiant_at_every_half_period(self):
        state = init_ensemble(16, 1.0, 2 * math.pi)
        profile = ShiftProfile.linear(1.0, 1.0)
        for m in range(1, 41):
            t = m / 2
            twisted = evolve(state, profile, FieldSchedule.rectangular(t), t)
            rate = emission_rate(twisted, Direction.FORWARD)
            if m % 16:
                assert rate < 1e-20
            else:
                assert rate == pytest.approx(1.0, rel=1e-9)

    def test_common_phase_leaves_rates_unchanged(self):
        state = init_ensemble(500, 1.0, 2 * math.pi, optical_depth=1.0)
        state = evolve(state, ShiftProfile.linear(1.0, 1.0), FieldSchedule.rectangular(0.3), 0.3)
        shifted = state.shifted_phases(1.234)
        for direction in Direction:
            assert emission_rate(shifted, direction) == pytest.approx(
                emission_rate(state, direction), rel=1e-12, abs=1e-15
            )

    def test_negated_schedule_undoes_evolution(self):
        state = init_ensemble(1000, 1.0, 2 * math.pi)
        profile = ShiftProfile.linear(1.0, 1.0)
        schedule = FieldSchedule.rectangular(0.37)
        twisted = evolve(state, profile, schedule, 0.37)
        assert emission_rate(twisted) < 0.5
        restored = evolve(twisted, profile, schedule.negated(), 0.37)
        np.testing.assert_allclose(restored.phases, 0.0, atol=1e-12)
        assert emission_rate(restored) == pytest.approx(1.0, rel=1e-12)


class TestRunProtocol:
    """Tests for the full write, twist, hold and read sequence."""

    def test_equispaced_forward_vanishes_at_each_twist(self, pr_config):
        run = run_protocol(pr_config)
        for m in (1, 2, 3):
            assert run.find(f't_m={m}').forward < 1e-12

    def test_backward_readout_is_complete(self, pr_config):
        run = run_protocol(pr_config)
        readout = run.find('backward_readout')
        assert readout.backward == pytest.approx(1.0, abs=1e-6)
        assert readout.forward < 1e-6
        assert run.verdict == 'backward'
        assert run.t_rev == pytest.approx(2.676e-6, rel=1e-3)

    def test_forward_readout_restores_superradiance(self, pr_config):
        run = run_protocol(pr_config)
        assert run.find('forward_readout').forward == pytest.approx(1.0, abs=1e-9)

    def test_write_report(self, pr_config):
        run = run_protocol(pr_config)
        write = run.find('write')
        assert write.t == 0.0
        assert write.forward == pytest.approx(1.0)
        with pytest.raises(KeyError):
            run.find('missing')

    def test_two_point_residual_matches_cos_squared(self, ideal_preset):
        residual = TwoPointResidual(1e-3)
        config = ProtocolConfig(
            preset=ideal_preset, lx=100.0, delta_nu=1.0, n_atoms=1000, residual=residual
        )
        run = run_protocol(config)
        expected = two_point_dephasing(1e-3, run.t_rev)
        assert run.t_rev == pytest.approx(100.0)
        assert run.find('backward_readout').backward == pytest.approx(expected, abs=1e-12)

    def test_t2_decay_during_protocol(self, pr_preset):
        config = ProtocolConfig(preset=pr_preset, lx=LX, delta_nu=DELTA_NU, use_t2=True)
        run = run_protocol(config)
        expected = math.exp(-2 * run.t_rev / pr_preset.t2)
        assert run.find('backward_readout').backward == pytest.approx(expected, rel=1e-9)

    def test_twist_freezes_during_hold(self, pr_preset):
        config = ProtocolConfig(
            preset=pr_preset, lx=LX, delta_nu=DELTA_NU, optical_depth=1.0, hold=1e-6
        )
        run = run_protocol(config)
        at_t3 = run.find('t_m=3').forward
        assert at_t3 == pytest.approx(_freeze_forward(1.0, 3), rel=0.01)
        assert run.find('hold').forward == pytest.approx(at_t3)
        assert run.find('t_m=1').forward == pytest.approx(_freeze_forward(1.0, 1), rel=0.01)
        assert run.find('backward_readout').backward == pytest.approx(1.0, abs=1e-6)

    def test_uniform_placement_is_nearly_dark(self, pr_preset):
        config = ProtocolConfig(
            preset=pr_preset, lx=LX, delta_nu=DELTA_NU, placement=Placement.UNIFORM
        )
        run = run_protocol(config)
        assert run.find('t_m=1').forward < 1e-2
        assert run.find('backward_readout').backward == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.slow
    def test_uniform_placement_stays_bounded_across_seeds(self, ideal_preset):
        n_atoms = 10_000
        limit = 5 / math.sqrt(n_atoms)
        for seed in range(100):
            config = ProtocolConfig(
                preset=ideal_preset,
                lx=100.0,
                delta_nu=1.0,
                n_atoms=n_atoms,
                placement=Placement.UNIFORM,
                seed=seed,
            )
            run = run_protocol(config)
            for item in run.reports:
                assert item.forward <= 1 + limit
                assert item.backward <= 1 + limit
            assert run.find('t_m=1').forward < limit

    def test_twists_beyond_reversal_time(self, ideal_preset):
        config = ProtocolConfig(preset=ideal_preset, lx=1.0, delta_nu=1.0, m_max=3)
        with pytest.raises(ProtocolError):
            run_protocol(config)


class TestResidualStudy:
    """Tests for dephasing by a static shift residual."""

    def test_two_point_is_exact(self):
        study = residual_dephasing_study(TwoPointResidual(1e-3), t_rev=100.0)
        assert study.delta_nu_rms == pytest.approx(1e-3)
        assert study.measured == pytest.approx(study.cos2_prediction, abs=1e-12)
        assert study.difference == pytest.approx(0.0, abs=1e-12)
        assert study.to_dict()['model'] == 'two_point'

    def test_gaussian_follows_its_own_law(self):
        study = residual_dephasing_study(GaussianResidual(1e-3, seed=1), t_rev=150.0)
        assert study.delta_nu_rms == pytest.approx(1e-3, rel=0.03)
        assert study.measured == pytest.approx(study.model_prediction, abs=0.03)
        assert study.measured > study.cos2_prediction

    def test_residual_must_be_positive(self):
        with pytest.raises(ProtocolError):
            TwoPointResidual(0.0)

    def test_report_contrast(self):
        state = init_ensemble(10, 1.0, 2 * math.pi)
        assert report(state).contrast < 1e-3

    def _cosine_residual_report(self):
        x = np.linspace(-1.0, 1.0, 4001)
        shift = 1e6 * x + 1e3 * np.cos(6 * math.pi * x)
        return linearity_report(ShiftProfile(x, shift))

    def test_field_map_residual_is_rescaled(self):
        model = FieldMapResidual(self._cosine_residual_report(), delta_nu_rms=0.144)
        study = residual_dephasing_study(model, t_rev=1.0)
        assert study.delta_nu_rms == pytest.approx(0.144, rel=1e-3)
        assert study.cos2_prediction == pytest.approx(0.381, abs=0.005)
        # a cosine residual dephases as J0² of its peak phase
        assert study.measured == pytest.approx(0.3978, abs=0.01)
        assert abs(study.measured - 0.38) < 0.05
        assert study.to_dict()['model'] == 'from_field_map'

    def test_field_map_residual_needs_positive_rms(self):
        with pytest.raises(ProtocolError):
            FieldMapResidual(self._cosine_residual_report(), delta_nu_rms=0.0)
