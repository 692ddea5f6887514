"""
Tests for the electrode optimizer
"""

import numpy as np
import pytest

from crib_reversal.electrode_optimizer import (
    COARSE_GRID,
    Dof,
    FreeParameter,
    OptimizerConfig,
    apply_parameters,
    eight_electrode_problem,
    evaluate_objective,
    minimize_with_restarts,
    optimize,
    twelve_electrode_problem,
)
from crib_reversal.exceptions import OptimizationError
from crib_reversal.layouts import eight_electrode_layout

LX = 80.8e-6
UNIT_SQUARE = [(0.0, 1.0), (0.0, 1.0)]


def quadratic(x):
    return (x[0] - 0.3) ** 2 + (x[1] - 0.7) ** 2


class TestMinimizeWithRestarts:
    """Tests for the generic bounded simplex search."""

    def test_finds_interior_minimum(self):
        result = minimize_with_restarts(quadratic, UNIT_SQUARE, OptimizerConfig(restarts=3))
        np.testing.assert_allclose(result.parameters, [0.3, 0.7], atol=1e-3)
        assert result.ratio < 1e-6
        assert result.converged

    def test_same_seed_same_history(self):
        config = OptimizerConfig(restarts=2, max_evals=50, seed=11)
        first = minimize_with_restarts(quadratic, UNIT_SQUARE, config)
        second = minimize_with_restarts(quadratic, UNIT_SQUARE, config)
        assert first.history == second.history
        np.testing.assert_array_equal(first.parameters, second.parameters)

    def test_minimum_outside_bounds_lands_on_edge(self):
        result = minimize_with_restarts(lambda x: (x[0] - 2.0) ** 2, [(0.0, 1.0)])
        assert result.parameters[0] == pytest.approx(1.0, abs=1e-3)

    def test_linear_objective_goes_to_lower_corner(self):
        result = minimize_with_restarts(lambda x: x[0] + x[1], UNIT_SQUARE)
        np.testing.assert_allclose(result.parameters, [0.0, 0.0], atol=1e-3)

    def test_ties_go_to_first_restart(self):
        result = minimize_with_restarts(lambda x: 1.0, UNIT_SQUARE, OptimizerConfig(restarts=3))
        assert result.best_restart == 0
        assert result.ratio == 1.0

    def test_initial_point_is_evaluated_first(self):
        config = OptimizerConfig(restarts=1, max_evals=30)
        result = minimize_with_restarts(quadratic, UNIT_SQUARE, config, initial=[0.5, 0.5])
        assert result.history[0][0] == (0.5, 0.5)

    def test_history_bookkeeping(self):
        result = minimize_with_restarts(quadratic, UNIT_SQUARE, OptimizerConfig(restarts=2))
        assert len(result.history) == result.evaluations
        running = result.best_so_far
        assert np.all(np.diff(running) <= 0)
        assert running[-1] == pytest.approx(result.ratio)
        assert result.to_dict()['evaluations'] == result.evaluations

    def test_empty_bounds(self):
        with pytest.raises(OptimizationError):
            minimize_with_restarts(quadratic, [])


class TestConfiguration:
    """Tests for optimizer and parameter validation."""

    def test_unsupported_algorithm(self):
        with pytest.raises(OptimizationError):
            OptimizerConfig(algorithm='BFGS')

    def test_restarts_must_be_positive(self):
        with pytest.raises(OptimizationError):
            OptimizerConfig(restarts=0)

    @pytest.mark.parametrize('lower, upper', [(1.0, 1.0), (2.0, 1.0), (0.0, np.inf)])
    def test_bad_bounds(self, lower, upper):
        with pytest.raises(OptimizationError):
            FreeParameter('U1', lower=lower, upper=upper)


class TestLayoutParameters:
    """Tests for writing design values into electrode groups."""

    def test_potential_goes_to_mirrored_pair(self):
        parameters = [FreeParameter('U1', upper=2.0)]
        layout = apply_parameters(eight_electrode_layout(LX), parameters, [0.5])
        group = [layout.electrodes[n] for n in layout.group_indices('U1')]
        assert sorted(e.potential for e in group) == pytest.approx([-0.25, -0.25, 0.25, 0.25])

    def test_coordinate_follows_side(self):
        parameter = FreeParameter('U1', dof=Dof.X, lower=0.0, upper=LX)
        layout = apply_parameters(eight_electrode_layout(LX), [parameter], [0.3 * LX])
        xs = sorted({layout.electrodes[n].center_x for n in layout.group_indices('U1')})
        assert xs == pytest.approx([-0.3 * LX, 0.3 * LX])

    def test_unknown_group(self):
        with pytest.raises(OptimizationError):
            apply_parameters(eight_electrode_layout(LX), [FreeParameter('U9')], [0.5])


class TestLayoutSearch:
    """Tests for the field-based objective."""

    def test_objective_rejects_out_of_bounds(self, pr_preset):
        problem = eight_electrode_problem(LX, pr_preset)
        with pytest.raises(OptimizationError):
            evaluate_objective(problem, [2.0, 2.0])

    def test_eight_electrode_problem_defaults(self, pr_preset):
        problem = eight_electrode_problem(LX, pr_preset)
        assert [p.group for p in problem.parameters] == ['U1', 'U3']
        assert problem.span == (-LX / 2, LX / 2)
        assert problem.grid == COARSE_GRID

    def test_twelve_electrode_problem(self, pr_preset):
        problem = twelve_electrode_problem(LX, pr_preset)
        assert len(problem.parameters) == 4

    def test_short_search_on_coarse_grid(self, pr_preset):
        problem = eight_electrode_problem(LX, pr_preset)
        config = OptimizerConfig(restarts=1, max_evals=15)
        result = optimize(problem, config, initial=(0.518, 2.14), verify_grid=None)
        ratios = [ratio for _, ratio in result.history]
        assert result.history[0][0] == pytest.approx((0.518, 2.14))
        assert result.ratio == pytest.approx(min(ratios), rel=1e-9)
        assert 0 < result.ratio < 1e-2

    @pytest.mark.slow
    def test_random_starts_find_the_quoted_potentials(self, pr_preset):
        problem = eight_electrode_problem(LX, pr_preset)
        config = OptimizerConfig(restarts=3, max_evals=120, include_initial=False)
        result = optimize(problem, config, verify_grid=None)
        u1, u3 = result.parameters
        assert result.ratio < 1e-3
        assert u1 == pytest.approx(0.518, rel=0.2)
        assert u3 == pytest.approx(2.14, rel=0.2)
