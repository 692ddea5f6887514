"""
Electrode optimizer.

Minimizes the nonlinearity ratio δν/Δν of a layout family over a few free
design values (potentials, or mirrored electrode coordinates) with a
Nelder-Mead simplex and seeded random restarts. The search runs on a coarse
grid and the best point is re-evaluated on a fine grid.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from . import settings
from .exceptions import OptimizationError
from .field_solver import (
    ElectrodeLayout,
    GridSpec,
    Interval,
    PotentialSolver,
    linearity_report,
    shift_profile,
    solve_potential,
)
from .layouts import eight_electrode_layout, twelve_electrode_layout
from .materials import MaterialPreset

logger = logging.getLogger(__name__)

COARSE_GRID = GridSpec(cells_per_period=128)
FINE_GRID = GridSpec(cells_per_period=512)


class Dof(str, Enum):
    POTENTIAL = "potential"
    X = "x"
    Y = "y"


@dataclass(frozen=True)
class FreeParameter:
    """
    One design value applied to an electrode group.

    Each electrode in `group` receives value × its own factor for the chosen
    degree of freedom, so mirrored electrodes move together.
    """

    group: str
    dof: Dof = Dof.POTENTIAL
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dof", Dof(self.dof))
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise OptimizationError(f"Bounds of {self.group} must be finite")
        if not self.lower < self.upper:
            raise OptimizationError(f"Bounds of {self.group} are empty")


def apply_parameters(
    layout: ElectrodeLayout, parameters: Sequence[FreeParameter], values: Sequence[float]
) -> ElectrodeLayout:
    """Layout with the free design values written into their electrode groups."""
    electrodes = list(layout.electrodes)
    for parameter, value in zip(parameters, values):
        indices = layout.group_indices(parameter.group)
        if not indices:
            raise OptimizationError(f"No electrodes in group '{parameter.group}'")
        for n in indices:
            e = electrodes[n]
            if parameter.dof is Dof.POTENTIAL:
                electrodes[n] = replace(e, potential=e.potential_factor * value)
            elif parameter.dof is Dof.X:
                electrodes[n] = replace(e, center_x=e.x_factor * value)
            else:
                electrodes[n] = replace(e, center_y=e.y_factor * value)
    return replace(layout, electrodes=tuple(electrodes))


@dataclass(frozen=True)
class OptimizationProblem:
    """
    Layout family plus the values the optimizer may change.

    Attributes:
        layout: Base layout; fixed electrodes keep their potentials.
        parameters: Free design values with finite bounds.
        preset: Medium converting field to shift.
        span: x-interval of the linear fit; defaults to the first region A.
        core_half_width: Band |y| <= core averaged for the profile; None samples y = 0.
        grid: Search resolution.
    """

    layout: ElectrodeLayout
    parameters: Tuple[FreeParameter, ...]
    preset: MaterialPreset
    span: Optional[Interval] = None
    core_half_width: Optional[float] = None
    grid: GridSpec = COARSE_GRID

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        if not self.parameters:
            raise OptimizationError("At least one free parameter is required")
        if self.span is None:
            if not self.layout.region_a:
                raise OptimizationError("No span given and the layout has no region A")
            object.__setattr__(self, "span", self.layout.region_a[0])

    @property
    def bounds(self) -> List[Tuple[float, float]]:
        return [(p.lower, p.upper) for p in self.parameters]

    def layout_for(self, values: Sequence[float]) -> ElectrodeLayout:
        return apply_parameters(self.layout, self.parameters, values)

    def with_grid(self, grid: GridSpec) -> "OptimizationProblem":
        return replace(self, grid=grid)


def evaluate_objective(
    problem: OptimizationProblem,
    values: Sequence[float],
    solver: Optional[PotentialSolver] = None,
) -> float:
    """
    δν/Δν of the layout at `values`.

    Runs solve_potential, shift_profile and linearity_report on the problem's
    grid, span and core band.
    """
    values = np.asarray(values, dtype=float)
    lower, upper = np.array(problem.bounds).T
    if np.any(values < lower) or np.any(values > upper):
        raise OptimizationError(f"Parameters {values.tolist()} lie outside the bounds")
    field_map = solve_potential(problem.layout_for(values), problem.grid, solver=solver)
    profile = shift_profile(field_map, problem.preset, problem.core_half_width)
    return linearity_report(profile, problem.span).ratio


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings: simplex restarts, evaluation budget and seed."""

    algorithm: str = "Nelder-Mead"
    restarts: int = 8
    max_evals: int = 400
    seed: int = settings.DEFAULT_SEED
    xatol: float = 1e-6
    fatol: float = 1e-12
    include_initial: bool = True

    def __post_init__(self):
        if self.algorithm != "Nelder-Mead":
            raise OptimizationError(f"Unsupported algorithm '{self.algorithm}'")
        if self.restarts < 1 or self.max_evals < 1:
            raise OptimizationError("Restarts and evaluation budget must be positive")


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """
    Best point found over all restarts.

    Attributes:
        parameters: Best design values.
        ratio: Objective at the best values.
        evaluations: Total objective evaluations.
        converged: True if the winning restart's simplex converged.
        history: (values, objective) per evaluation, in evaluation order.
        best_restart: Index of the winning restart.
    """

    parameters: np.ndarray
    ratio: float
    evaluations: int
    converged: bool
    history: Tuple[Tuple[Tuple[float, ...], float], ...] = field(default_factory=tuple)
    best_restart: int = 0

    @property
    def best_so_far(self) -> np.ndarray:
        """Running minimum of the objective along the history."""
        if not self.history:
            return np.array([])
        return np.minimum.accumulate(np.array([ratio for _, ratio in self.history]))

    def to_dict(self) -> dict:
        return {
            "parameters": [float(v) for v in self.parameters],
            "ratio": self.ratio,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "best_restart": self.best_restart,
        }


def _start_points(
    bounds: Sequence[Tuple[float, float]],
    config: OptimizerConfig,
    initial: Optional[Sequence[float]],
) -> List[np.ndarray]:
    rng = np.random.default_rng(config.seed)
    lower, upper = np.array(bounds, dtype=float).T
    starts = []
    if initial is not None and config.include_initial:
        starts.append(np.clip(np.asarray(initial, dtype=float), lower, upper))
    while len(starts) < config.restarts:
        starts.append(rng.uniform(lower, upper))
    return starts


def minimize_with_restarts(
    fun: Callable[[np.ndarray], float],
    bounds: Sequence[Tuple[float, float]],
    config: OptimizerConfig = OptimizerConfig(),
    initial: Optional[Sequence[float]] = None,
) -> OptimizationResult:
    """
    Bounded Nelder-Mead with seeded restarts for any scalar objective.

    Restarts run in order and each keeps its own evaluation budget. The
    winner is the lowest objective, ties going to the lowest restart index.
    """
    if not bounds:
        raise OptimizationError("At least one free parameter is required")
    history: List[Tuple[Tuple[float, ...], float]] = []

    def tracked(x: np.ndarray) -> float:
        value = float(fun(x))
        history.append((tuple(float(v) for v in x), value))
        return value

    best = None
    for index, start in enumerate(_start_points(bounds, config, initial)):
        outcome = minimize(
            tracked,
            start,
            method="Nelder-Mead",
            bounds=bounds,
            options={
                "maxfev": config.max_evals,
                "xatol": config.xatol,
                "fatol": config.fatol,
            },
        )
        logger.debug(
            f"Restart {index}: objective {outcome.fun:.4e} after {outcome.nfev} "
            f"evaluations (success={outcome.success})"
        )
        if best is None or outcome.fun < best[1].fun:
            best = (index, outcome)

    index, outcome = best
    if not outcome.success:
        logger.warning(f"Best restart {index} stopped before the simplex converged")
    return OptimizationResult(
        parameters=np.asarray(outcome.x, dtype=float),
        ratio=float(outcome.fun),
        evaluations=len(history),
        converged=bool(outcome.success),
        history=tuple(history),
        best_restart=index,
    )


def optimize(
    problem: OptimizationProblem,
    config: OptimizerConfig = OptimizerConfig(),
    initial: Optional[Sequence[float]] = None,
    verify_grid: Optional[GridSpec] = FINE_GRID,
) -> OptimizationResult:
    """
    Search the problem's free parameters for the smallest δν/Δν.

    The search minimizes log10 of the ratio on the problem grid. With
    `verify_grid`, the reported ratio is recomputed there at the best point.

    Returns:
        OptimizationResult whose history holds plain ratios.
    """
    solver = PotentialSolver()

    def objective(values: np.ndarray) -> float:
        ratio = evaluate_objective(problem, values, solver=solver)
        return float(np.log10(max(ratio, 1e-300)))

    result = minimize_with_restarts(objective, problem.bounds, config, initial)
    history = tuple((values, float(10.0**value)) for values, value in result.history)
    ratio = float(10.0**result.ratio)
    if verify_grid is not None:
        ratio = evaluate_objective(problem.with_grid(verify_grid), result.parameters)
        logger.debug(f"Verified ratio on {verify_grid.cells_per_period} cells: {ratio:.4e}")
    return replace(result, ratio=ratio, history=history)


def eight_electrode_problem(
    lx: float, preset: MaterialPreset, grid: GridSpec = COARSE_GRID
) -> OptimizationProblem:
    """
    Eight-electrode family with U2 pinned to 1 and (U1, U3) free.

    Pinning U2 removes the overall scale, which the ratio does not see.
    """
    layout = eight_electrode_layout(lx)
    return OptimizationProblem(
        layout=layout,
        parameters=(
            FreeParameter("U1", lower=0.1, upper=1.5),
            FreeParameter("U3", lower=0.5, upper=5.0),
        ),
        preset=preset,
        core_half_width=layout.ly / 10,
        grid=grid,
    )


def twelve_electrode_problem(
    lx: float, preset: MaterialPreset, grid: GridSpec = COARSE_GRID
) -> OptimizationProblem:
    """Twelve-electrode family with U3 pinned to 1 and the other four free."""
    layout = twelve_electrode_layout(lx)
    return OptimizationProblem(
        layout=layout,
        parameters=(
            FreeParameter("U1", lower=0.05, upper=1.0),
            FreeParameter("U2", lower=0.2, upper=1.5),
            FreeParameter("U4", lower=0.5, upper=4.0),
            FreeParameter("U5", lower=0.5, upper=10.0),
        ),
        preset=preset,
        core_half_width=layout.ly / 10,
        grid=grid,
    )
