"""
CRIB Reversal Toolkit

Timing, field design and simulation tools for backward retrieval in
field-controlled photon-echo quantum memories.
"""

from .electrode_optimizer import (
    FreeParameter,
    OptimizationProblem,
    OptimizationResult,
    OptimizerConfig,
    evaluate_objective,
    optimize,
)
from .ensemble_sim import (
    EmissionReport,
    EnsembleState,
    emission_rate,
    evolve,
    init_ensemble,
    residual_dephasing_study,
    run_protocol,
)
from .exceptions import (
    CalibrationError,
    CribError,
    FieldTypeMismatchError,
    FitError,
    GridError,
    IntegratorStabilityError,
    InvalidPresetError,
    LayoutError,
    OptimizationError,
    ProfileSpanError,
    ProtocolError,
    SolverConvergenceError,
    UsageError,
    WireSingularityError,
)
from .field_solver import (
    ElectrodeLayout,
    FieldMap,
    GridSpec,
    LinearityReport,
    ShiftProfile,
    WireLayout,
    linearity_report,
    max_field,
    shift_profile,
    solve_potential,
    wire_field,
)
from .materials import MaterialPreset, get_preset, optical_wavevector, shift_from_field
from .propagation_sim import (
    PropagationConfig,
    RetrievalOutcome,
    calibrate_coupling,
    efficiency_sweep,
    simulate_retrieval,
    simulate_storage,
)
from .reversal_protocol import (
    EfficiencyBudget,
    FieldSchedule,
    ReversalPlan,
    dephasing_efficiency,
    nonlinearity_bound,
    phase_twist,
    reversal_time,
    subradiance_times,
    validate_schedule,
    wavevector_at,
)

__version__ = "1.0.0"
__all__ = [
    "MaterialPreset",
    "get_preset",
    "shift_from_field",
    "optical_wavevector",
    "ElectrodeLayout",
    "WireLayout",
    "FieldMap",
    "GridSpec",
    "ShiftProfile",
    "LinearityReport",
    "solve_potential",
    "wire_field",
    "shift_profile",
    "linearity_report",
    "max_field",
    "FreeParameter",
    "OptimizationProblem",
    "OptimizationResult",
    "OptimizerConfig",
    "evaluate_objective",
    "optimize",
    "ReversalPlan",
    "FieldSchedule",
    "EfficiencyBudget",
    "reversal_time",
    "subradiance_times",
    "wavevector_at",
    "phase_twist",
    "nonlinearity_bound",
    "dephasing_efficiency",
    "validate_schedule",
    "EnsembleState",
    "EmissionReport",
    "init_ensemble",
    "evolve",
    "emission_rate",
    "run_protocol",
    "residual_dephasing_study",
    "PropagationConfig",
    "RetrievalOutcome",
    "calibrate_coupling",
    "simulate_storage",
    "simulate_retrieval",
    "efficiency_sweep",
    "CribError",
    "InvalidPresetError",
    "FieldTypeMismatchError",
    "LayoutError",
    "GridError",
    "SolverConvergenceError",
    "WireSingularityError",
    "FitError",
    "ProtocolError",
    "ProfileSpanError",
    "CalibrationError",
    "IntegratorStabilityError",
    "OptimizationError",
    "UsageError",
]
