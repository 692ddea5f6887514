"""
Discrete phased-array model of the stored ensemble.

Each atom j at x_j carries a complex amplitude a_j and an accumulated phase
φ_j. The collective emission rate along wavevector k_d is

    R(k_d) = |Σ_j a_j exp(i(k0 x_j + φ_j)) exp(-i k_d x_j)|² / W²

where W is the initial Σ|a_j|, so a freshly written state radiates forward
with R = 1. Forward is k_d = +k0, backward k_d = -k0.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from . import settings
from .exceptions import ProtocolError
from .field_solver import LinearityReport, ShiftProfile
from .materials import MaterialPreset, optical_wavevector
from .oracles import gaussian_dephasing, two_point_dephasing
from .reversal_protocol import FieldSchedule, reversal_time, subradiance_times

logger = logging.getLogger(__name__)


class Placement(str, Enum):
    EQUISPACED = "equispaced"
    UNIFORM = "uniform"


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True, eq=False)
class EnsembleState:
    """
    Atom positions, amplitudes and accumulated phases.

    Attributes:
        positions: x_j in [-lx/2, lx/2] (m).
        amplitudes: Complex a_j.
        phases: Accumulated φ_j (rad).
        k0: Optical wavevector (rad/m).
        elapsed: Time since writing (s).
        reference_weight: Σ|a_j| at writing; normalizes emission rates.
        detuning_offsets: Static per-atom shift added to the profile (Hz).
        t2: Phase relaxation time (s); None disables decay.
        lx: Sample length (m).
    """

    positions: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    k0: float
    elapsed: float
    reference_weight: float
    detuning_offsets: np.ndarray
    t2: Optional[float]
    lx: float

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def with_offsets(self, offsets: np.ndarray) -> "EnsembleState":
        offsets = np.asarray(offsets, dtype=float)
        if offsets.shape != self.positions.shape:
            raise ProtocolError("One detuning offset per atom is required")
        return replace(self, detuning_offsets=offsets)

    def shifted_phases(self, constant: float) -> "EnsembleState":
        return replace(self, phases=self.phases + constant)


def init_ensemble(
    n_atoms: int,
    lx: float,
    k0: float,
    placement: Placement = Placement.EQUISPACED,
    optical_depth: float = 0.0,
    t2: Optional[float] = None,
    seed: int = settings.DEFAULT_SEED,
) -> EnsembleState:
    """
    Freshly written ensemble.

    Args:
        n_atoms: Number of atoms, at least 2.
        lx: Sample length (m); atoms span [-lx/2, lx/2].
        k0: Optical wavevector (rad/m).
        placement: Cell centres or seeded uniform draws.
        optical_depth: αL of the exponential excitation profile; 0 is uniform.
        t2: Phase relaxation time applied during evolution.
        seed: Seed for uniform placement.

    Returns:
        State with zero phases and Σ|a_j|² = 1.
    """
    if n_atoms < 2:
        raise ProtocolError(f"At least 2 atoms are required, got {n_atoms}")
    if not lx > 0:
        raise ProtocolError("Sample length must be positive")
    if optical_depth < 0:
        raise ProtocolError("Optical depth must be non-negative")

    placement = Placement(placement)
    if placement is Placement.EQUISPACED:
        positions = -lx / 2 + (np.arange(n_atoms) + 0.5) * lx / n_atoms
    else:
        rng = np.random.default_rng(seed)
        positions = np.sort(rng.uniform(-lx / 2, lx / 2, n_atoms))

    depth_from_input = positions + lx / 2
    amplitudes = np.exp(-optical_depth * depth_from_input / (2 * lx)).astype(complex)
    amplitudes /= np.sqrt(np.sum(np.abs(amplitudes) ** 2))

    return EnsembleState(
        positions=positions,
        amplitudes=amplitudes,
        phases=np.zeros(n_atoms),
        k0=k0,
        elapsed=0.0,
        reference_weight=float(np.sum(np.abs(amplitudes))),
        detuning_offsets=np.zeros(n_atoms),
        t2=t2,
        lx=lx,
    )


def evolve(
    state: EnsembleState, profile: ShiftProfile, schedule: FieldSchedule, t: float
) -> EnsembleState:
    """
    Advance the state by `t` under shift profile × schedule.

    φ_j gains 2π (shift(x_j) + offset_j) ∫_0^t g dt'. With T₂ set, amplitudes
    decay by exp(-t/T₂).

    Raises:
        ProfileSpanError: If an atom lies outside the profile span.
    """
    if t < 0:
        raise ProtocolError(f"Evolution time must be non-negative, got {t}")
    area = schedule.area(0.0, t)
    phases = state.phases
    amplitudes = state.amplitudes
    if area != 0:
        shift = profile.interpolate(state.positions) + state.detuning_offsets
        phases = phases + 2 * math.pi * shift * area
    if state.t2 is not None and t > 0:
        amplitudes = amplitudes * math.exp(-t / state.t2)
    return replace(state, phases=phases, amplitudes=amplitudes, elapsed=state.elapsed + t)


def emission_rate(state: EnsembleState, direction: Direction = Direction.FORWARD) -> float:
    """Normalized collective emission rate towards `direction`."""
    k_d = state.k0 if Direction(direction) is Direction.FORWARD else -state.k0
    phase = (state.k0 - k_d) * state.positions + state.phases
    field = np.sum(state.amplitudes * np.exp(1j * phase))
    return float(abs(field) ** 2 / state.reference_weight**2)


@dataclass(frozen=True)
class EmissionReport:
    """Forward and backward rates at one instant."""

    t: float
    forward: float
    backward: float
    label: str = ""

    @property
    def contrast(self) -> float:
        """R₋/R₊ (inf when forward emission vanishes)."""
        if self.forward == 0:
            return math.inf
        return self.backward / self.forward

    def to_row(self) -> Tuple[float, float, float]:
        return (self.t, self.forward, self.backward)


def report(state: EnsembleState, label: str = "") -> EmissionReport:
    return EmissionReport(
        t=state.elapsed,
        forward=emission_rate(state, Direction.FORWARD),
        backward=emission_rate(state, Direction.BACKWARD),
        label=label,
    )


class ResidualModel:
    """Static per-atom shift error left after subtracting the ideal ramp."""

    name = "none"

    def offsets(self, state: EnsembleState) -> np.ndarray:
        return np.zeros(state.n_atoms)

    def predicted_efficiency(self, t_rev: float) -> float:
        return 1.0


class TwoPointResidual(ResidualModel):
    """Alternating ±δν: half the atoms shifted up, half down."""

    name = "two_point"

    def __init__(self, delta_nu_rms: float):
        if not delta_nu_rms > 0:
            raise ProtocolError("Residual RMS must be positive")
        self.delta_nu_rms = delta_nu_rms

    def offsets(self, state: EnsembleState) -> np.ndarray:
        signs = np.where(np.arange(state.n_atoms) % 2 == 0, 1.0, -1.0)
        return self.delta_nu_rms * signs

    def predicted_efficiency(self, t_rev: float) -> float:
        return two_point_dephasing(self.delta_nu_rms, t_rev)


class GaussianResidual(ResidualModel):
    """Independent normal offsets with standard deviation δν (seeded)."""

    name = "gaussian"

    def __init__(self, delta_nu_rms: float, seed: int = settings.DEFAULT_SEED):
        if not delta_nu_rms > 0:
            raise ProtocolError("Residual RMS must be positive")
        self.delta_nu_rms = delta_nu_rms
        self.seed = seed

    def offsets(self, state: EnsembleState) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.normal(0.0, self.delta_nu_rms, state.n_atoms)

    def predicted_efficiency(self, t_rev: float) -> float:
        return gaussian_dephasing(self.delta_nu_rms, t_rev)


class FieldMapResidual(ResidualModel):
    """Fit residuals of a solved field, stretched onto the sample."""

    name = "from_field_map"

    def __init__(self, linearity: LinearityReport, delta_nu_rms: Optional[float] = None):
        """
        Args:
            linearity: Fit whose residual shape is used.
            delta_nu_rms: Rescale the residuals to this RMS (Hz); keeps the
                          fitted RMS when None.
        """
        self.linearity = linearity
        if not linearity.delta_nu_rms > 0:
            raise ProtocolError("Residual RMS must be positive")
        if delta_nu_rms is None:
            delta_nu_rms = linearity.delta_nu_rms
        if not delta_nu_rms > 0:
            raise ProtocolError("Residual RMS must be positive")
        self.delta_nu_rms = float(delta_nu_rms)
        self.scale = self.delta_nu_rms / linearity.delta_nu_rms

    def offsets(self, state: EnsembleState) -> np.ndarray:
        x = self.linearity.x
        # map the fitted span onto [-lx/2, lx/2]
        u = (state.positions + state.lx / 2) / state.lx
        residuals = self.scale * self.linearity.residuals
        return np.interp(x[0] + u * (x[-1] - x[0]), x, residuals)

    def predicted_efficiency(self, t_rev: float) -> float:
        return two_point_dephasing(self.delta_nu_rms, t_rev)


@dataclass(frozen=True)
class ProtocolRun:
    """Emission time series of one protocol simulation."""

    reports: Tuple[EmissionReport, ...]
    t_rev: float
    verdict: str

    def find(self, label: str) -> EmissionReport:
        for item in self.reports:
            if item.label == label:
                return item
        raise KeyError(label)


@dataclass(frozen=True)
class ProtocolConfig:
    """
    Inputs of an ensemble protocol run.

    `profile` defaults to the ideal linear ramp of edge shift `delta_nu`.
    """

    preset: MaterialPreset
    lx: float
    delta_nu: float
    n_atoms: int = 10_000
    m_max: int = 3
    optical_depth: float = 0.0
    placement: Placement = Placement.EQUISPACED
    hold: float = 0.0
    use_t2: bool = False
    profile: Optional[ShiftProfile] = None
    residual: Optional[ResidualModel] = None
    seed: int = settings.DEFAULT_SEED

    def shift_profile(self) -> ShiftProfile:
        if self.profile is not None:
            return self.profile
        return ShiftProfile.linear(self.delta_nu, self.lx)


def run_protocol(config: ProtocolConfig) -> ProtocolRun:
    """
    Write, twist to each t_m, hold, conjugate at t_rev, and read out.

    Reports carry labels "write", "t_m=<m>", "hold", "backward_readout" and
    "forward_readout". The forward readout reverses the field for t_1 starting
    from the state at t_1, which restores the superradiant state.
    """
    profile = config.shift_profile()
    t_rev = reversal_time(config.preset, config.lx, config.delta_nu)
    t_m = subradiance_times(config.delta_nu, config.m_max)
    if t_m[-1] > t_rev:
        raise ProtocolError("Subradiance times must not exceed the reversal time")

    state = init_ensemble(
        config.n_atoms,
        config.lx,
        optical_wavevector(config.preset),
        placement=config.placement,
        optical_depth=config.optical_depth,
        t2=config.preset.t2 if config.use_t2 else None,
        seed=config.seed,
    )
    if config.residual is not None:
        state = state.with_offsets(config.residual.offsets(state))

    reports: List[EmissionReport] = [report(state, "write")]
    on = FieldSchedule.rectangular(t_rev)
    field_time = 0.0
    first_twist = None
    for m, t in enumerate(t_m, start=1):
        state = evolve(state, profile, on, t - field_time)
        field_time = t
        reports.append(report(state, f"t_m={m}"))
        if first_twist is None:
            first_twist = state

    if config.hold > 0:
        state = evolve(state, profile, FieldSchedule.off(config.hold), config.hold)
        reports.append(report(state, "hold"))

    state = evolve(state, profile, on, t_rev - field_time)
    backward = report(state, "backward_readout")
    reports.append(backward)

    restored = evolve(first_twist, profile, on.negated(), float(t_m[0]))
    reports.append(report(restored, "forward_readout"))

    verdict = "backward" if backward.backward > backward.forward else "forward"
    logger.debug(
        f"Protocol run: backward {backward.backward:.6f}, forward {backward.forward:.3e}"
    )
    return ProtocolRun(reports=tuple(reports), t_rev=t_rev, verdict=verdict)


@dataclass(frozen=True)
class DephasingStudy:
    """Measured backward efficiency against the closed-form prediction."""

    model: str
    delta_nu_rms: float
    t_rev: float
    measured: float
    cos2_prediction: float
    model_prediction: float

    @property
    def difference(self) -> float:
        return self.measured - self.cos2_prediction

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "delta_nu_rms_hz": self.delta_nu_rms,
            "t_rev_s": self.t_rev,
            "measured": self.measured,
            "cos2_prediction": self.cos2_prediction,
            "model_prediction": self.model_prediction,
            "difference": self.difference,
        }


def residual_dephasing_study(
    model: ResidualModel,
    t_rev: float,
    n_atoms: int = 10_000,
    lx: float = 1.0,
    k0: float = 2 * math.pi,
) -> DephasingStudy:
    """
    Backward efficiency at t_rev when only the residual survives.

    The ensemble evolves under the ideal ramp whose edge shift makes `t_rev`
    the reversal time, with the model's offsets attached to the atoms. The
    ramp conjugates the grating, so whatever backward emission is lost comes
    from the residual alone.
    """
    if not t_rev > 0:
        raise ProtocolError("Reversal time must be positive")
    # Δν t_rev = L_x n/λ = k0 L_x / 2π
    delta_nu = k0 * lx / (2 * math.pi * t_rev)
    state = init_ensemble(n_atoms, lx, k0)
    offsets = model.offsets(state)
    state = state.with_offsets(offsets)
    state = evolve(
        state, ShiftProfile.linear(delta_nu, lx), FieldSchedule.rectangular(t_rev), t_rev
    )
    measured = emission_rate(state, Direction.BACKWARD)
    weights = np.abs(state.amplitudes)
    rms = float(np.sqrt(np.sum(weights**2 * offsets**2) / np.sum(weights**2)))
    return DephasingStudy(
        model=model.name,
        delta_nu_rms=rms,
        t_rev=t_rev,
        measured=measured,
        cos2_prediction=two_point_dephasing(rms, t_rev),
        model_prediction=model.predicted_efficiency(t_rev),
    )
