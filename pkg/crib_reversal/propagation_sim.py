"""
One-dimensional linear storage and retrieval with re-absorption.

Normalized units: time in units of the input pulse width, position z in
units of the sample length (0 = input face, 1 = output face), detunings in
rad per time unit. In the frame moving with the light,

    E(z, t) = E_in(t) + i g ∫_0^z Σ_c w_c P_c dz'
    dP_c/dt = -i Δ_c P_c + i g E

so with a line of spectral density n(Δ) the resonant intensity decays as
exp(-2π g² n(0) z). Energies are ∫|E|² dt for fields and ∫ Σ_c w_c |P_c|² dz
for the medium; the pair obeys an exact continuity equation.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.integrate import cumulative_trapezoid, trapezoid

from .exceptions import CalibrationError, IntegratorStabilityError, ProtocolError

logger = logging.getLogger(__name__)

CALIBRATION_TOLERANCE = 0.005
LEDGER_TOLERANCE = 1e-3


class RetrievalMode(str, Enum):
    FORWARD_CRIB = "forward_crib"
    BACKWARD_CONJUGATE = "backward_conjugate"
    GRADIENT_RAMP = "gradient_ramp"


@dataclass(frozen=True)
class GaussianPulse:
    """Unit-energy Gaussian envelope exp(-(t-t0)²/(2τ²)) scaled by `amplitude`."""

    center: float = 5.0
    width: float = 1.0
    amplitude: float = 1.0

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        norm = (1.0 / (math.pi * self.width**2)) ** 0.25
        envelope = np.exp(-((t - self.center) ** 2) / (2 * self.width**2))
        return (self.amplitude * norm * envelope).astype(complex)

    @property
    def energy(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class ArbitraryPulse:
    """Any complex envelope; `energy` is measured on the write window."""

    envelope: Callable[[np.ndarray], np.ndarray]
    amplitude: float = 1.0

    def __call__(self, t) -> np.ndarray:
        return self.amplitude * np.asarray(self.envelope(np.asarray(t, dtype=float)), dtype=complex)


@dataclass(frozen=True, eq=False)
class DetuningLine:
    """Static detuning classes Δ_c with weights w_c summing to 1."""

    detunings: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        detunings = np.asarray(self.detunings, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if detunings.ndim != 1 or detunings.shape != weights.shape or len(detunings) < 2:
            raise ProtocolError("Detuning line needs matching 1D classes and weights")
        if np.any(np.diff(detunings) <= 0):
            raise ProtocolError("Detuning classes must be strictly increasing")
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-9:
            raise ProtocolError("Class weights must be non-negative and sum to 1")
        object.__setattr__(self, "detunings", detunings)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def flat(cls, classes: int = 128, width: float = 8 * math.pi) -> "DetuningLine":
        """Uniform line of total width `width`, classes offset by half a spacing."""
        spacing = width / classes
        detunings = (np.arange(classes) + 0.5 - classes / 2) * spacing
        return cls(detunings, np.full(classes, 1.0 / classes))

    @classmethod
    def lorentzian(
        cls, classes: int = 64, fwhm: float = 2 * math.pi, span: float = 4 * math.pi
    ) -> "DetuningLine":
        """
        Lorentzian weights on an even grid over `span`, renormalized.

        The default comb revives at t = 32, after the default write and read windows.
        """
        spacing = span / classes
        detunings = (np.arange(classes) + 0.5 - classes / 2) * spacing
        weights = 1.0 / (detunings**2 + (fwhm / 2) ** 2)
        return cls(detunings, weights / weights.sum())

    @property
    def density_at_zero(self) -> float:
        """Spectral weight density n(0) per unit detuning."""
        density = self.weights / np.gradient(self.detunings)
        return float(np.interp(0.0, self.detunings, density))

    @property
    def revival_time(self) -> float:
        """Rephasing period 2π/spacing of the discrete comb."""
        return 2 * math.pi / float(np.min(np.diff(self.detunings)))

    def flipped(self) -> "DetuningLine":
        return DetuningLine(-self.detunings[::-1], self.weights[::-1])


@dataclass(frozen=True)
class PropagationConfig:
    """
    Storage and retrieval run settings.

    Attributes:
        optical_depth: Resonant αL.
        nz: Space steps across the sample.
        dt: Time step.
        write_time: Length of the write window; the field is flipped at its end.
        read_time: Length of the retrieval window.
        pulse: Input envelope.
        line: Detuning classes.
        mode: Retrieval mode.
        residual_phase: Phase (rad) versus z in [0, 1] added before a gradient_ramp readout.
    """

    optical_depth: float
    nz: int = 128
    dt: float = 0.01
    write_time: float = 10.0
    read_time: float = 20.0
    pulse: GaussianPulse = GaussianPulse()
    line: DetuningLine = field(default_factory=DetuningLine.lorentzian)
    mode: RetrievalMode = RetrievalMode.BACKWARD_CONJUGATE
    residual_phase: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", RetrievalMode(self.mode))
        if self.optical_depth < 0:
            raise ProtocolError("Optical depth must be non-negative")
        if self.nz < 2 or self.dt <= 0:
            raise ProtocolError("Need nz >= 2 and a positive time step")
        if self.write_time <= 0 or self.read_time <= 0:
            raise ProtocolError("Write and read windows must be positive")

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nz + 1)

    @property
    def nt_write(self) -> int:
        return max(1, int(round(self.write_time / self.dt)))

    @property
    def nt_read(self) -> int:
        return max(1, int(round(self.read_time / self.dt)))

    def analytic_coupling(self) -> float:
        """g with 2π g² n(0) = αL."""
        return math.sqrt(self.optical_depth / (2 * math.pi * self.line.density_at_zero))

    def refined(self) -> "PropagationConfig":
        """Same run with nz and the number of time steps doubled."""
        return replace(self, nz=2 * self.nz, dt=self.dt / 2)


def moving_frame_ratio(length: float, refractive_index: float, pulse_duration: float) -> float:
    """Sample transit time over pulse duration; the moving frame needs this ≪ 1."""
    if length <= 0 or pulse_duration <= 0:
        raise ProtocolError("Length and pulse duration must be positive")
    return length * refractive_index / SPEED_OF_LIGHT / pulse_duration


def check_moving_frame(
    length: float, refractive_index: float, pulse_duration: float, limit: float = 0.1
) -> float:
    """Raise ProtocolError if retardation across the sample is not negligible."""
    ratio = moving_frame_ratio(length, refractive_index, pulse_duration)
    if ratio >= limit:
        raise ProtocolError(
            f"Transit time is {ratio:.3g} of the pulse duration; moving frame needs < {limit}"
        )
    return ratio


def _check_stability(dt: float, coupling: float, line: DetuningLine) -> None:
    rate = float(np.max(np.abs(line.detunings))) + coupling**2
    if dt * rate >= 2.0:
        raise IntegratorStabilityError(
            f"dt*(max|Δ| + g²) = {dt * rate:.3f} must stay below 2; reduce dt"
        )


def _integrate(
    polarization: np.ndarray,
    coupling: float,
    line: DetuningLine,
    z: np.ndarray,
    field_in: Callable[[float], np.ndarray],
    t_start: float,
    t_end: float,
    steps: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    RK4 method of lines for the polarization; the field is slaved to it.

    Returns:
        (final polarization, step times, output-face field at each time)
    """
    dt = (t_end - t_start) / steps
    _check_stability(dt, coupling, line)
    detunings = line.detunings[None, :]
    weights = line.weights

    def local_field(p: np.ndarray, t: float) -> np.ndarray:
        source = p @ weights
        return field_in(t) + 1j * coupling * cumulative_trapezoid(source, z, initial=0.0)

    def rhs(p: np.ndarray, t: float) -> np.ndarray:
        e = local_field(p, t)
        return -1j * detunings * p + 1j * coupling * e[:, None]

    times = t_start + dt * np.arange(steps + 1)
    output = np.empty(steps + 1, dtype=complex)
    p = polarization.copy()
    for n in range(steps):
        t = times[n]
        output[n] = local_field(p, t)[-1]
        k1 = rhs(p, t)
        k2 = rhs(p + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(p + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(p + dt * k3, t + dt)
        p = p + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    output[-1] = local_field(p, times[-1])[-1]
    return p, times, output


def _stored_energy(polarization: np.ndarray, line: DetuningLine, z: np.ndarray) -> float:
    return float(trapezoid(np.abs(polarization) ** 2 @ line.weights, z))


def _zero_field(t: float) -> complex:
    return 0.0


def transmission(config: PropagationConfig, coupling: float) -> float:
    """
    Intensity transmission of the config's pulse through the medium.

    Runs the write stage alone and compares output to input energy.
    """
    z = config.z
    p0 = np.zeros((len(z), len(config.line.detunings)), dtype=complex)
    _, times, output = _integrate(
        p0, coupling, config.line, z, config.pulse, 0.0, config.write_time, config.nt_write
    )
    energy_in = float(trapezoid(np.abs(config.pulse(times)) ** 2, times))
    if energy_in == 0:
        raise CalibrationError("Calibration pulse carries no energy")
    return float(trapezoid(np.abs(output) ** 2, times)) / energy_in


def calibration_config(config: PropagationConfig) -> PropagationConfig:
    """Narrowband calibration pulse used to pin the coupling: τ = 3 centred in a 30-unit window."""
    return replace(
        config,
        pulse=GaussianPulse(center=15.0, width=3.0),
        write_time=30.0,
        mode=RetrievalMode.FORWARD_CRIB,
    )


def calibrate_coupling(config: PropagationConfig, max_rounds: int = 6) -> float:
    """
    Coupling g whose resonant amplitude transmission is exp(-αL/2).

    Starts from the analytic value and rescales g² by the ratio of target to
    measured optical depth until the amplitude transmission is within 0.5%.

    Raises:
        CalibrationError: If the target is not met within `max_rounds` runs.
    """
    if max_rounds < 1:
        raise ProtocolError("max_rounds must be at least 1")
    if config.optical_depth == 0:
        return 0.0
    calibration = calibration_config(config)
    target = math.exp(-config.optical_depth / 2)
    g2 = config.optical_depth / (2 * math.pi * config.line.density_at_zero)
    for round_ in range(max_rounds):
        measured = transmission(calibration, math.sqrt(g2))
        amplitude = math.sqrt(measured)
        error = abs(amplitude - target) / target
        logger.debug(
            f"Calibration round {round_}: amplitude {amplitude:.6f}, target {target:.6f}"
        )
        if error <= CALIBRATION_TOLERANCE:
            return math.sqrt(g2)
        if not 0 < measured < 1:
            break
        g2 *= config.optical_depth / -math.log(measured)
    raise CalibrationError(
        f"Amplitude transmission off by {100 * error:.2f}% after {round_ + 1} rounds"
    )


@dataclass(frozen=True, eq=False)
class StoredState:
    """Medium polarization after the write window."""

    config: PropagationConfig
    coupling: float
    polarization: np.ndarray
    input_energy: float
    transmitted_energy: float
    times: np.ndarray
    output: np.ndarray

    @property
    def stored_energy(self) -> float:
        return _stored_energy(self.polarization, self.config.line, self.config.z)


@dataclass(frozen=True, eq=False)
class RetrievalOutcome:
    """
    Readout result with its energy ledger.

    Attributes:
        mode: Retrieval mode used.
        efficiency: Emitted energy over input energy.
        emitted_energy: Energy of the retrieved field.
        transmitted_energy: Energy that crossed the sample during writing.
        residual_energy: Energy left in the medium at the end of readout.
        input_energy: Energy of the input pulse.
        times: Readout times.
        output: Retrieved field at the exit face.
    """

    mode: RetrievalMode
    efficiency: float
    emitted_energy: float
    transmitted_energy: float
    residual_energy: float
    input_energy: float
    times: np.ndarray
    output: np.ndarray

    @property
    def ledger_error(self) -> float:
        """|input - (transmitted + emitted + residual)|."""
        return abs(
            self.input_energy
            - (self.transmitted_energy + self.emitted_energy + self.residual_energy)
        )

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "efficiency": self.efficiency,
            "emitted_energy": self.emitted_energy,
            "transmitted_energy": self.transmitted_energy,
            "residual_energy": self.residual_energy,
            "input_energy": self.input_energy,
            "ledger_error": self.ledger_error,
        }


def simulate_storage(config: PropagationConfig, coupling: Optional[float] = None) -> StoredState:
    """
    Send the input pulse through the medium over the write window.

    Args:
        config: Run settings.
        coupling: Atom-field coupling; calibrated when None.

    Raises:
        IntegratorStabilityError: If the time step is too large.
    """
    g = calibrate_coupling(config) if coupling is None else coupling
    z = config.z
    p0 = np.zeros((len(z), len(config.line.detunings)), dtype=complex)
    polarization, times, output = _integrate(
        p0, g, config.line, z, config.pulse, 0.0, config.write_time, config.nt_write
    )
    input_energy = float(trapezoid(np.abs(config.pulse(times)) ** 2, times))
    transmitted = float(trapezoid(np.abs(output) ** 2, times))
    logger.debug(f"Storage: input {input_energy:.6f}, transmitted {transmitted:.6f}")
    return StoredState(
        config=config,
        coupling=g,
        polarization=polarization,
        input_energy=input_energy,
        transmitted_energy=transmitted,
        times=times,
        output=output,
    )


def simulate_retrieval(
    stored: StoredState, mode: Optional[RetrievalMode] = None
) -> RetrievalOutcome:
    """
    Flip the detuning classes and read the stored excitation out.

    forward_crib keeps the grating and emits through the far face;
    backward_conjugate conjugates the grating, which in the moving frame is the
    same equation with z mirrored, so the excitation near the input face exits
    there without crossing the sample; gradient_ramp is backward_conjugate with
    the config's residual phase imprinted first.
    """
    config = stored.config
    mode = RetrievalMode(mode or config.mode)
    polarization = stored.polarization
    if mode is RetrievalMode.GRADIENT_RAMP:
        if config.residual_phase is None:
            raise ProtocolError("gradient_ramp mode needs a residual phase profile")
        phase = np.asarray(config.residual_phase(config.z), dtype=float)
        polarization = polarization * np.exp(1j * phase)[:, None]
    if mode is not RetrievalMode.FORWARD_CRIB:
        polarization = polarization[::-1, :]

    # Δ → -Δ reverses the class order; keep each class's polarization with it
    flipped = config.line.flipped()
    polarization = polarization[:, ::-1]
    final, times, output = _integrate(
        polarization,
        stored.coupling,
        flipped,
        config.z,
        _zero_field,
        config.write_time,
        config.write_time + config.read_time,
        config.nt_read,
    )
    emitted = float(trapezoid(np.abs(output) ** 2, times))
    residual = _stored_energy(final, flipped, config.z)
    efficiency = emitted / stored.input_energy if stored.input_energy > 0 else 0.0
    outcome = RetrievalOutcome(
        mode=mode,
        efficiency=efficiency,
        emitted_energy=emitted,
        transmitted_energy=stored.transmitted_energy,
        residual_energy=residual,
        input_energy=stored.input_energy,
        times=times,
        output=output,
    )
    if outcome.ledger_error > LEDGER_TOLERANCE:
        logger.warning(f"Energy ledger off by {outcome.ledger_error:.2e} ({mode.value})")
    return outcome


def run_memory(config: PropagationConfig, coupling: Optional[float] = None) -> RetrievalOutcome:
    """Storage followed by retrieval in the config's mode."""
    return simulate_retrieval(simulate_storage(config, coupling))


def residual_phase_from_profile(
    x: np.ndarray, residuals: np.ndarray, t_rev: float
) -> Callable[[np.ndarray], np.ndarray]:
    """Map a shift residual (Hz) over its x-span onto z in [0, 1] as 2π δ t_rev."""
    x = np.asarray(x, dtype=float)
    residuals = np.asarray(residuals, dtype=float)

    def phase(z: np.ndarray) -> np.ndarray:
        return 2 * math.pi * t_rev * np.interp(x[0] + z * (x[-1] - x[0]), x, residuals)

    return phase


@dataclass(frozen=True)
class SweepRow:
    optical_depth: float
    efficiencies: Dict[str, float]

    def get(self, mode: RetrievalMode) -> float:
        return self.efficiencies[RetrievalMode(mode).value]


@dataclass(frozen=True)
class SweepTable:
    """Efficiency per optical depth and mode with simple diagnostics."""

    rows: Tuple[SweepRow, ...]
    modes: Tuple[RetrievalMode, ...]

    def column(self, mode: RetrievalMode) -> np.ndarray:
        return np.array([row.get(mode) for row in self.rows])

    @property
    def depths(self) -> np.ndarray:
        return np.array([row.optical_depth for row in self.rows])

    def backward_monotone(self) -> bool:
        eta = self.column(RetrievalMode.BACKWARD_CONJUGATE)
        return bool(np.all(np.diff(eta) > 0))

    def crossover_depth(self) -> Optional[float]:
        """Smallest depth from which backward beats forward at every later depth."""
        eta_f = self.column(RetrievalMode.FORWARD_CRIB)
        eta_b = self.column(RetrievalMode.BACKWARD_CONJUGATE)
        ahead = eta_b > eta_f
        for i in range(len(ahead)):
            if np.all(ahead[i:]):
                return float(self.depths[i])
        return None

    def to_rows(self) -> List[Tuple[float, ...]]:
        return [
            (row.optical_depth,) + tuple(row.get(mode) for mode in self.modes) for row in self.rows
        ]


def efficiency_sweep(
    depths: Sequence[float],
    modes: Sequence[RetrievalMode] = (
        RetrievalMode.FORWARD_CRIB,
        RetrievalMode.BACKWARD_CONJUGATE,
    ),
    base: Optional[PropagationConfig] = None,
) -> SweepTable:
    """
    Retrieval efficiency over a grid of optical depths.

    One storage run per depth is shared by all modes.
    """
    if len(depths) == 0:
        raise ProtocolError("Optical depth grid is empty")
    base = base or PropagationConfig(optical_depth=1.0)
    modes = tuple(RetrievalMode(m) for m in modes)
    rows = []
    for depth in depths:
        config = replace(base, optical_depth=float(depth))
        stored = simulate_storage(config)
        efficiencies = {mode.value: simulate_retrieval(stored, mode).efficiency for mode in modes}
        logger.debug(f"Sweep αL={depth}: {efficiencies}")
        rows.append(SweepRow(optical_depth=float(depth), efficiencies=efficiencies))
    return SweepTable(rows=tuple(rows), modes=modes)
