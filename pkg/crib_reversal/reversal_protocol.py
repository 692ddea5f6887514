"""
Reversal protocol arithmetic.

Closed-form timing of the field-controlled reversal: how long the linear
shift must be applied to turn the stored grating from +k0 into -k0, when
forward emission is cancelled, how linear the shift has to be for a target
efficiency, and whether a given field schedule meets the switching budget.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import ProtocolError
from .materials import MaterialPreset, optical_wavevector

logger = logging.getLogger(__name__)

QUARTER_CYCLE = 0.25


def _require_positive(**values):
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise ProtocolError(f"{name} must be positive and finite, got {value}")


def optical_length(preset: MaterialPreset, lx: float) -> float:
    """Sample length in wavelengths inside the medium, L_x n / λ."""
    _require_positive(lx=lx)
    return lx * preset.refractive_index / preset.lambda_vac


def reversal_time(preset: MaterialPreset, lx: float, delta_nu: float) -> float:
    """
    Field-on time that conjugates the stored grating.

    Args:
        preset: Storage medium.
        lx: Sample length (m).
        delta_nu: Edge shift Δν of the linear profile (Hz).

    Returns:
        t_rev = (L_x n / λ) / Δν in seconds.
    """
    _require_positive(lx=lx, delta_nu=delta_nu)
    return optical_length(preset, lx) / delta_nu


def subradiance_times(delta_nu: float, m_max: int) -> np.ndarray:
    """Times t_m = m / (2Δν), m = 1 ... m_max, at which forward emission cancels."""
    _require_positive(delta_nu=delta_nu)
    if m_max < 1:
        raise ProtocolError(f"m_max must be at least 1, got {m_max}")
    return np.arange(1, m_max + 1) / (2.0 * delta_nu)


def switching_tolerance(delta_nu: float) -> float:
    """A quarter of the subradiance spacing, 1 / (8Δν)."""
    _require_positive(delta_nu=delta_nu)
    return 1.0 / (8.0 * delta_nu)


@dataclass(frozen=True)
class ReversalPlan:
    """
    Timing artifacts of one reversal.

    Attributes:
        preset: Storage medium.
        lx: Sample length (m).
        delta_nu: Edge shift Δν (Hz).
        k0: Optical wavevector (rad/m).
        beta: Ramp rate of the grating wavevector, 4πΔν/L_x (rad m^-1 s^-1).
        t_rev: Reversal time (s).
        t_m: Subradiance times (s).
        switching_tolerance: Allowed timing error 1/(8Δν) (s).
    """

    preset: MaterialPreset
    lx: float
    delta_nu: float
    k0: float
    beta: float
    t_rev: float
    t_m: Tuple[float, ...]
    switching_tolerance: float

    @classmethod
    def build(
        cls, preset: MaterialPreset, lx: float, delta_nu: float, m_max: int = 10
    ) -> "ReversalPlan":
        return cls(
            preset=preset,
            lx=lx,
            delta_nu=delta_nu,
            k0=optical_wavevector(preset),
            beta=4 * math.pi * delta_nu / lx,
            t_rev=reversal_time(preset, lx, delta_nu),
            t_m=tuple(subradiance_times(delta_nu, m_max)),
            switching_tolerance=switching_tolerance(delta_nu),
        )

    @property
    def optical_length(self) -> float:
        return optical_length(self.preset, self.lx)

    def to_dict(self) -> dict:
        return {
            "preset": self.preset.name,
            "lx_m": self.lx,
            "delta_nu_hz": self.delta_nu,
            "k0_rad_per_m": self.k0,
            "beta_rad_per_m_s": self.beta,
            "t_rev_s": self.t_rev,
            "t_m_s": list(self.t_m),
            "switching_tolerance_s": self.switching_tolerance,
        }


def wavevector_at(plan: ReversalPlan, t: float) -> float:
    """Grating wavevector k(t) = k0 - βt while the field is on."""
    if t < 0:
        raise ProtocolError(f"Time must be non-negative, got {t}")
    return plan.k0 - plan.beta * t


@dataclass(frozen=True)
class PhaseTwist:
    """Extra grating wavevector Δk after the field has been on for t_m."""

    delta_k: float
    period: float

    def freezes(self, alpha: float) -> bool:
        """
        True when the twist period is shorter than the absorption length 1/α.

        Such a layer is optically thin over one period, so the subradiant
        state stays dark after the field is switched off.
        """
        if alpha <= 0:
            return False
        return self.period <= (1.0 / alpha) * (1 + 1e-12)


def phase_twist(delta_nu: float, t_m: float, lx: float) -> PhaseTwist:
    """Δk = 4πΔν t_m / L_x and its modulation period 2π/Δk."""
    _require_positive(delta_nu=delta_nu, t_m=t_m, lx=lx)
    delta_k = 4 * math.pi * delta_nu * t_m / lx
    return PhaseTwist(delta_k=delta_k, period=2 * math.pi / delta_k)


def allowed_ratio(optical_length: float, epsilon: Optional[float] = None) -> float:
    """
    Largest δν/Δν compatible with a sample `optical_length` wavelengths long.

    Args:
        optical_length: L_x n / λ.
        epsilon: Target efficiency in (0, 1); None applies the quarter-cycle rule.
    """
    _require_positive(optical_length=optical_length)
    if epsilon is None:
        return QUARTER_CYCLE / optical_length
    if not 0 < epsilon < 1:
        raise ProtocolError(f"Target efficiency must lie in (0, 1), got {epsilon}")
    return math.acos(math.sqrt(epsilon)) / (2 * math.pi) / optical_length


def nonlinearity_bound(
    preset: MaterialPreset, lx: float, epsilon: Optional[float] = None
) -> float:
    """
    Allowed nonlinearity ratio δν/Δν for a sample of length `lx`.

    The quarter-cycle rule keeps the residual phase below π/2; a target
    efficiency ε inverts the cos² dephasing factor instead.
    """
    return allowed_ratio(optical_length(preset, lx), epsilon)


def dephasing_efficiency(delta_nu_rms: float, t_rev: float) -> float:
    """
    Backward-retrieval factor cos²(2πδν t_rev).

    Outside the model's range (argument ≥ π/2) the factor is clamped to 0.
    """
    if delta_nu_rms < 0 or t_rev < 0:
        raise ProtocolError("Residual and reversal time must be non-negative")
    argument = 2 * math.pi * delta_nu_rms * t_rev
    if argument >= math.pi / 2:
        logger.warning(
            f"Dephasing argument {argument:.3f} rad exceeds π/2; efficiency clamped to 0"
        )
        return 0.0
    return math.cos(argument) ** 2


@dataclass(frozen=True)
class EfficiencyBudget:
    """Target efficiency, the nonlinearity it allows and the resulting factor."""

    epsilon: float
    allowed_ratio: float
    dephasing_factor: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ProtocolError(f"Target efficiency must lie in (0, 1), got {self.epsilon}")
        if not self.allowed_ratio > 0:
            raise ProtocolError("Allowed ratio must be positive")

    @classmethod
    def build(cls, preset: MaterialPreset, lx: float, epsilon: float) -> "EfficiencyBudget":
        ratio = nonlinearity_bound(preset, lx, epsilon)
        # δν t_rev = ratio * Δν t_rev = ratio * optical length
        factor = dephasing_efficiency(ratio * optical_length(preset, lx), 1.0)
        return cls(epsilon=epsilon, allowed_ratio=ratio, dephasing_factor=factor)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "allowed_ratio": self.allowed_ratio,
            "dephasing_factor": self.dephasing_factor,
        }


@dataclass(frozen=True, eq=False)
class FieldSchedule:
    """
    Piecewise-linear field amplitude g(t) in units of the nominal profile.

    Knot times are non-decreasing; a repeated time is a jump and g is
    right-continuous there. g is zero before 0 and after the last knot.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ProtocolError("A schedule needs at least two (time, value) knots")
        if times[0] != 0 or np.any(np.diff(times) < 0):
            raise ProtocolError("Schedule knots must start at 0 and be non-decreasing")
        if np.any(np.abs(values) > 1 + 1e-12):
            raise ProtocolError("Schedule amplitude must satisfy |g| <= 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def switch_times(self) -> Tuple[float, ...]:
        """Times where the amplitude jumps or its slope changes."""
        return tuple(float(t) for t in np.unique(self.times[1:-1]))

    @classmethod
    def rectangular(
        cls, duration: float, amplitude: float = 1.0, start: float = 0.0
    ) -> "FieldSchedule":
        if duration < 0 or start < 0:
            raise ProtocolError("Rectangular pulse needs non-negative start and duration")
        if start == 0:
            return cls([0.0, duration], [amplitude, amplitude])
        return cls([0.0, start, start, start + duration], [0.0, 0.0, amplitude, amplitude])

    @classmethod
    def trapezoidal(cls, plateau: float, rise: float, amplitude: float = 1.0) -> "FieldSchedule":
        """Linear ramps of length `rise` around a flat top; area = amplitude*(plateau+rise)."""
        return cls(
            [0.0, rise, rise + plateau, 2 * rise + plateau], [0.0, amplitude, amplitude, 0.0]
        )

    @classmethod
    def off(cls, duration: float) -> "FieldSchedule":
        return cls([0.0, duration], [0.0, 0.0])

    def negated(self) -> "FieldSchedule":
        """Same timing with the field sign flipped."""
        return FieldSchedule(self.times, -self.values)

    def then(self, other: "FieldSchedule") -> "FieldSchedule":
        """Concatenate `other` after this schedule."""
        return FieldSchedule(
            np.concatenate([self.times, other.times + self.duration]),
            np.concatenate([self.values, other.values]),
        )

    def value(self, t) -> np.ndarray:
        """g(t), vectorized."""
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.times, t, side="right") - 1
        inside = (t >= 0) & (t <= self.duration)
        i = np.clip(i, 0, len(self.times) - 2)
        t0 = self.times[i]
        t1 = self.times[i + 1]
        span = np.where(t1 > t0, t1 - t0, 1.0)
        frac = np.clip((t - t0) / span, 0.0, 1.0)
        g = self.values[i] + (self.values[i + 1] - self.values[i]) * frac
        g = np.where(t == self.duration, self.values[-1], g)
        return np.where(inside, g, 0.0)

    def area(self, t0: float = 0.0, t1: Optional[float] = None) -> float:
        """Exact ∫ g dt over [t0, t1] (defaults to the whole schedule)."""
        t1 = self.duration if t1 is None else t1
        if t1 <= t0:
            return 0.0
        ta, tb = self.times[:-1], self.times[1:]
        ga, gb = self.values[:-1], self.values[1:]
        a = np.clip(ta, t0, t1)
        b = np.clip(tb, t0, t1)
        width = np.where(tb > ta, tb - ta, 1.0)
        va = ga + (gb - ga) * (a - ta) / width
        vb = ga + (gb - ga) * (b - ta) / width
        return float(np.sum(0.5 * (va + vb) * (b - a)))

    def to_rows(self) -> List[Tuple[float, float]]:
        return [(float(t), float(g)) for t, g in zip(self.times, self.values)]


def storage_schedule(t_rev: float, t_m: float, hold: float = 0.0) -> FieldSchedule:
    """
    Write, twist, hold, conjugate.

    The field is on for t_m (subradiant twist), off for `hold`, then on for
    the remaining t_rev - t_m so the total area is t_rev.
    """
    if not 0 < t_m <= t_rev:
        raise ProtocolError("t_m must lie in (0, t_rev]")
    schedule = FieldSchedule.rectangular(t_m)
    if hold > 0:
        schedule = schedule.then(FieldSchedule.off(hold))
    return schedule.then(FieldSchedule.rectangular(t_rev - t_m))


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one schedule check; margin > 0 means passed with room."""

    name: str
    passed: bool
    value: float
    limit: float
    margin: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "limit": self.limit,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class ScheduleReport:
    checks: Tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


Deviation = Union[None, float, Callable[[np.ndarray], np.ndarray], Tuple[Sequence, Sequence]]


def _deviation_integral(deviation: Deviation, t_rev: float) -> float:
    """∫_0^t_rev δ(t) dt for a constant, callable or sampled deviation (Hz·s)."""
    if deviation is None:
        return 0.0
    if callable(deviation):
        t = np.linspace(0.0, t_rev, 4097)
        return float(trapezoid(np.asarray(deviation(t), dtype=float), t))
    if isinstance(deviation, tuple):
        t, values = (np.asarray(v, dtype=float) for v in deviation)
        mask = (t >= 0) & (t <= t_rev)
        return float(trapezoid(values[mask], t[mask]))
    return float(deviation) * t_rev


def validate_schedule(
    schedule: FieldSchedule, plan: ReversalPlan, deviation: Deviation = None
) -> ScheduleReport:
    """
    Check a field schedule against the reversal plan.

    Checks:
        area: |∫g dt - t_rev| within the switching tolerance 1/(8Δν).
        mean_deviation: time-averaged shift error times t_rev below 1/4.

    Args:
        schedule: Field amplitude versus time.
        plan: Reversal plan providing t_rev and Δν.
        deviation: Shift error δ(t) in Hz as a constant, a callable of t,
                   or sampled (times, values); None means no error.
    """
    if schedule.duration <= 0:
        raise ProtocolError("Schedule has zero duration")

    area_error = abs(schedule.area() - plan.t_rev)
    tolerance = plan.switching_tolerance
    area_check = CheckResult(
        name="area",
        passed=area_error <= tolerance,
        value=area_error,
        limit=tolerance,
        margin=tolerance - area_error,
    )

    # mean deviation times t_rev equals the integral of the deviation
    cycles = abs(_deviation_integral(deviation, plan.t_rev))
    deviation_check = CheckResult(
        name="mean_deviation",
        passed=cycles < QUARTER_CYCLE,
        value=cycles,
        limit=QUARTER_CYCLE,
        margin=QUARTER_CYCLE - cycles,
    )
    logger.debug(
        f"Schedule check: area error {area_error:.3e} s (limit {tolerance:.3e}), "
        f"deviation {cycles:.3e} cycles"
    )
    return ScheduleReport(checks=(area_check, deviation_check))
