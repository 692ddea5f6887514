"""
Closed-form reference values.

These are evaluated independently of the simulators so that tests compare
simulation output against arithmetic that never touches simulator code.
"""

import math


def beer_lambert_transmission(optical_depth: float) -> float:
    """Resonant intensity transmission e^{-d}."""
    return math.exp(-optical_depth)


def forward_crib_efficiency(optical_depth: float) -> float:
    """Forward retrieval with re-absorption: d^2 e^{-d}."""
    return optical_depth**2 * math.exp(-optical_depth)


def backward_crib_efficiency(optical_depth: float) -> float:
    """Backward (phase-conjugated) retrieval: (1 - e^{-d})^2."""
    return (1.0 - math.exp(-optical_depth)) ** 2


def two_point_dephasing(delta_nu_rms: float, duration: float) -> float:
    """|<e^{iθ}>|^2 for a symmetric ±δν residual: cos^2(2πδν t)."""
    return math.cos(2 * math.pi * delta_nu_rms * duration) ** 2


def gaussian_dephasing(delta_nu_rms: float, duration: float) -> float:
    """|<e^{iθ}>|^2 for a Gaussian residual of RMS δν: exp(-(2πδν t)^2)."""
    return math.exp(-((2 * math.pi * delta_nu_rms * duration) ** 2))


def cubic_profile_linearity(c: float) -> dict:
    """
    Least-squares line through shift(x) = x + c x^3 sampled uniformly on [-1, 1].

    The cubic projects onto x with weight 3/5, leaving x^3 - 3x/5 whose mean
    square over [-1, 1] is 1/7 - 6/25 + 3/25.
    """
    slope = 1.0 + 3.0 * c / 5.0
    rms = abs(c) * math.sqrt(1.0 / 7.0 - 6.0 / 25.0 + 3.0 / 25.0)
    delta_nu = abs(slope)
    return {"slope": slope, "delta_nu": delta_nu, "delta_nu_rms": rms, "ratio": rms / delta_nu}
