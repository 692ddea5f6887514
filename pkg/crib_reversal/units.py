"""
Human-unit parsing for command-line flags.

Everything past the CLI edge is SI; this module is the only place that
knows about mm, µs, GHz and friends.
"""

import re
from typing import Dict

from .exceptions import UsageError

LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}
TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12}
FREQUENCY = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
VOLTAGE = {"v": 1.0, "mv": 1e-3, "kv": 1e3}
ELECTRIC_FIELD = {"v/m": 1.0, "v/cm": 1e2, "kv/cm": 1e5}
MAGNETIC_FIELD = {"t": 1.0, "mt": 1e-3, "g": 1e-4}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d].*)?$")


def parse_quantity(text: str, units: Dict[str, float], default: float = 1.0) -> float:
    """
    Parse "1.11GHz" style input into SI.

    Args:
        text: Number with an optional unit suffix.
        units: Suffix table for the expected dimension.
        default: Factor applied to a bare number.

    Raises:
        UsageError: If the text is not a number or the unit is unknown.
    """
    match = _QUANTITY.match(str(text))
    if not match:
        raise UsageError(f"Cannot parse quantity '{text}'")
    value = float(match.group(1))
    suffix = (match.group(2) or "").strip()
    if not suffix:
        return value * default

    table = {key.lower(): factor for key, factor in units.items()}
    key = suffix.lower()
    if key not in table:
        raise UsageError(f"Unknown unit '{suffix}' in '{text}', expected one of {sorted(units)}")
    return value * table[key]


def length(text: str) -> float:
    return parse_quantity(text, LENGTH)


def duration(text: str) -> float:
    return parse_quantity(text, TIME)


def frequency(text: str) -> float:
    return parse_quantity(text, FREQUENCY)


def voltage(text: str) -> float:
    return parse_quantity(text, VOLTAGE)


def field_strength(text: str) -> float:
    """Electric (V/m, V/cm) or magnetic (T, G) field strength in SI."""
    return parse_quantity(text, {**ELECTRIC_FIELD, **MAGNETIC_FIELD})


def efficiency(text: str) -> float:
    """Target efficiency strictly between 0 and 1."""
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"Efficiency must be a number, got '{text}'")
    if not 0 < value < 1:
        raise UsageError(f"Efficiency must lie in (0, 1), got {value:g}")
    return value
