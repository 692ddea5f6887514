"""
Storage-medium presets.

A preset holds the optical and field-response constants of a doped crystal
in SI units. The JSON registry uses laboratory units and is converted on load.
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Dict, Optional

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from . import settings
from .exceptions import FieldTypeMismatchError, InvalidPresetError

logger = logging.getLogger(__name__)

# Laboratory unit -> SI factors
HZ_PER_V_M_PER_KHZ_PER_V_CM = 1e3 / 1e2
HZ_PER_T_PER_MHZ_PER_GAUSS = 1e6 / 1e-4


class FieldKind(str, Enum):
    """Type of control field a medium responds to."""

    ELECTRIC = "electric"
    MAGNETIC = "magnetic"


@dataclass(frozen=True)
class MaterialPreset:
    """
    Optical and field-response constants of a storage medium.

    Attributes:
        name: Registry identifier, e.g. "pr-yso".
        lambda_vac: Vacuum wavelength (m).
        refractive_index: Refractive index n.
        stark_coefficient: Linear Stark shift (Hz per V/m), zero for Zeeman media.
        zeeman_coefficient: Linear Zeeman shift (Hz per T), zero for Stark media.
        t2: Optical phase relaxation time (s).
        alpha: Resonant absorption coefficient (1/m).
    """

    name: str
    lambda_vac: float
    refractive_index: float
    stark_coefficient: float
    zeeman_coefficient: float
    t2: float
    alpha: float = settings.DEFAULT_ALPHA_PER_M

    def __post_init__(self):
        if not self.lambda_vac > 0:
            raise InvalidPresetError(f"{self.name}: lambda_vac must be positive")
        if not self.refractive_index >= 1:
            raise InvalidPresetError(f"{self.name}: refractive_index must be >= 1")
        if not self.t2 > 0:
            raise InvalidPresetError(f"{self.name}: t2 must be positive")
        if not self.alpha >= 0:
            raise InvalidPresetError(f"{self.name}: alpha must be non-negative")
        if (self.stark_coefficient != 0) == (self.zeeman_coefficient != 0):
            raise InvalidPresetError(
                f"{self.name}: exactly one of stark/zeeman coefficients must be nonzero"
            )

    @property
    def field_kind(self) -> FieldKind:
        """Control field type driving this medium."""
        if self.stark_coefficient != 0:
            return FieldKind.ELECTRIC
        return FieldKind.MAGNETIC

    @property
    def coefficient(self) -> float:
        """Shift per unit field (Hz per V/m or Hz per T)."""
        if self.field_kind is FieldKind.ELECTRIC:
            return self.stark_coefficient
        return self.zeeman_coefficient

    @property
    def frequency(self) -> float:
        """Optical transition frequency ν = c/λ (Hz)."""
        return SPEED_OF_LIGHT / self.lambda_vac

    @classmethod
    def from_dict(cls, data: dict) -> "MaterialPreset":
        """Build a preset from a registry entry in laboratory units."""
        try:
            return cls(
                name=data["name"],
                lambda_vac=float(data["lambda_vac_nm"]) * 1e-9,
                refractive_index=float(data["refractive_index"]),
                stark_coefficient=float(data.get("stark_coefficient_khz_per_v_cm", 0.0))
                * HZ_PER_V_M_PER_KHZ_PER_V_CM,
                zeeman_coefficient=float(data.get("zeeman_coefficient_mhz_per_gauss", 0.0))
                * HZ_PER_T_PER_MHZ_PER_GAUSS,
                t2=float(data["t2_us"]) * 1e-6,
                alpha=float(data.get("alpha_per_m", settings.DEFAULT_ALPHA_PER_M)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidPresetError(f"Malformed preset entry: {e}")

    def to_dict(self) -> dict:
        """Return the registry entry in laboratory units."""
        return {
            "name": self.name,
            "lambda_vac_nm": self.lambda_vac * 1e9,
            "refractive_index": self.refractive_index,
            "stark_coefficient_khz_per_v_cm": self.stark_coefficient
            / HZ_PER_V_M_PER_KHZ_PER_V_CM,
            "zeeman_coefficient_mhz_per_gauss": self.zeeman_coefficient
            / HZ_PER_T_PER_MHZ_PER_GAUSS,
            "t2_us": self.t2 * 1e6,
            "alpha_per_m": self.alpha,
        }


def load_presets(path: Optional[str] = None) -> Dict[str, MaterialPreset]:
    """
    Load a preset registry.

    Args:
        path: JSON file with an array of preset entries. Defaults to
              CRIB_PRESETS_FILE, then the packaged registry.

    Returns:
        dict mapping preset name to MaterialPreset
    """
    path = path or settings.PRESETS_FILE
    if path:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = resources.files("crib_reversal").joinpath("data/presets.json").read_text(
            encoding="utf-8"
        )

    try:
        entries = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidPresetError(f"Preset registry is not valid JSON: {e}")

    presets = {}
    for entry in entries:
        preset = MaterialPreset.from_dict(entry)
        presets[preset.name] = preset
    logger.debug(f"Loaded {len(presets)} presets")
    return presets


def get_preset(name: str, path: Optional[str] = None) -> MaterialPreset:
    """Look up a preset by name."""
    presets = load_presets(path)
    if name not in presets:
        raise InvalidPresetError(
            f"Unknown preset '{name}', available: {', '.join(sorted(presets))}"
        )
    return presets[name]


def shift_from_field(
    preset: MaterialPreset, field, kind: Optional[FieldKind] = None
) -> float:
    """
    Convert a field strength to a transition frequency shift.

    Args:
        preset: Storage medium.
        field: Field strength in V/m (electric) or T (magnetic); signed scalar
               or array.
        kind: Field type of `field`. Defaults to the preset's own type.

    Returns:
        Frequency shift in Hz.

    Raises:
        FieldTypeMismatchError: If `kind` differs from the preset's field type.
    """
    if kind is not None and FieldKind(kind) is not preset.field_kind:
        raise FieldTypeMismatchError(
            f"{preset.name} responds to {preset.field_kind.value} fields, "
            f"got {FieldKind(kind).value}"
        )
    if not np.all(np.isfinite(field)):
        raise InvalidPresetError("Field strength must be finite")
    return preset.coefficient * field


def optical_wavevector(preset: MaterialPreset) -> float:
    """Wave vector of the polarization wave in the medium, k0 = 2πn/λ (rad/m)."""
    return 2 * math.pi * preset.refractive_index / preset.lambda_vac
