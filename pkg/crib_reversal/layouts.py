"""
Electrode and wire layout families.

Every family repeats with period 2*lx: one region A of length lx centred on
x = 0 (ions kept) and one region B (ions removed) wrapping around x = ±lx.
Electrodes are d x d squares sitting on the slab faces y = ±ly/2, the top
row carrying +U/2 and the bottom row -U/2.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from .exceptions import LayoutError
from .field_solver import Electrode, ElectrodeLayout, Wire, WireLayout

logger = logging.getLogger(__name__)

SAWTOOTH_POTENTIALS = (0.518, 1.0, 2.14)
SAWTOOTH_SIZE_FRACTION = 0.05
SAWTOOTH_LY_FRACTION = 0.75
# near-axis part of region A used for the quadrupole linearity check
QUADRUPOLE_SPAN_FRACTION = 0.7


def _face_pair(x: float, ly: float, d: float, u: float, group: str, factor: float):
    """Top electrode at +u/2 and its bottom mirror at -u/2."""
    sign_x = 1.0 if x >= 0 else -1.0
    top = Electrode(
        center_x=x,
        center_y=ly / 2 - d / 2,
        width=d,
        height=d,
        potential=factor * u / 2,
        group=group,
        potential_factor=factor / 2,
        x_factor=sign_x,
        y_factor=1.0,
    )
    bottom = Electrode(
        center_x=x,
        center_y=-(ly / 2 - d / 2),
        width=d,
        height=d,
        potential=-factor * u / 2,
        group=group,
        potential_factor=-factor / 2,
        x_factor=sign_x,
        y_factor=-1.0,
    )
    return top, bottom


def quadrupole_layout(
    lx: float, ly: Optional[float] = None, d: Optional[float] = None, u: float = 1.0
) -> ElectrodeLayout:
    """
    Four electrodes per period in alternating-sign rows.

    Electrodes sit at the region A edges x = ±lx/2 on both faces, with signs
    alternating along x and across y, so E_y on the axis is odd in x.
    """
    ly = lx if ly is None else ly
    d = SAWTOOTH_SIZE_FRACTION * lx if d is None else d
    electrodes = []
    for x, factor in ((-lx / 2, -1.0), (lx / 2, 1.0)):
        electrodes.extend(_face_pair(x, ly, d, u, "U", factor))
    return ElectrodeLayout(
        period_lx=2 * lx, ly=ly, electrodes=tuple(electrodes), region_a=((-lx / 2, lx / 2),)
    )


def sawtooth_layout(
    lx: float, ly: float, d: float, potentials: Sequence[float]
) -> ElectrodeLayout:
    """
    Evenly spaced electrode rows with potentials rising outward from x = 0.

    With M potentials (U_1 ... U_M), electrodes sit at x_k = k*lx/(M+1) for
    k = -M ... M+1; the electrode at x = 0 and the one at x = lx (the middle
    of region B) are grounded, and electrode k carries sign(k)*U_|k|/2 on the
    top face. Groups are named "U<k>" (and "G" for grounded ones).
    """
    potentials = [float(u) for u in potentials]
    if not potentials:
        raise LayoutError("At least one electrode potential is required")
    m = len(potentials)
    spacing = lx / (m + 1)
    if d >= spacing:
        raise LayoutError(f"Electrode size {d:.3g} m does not fit the spacing {spacing:.3g} m")
    electrodes = []
    for k in range(-m, m + 2):
        x = k * spacing
        if k == 0 or k == m + 1:
            electrodes.extend(_face_pair(x, ly, d, 0.0, "G", 1.0))
            continue
        u = potentials[abs(k) - 1]
        electrodes.extend(_face_pair(x, ly, d, u, f"U{abs(k)}", float(np.sign(k))))
    return ElectrodeLayout(
        period_lx=2 * lx, ly=ly, electrodes=tuple(electrodes), region_a=((-lx / 2, lx / 2),)
    )


def eight_electrode_layout(
    lx: float, potentials: Sequence[float] = SAWTOOTH_POTENTIALS, scale: float = 1.0
) -> ElectrodeLayout:
    """
    Eight-electrode family: d = 0.05 lx, ly = 0.75 lx, spacing lx/4.

    `potentials` are (U1, U2, U3) in units of `scale` volts; U2 sits at the
    region A edge.
    """
    if len(potentials) != 3:
        raise LayoutError("The eight-electrode family takes exactly three potentials")
    return sawtooth_layout(
        lx,
        SAWTOOTH_LY_FRACTION * lx,
        SAWTOOTH_SIZE_FRACTION * lx,
        [scale * u for u in potentials],
    )


def twelve_electrode_layout(
    lx: float, potentials: Sequence[float] = (1 / 3, 2 / 3, 1.0, 4 / 3, 2.0), scale: float = 1.0
) -> ElectrodeLayout:
    """Twelve-electrode family: spacing lx/6, U3 at the region A edge."""
    if len(potentials) != 5:
        raise LayoutError("The twelve-electrode family takes exactly five potentials")
    return sawtooth_layout(
        lx,
        SAWTOOTH_LY_FRACTION * lx,
        SAWTOOTH_SIZE_FRACTION * lx,
        [scale * u for u in potentials],
    )


def wire_quadrupole(
    lx: float,
    ly: Optional[float] = None,
    current: float = 1.0,
    bias: float = 0.0,
    standoff: Optional[float] = None,
    n_images: int = 64,
) -> WireLayout:
    """
    Line-current analogue of the quadrupole: potentials become currents.

    Wires run just outside the slab at y = ±(ly/2 + standoff) and x = ±lx/2,
    with opposite currents along x and across y. The bias points along x so
    the shift follows b_x, which is odd in x on the axis.
    """
    ly = lx if ly is None else ly
    standoff = SAWTOOTH_SIZE_FRACTION * lx if standoff is None else standoff
    y_wire = ly / 2 + standoff
    wires = []
    for x, sign in ((-lx / 2, -1.0), (lx / 2, 1.0)):
        wires.append(Wire(x=x, y=y_wire, current=sign * current))
        wires.append(Wire(x=x, y=-y_wire, current=-sign * current))
    return WireLayout(
        wires=tuple(wires), bias_field=(bias, 0.0), period=2 * lx, n_images=n_images
    )


def central_span(interval, fraction: float = 1.0):
    """Central `fraction` of an x-interval."""
    if not 0 < fraction <= 1:
        raise LayoutError(f"Span fraction must lie in (0, 1], got {fraction}")
    a, b = interval
    middle = (a + b) / 2
    half = fraction * (b - a) / 2
    return (middle - half, middle + half)
