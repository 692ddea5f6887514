"""
Control-field solver.

Solves the 2D static potential of a periodic electrode array with a
five-point finite-difference Laplacian, samples line-current fields, and
measures how linear the induced frequency-shift profile is along the
storage axis x.

Grid conventions: nodes x_i = i*hx (i = -nx/2 ... nx/2-1) periodic with the
array period, and y_j = j*hy (j = -ny//2 ... ny//2) with y = 0 on a node.
Arrays are indexed [i, j].
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.constants import mu_0
from scipy.sparse import linalg as splinalg

from . import settings
from .exceptions import (
    FieldTypeMismatchError,
    FitError,
    GridError,
    LayoutError,
    ProfileSpanError,
    SolverConvergenceError,
    WireSingularityError,
)
from .materials import FieldKind, MaterialPreset

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


def _periodic_offset(x, center: float, period: float):
    """Signed distance x - center folded into [-period/2, period/2)."""
    return (np.asarray(x) - center + period / 2) % period - period / 2


@dataclass(frozen=True)
class Electrode:
    """
    Rectangular electrode cross-section, infinitely long along z.

    `group` ties electrodes that share one design value; the factors map that
    value onto this electrode (potential = potential_factor * value, and the
    mirrored coordinates likewise).
    """

    center_x: float
    center_y: float
    width: float
    height: float
    potential: float
    group: str = ""
    potential_factor: float = 1.0
    x_factor: float = 1.0
    y_factor: float = 1.0


@dataclass(frozen=True)
class ElectrodeLayout:
    """
    Periodic electrode array on a dielectric slab.

    Attributes:
        period_lx: Spatial period of the array along x (m).
        ly: Transverse extent of the slab (m).
        electrodes: Electrode cross-sections.
        region_a: x-intervals where ions remain after preparation.
    """

    period_lx: float
    ly: float
    electrodes: Tuple[Electrode, ...]
    region_a: Tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "electrodes", tuple(self.electrodes))
        object.__setattr__(
            self, "region_a", tuple((float(a), float(b)) for a, b in self.region_a)
        )
        if not (self.period_lx > 0 and self.ly > 0):
            raise LayoutError("Period and transverse extent must be positive")
        self._check_electrodes()
        self._check_regions()

    def _check_electrodes(self):
        half_x = self.period_lx / 2
        half_y = self.ly / 2
        slack = 1e-9 * max(self.period_lx, self.ly)
        for n, e in enumerate(self.electrodes):
            if e.width <= 0 or e.height <= 0:
                raise LayoutError(f"Electrode {n} has a non-positive size")
            if abs(e.center_x) > half_x + slack:
                raise LayoutError(f"Electrode {n} lies outside the period")
            if abs(e.center_y) + e.height / 2 > half_y + slack:
                raise LayoutError(f"Electrode {n} lies outside the slab")
        for n, a in enumerate(self.electrodes):
            for m in range(n + 1, len(self.electrodes)):
                b = self.electrodes[m]
                dx = abs(float(_periodic_offset(a.center_x, b.center_x, self.period_lx)))
                dy = abs(a.center_y - b.center_y)
                if dx < (a.width + b.width) / 2 - slack and dy < (a.height + b.height) / 2 - slack:
                    raise LayoutError(f"Electrodes {n} and {m} overlap")

    def _check_regions(self):
        half_x = self.period_lx / 2
        previous_end = -np.inf
        for a, b in sorted(self.region_a):
            if not (-half_x <= a < b <= half_x):
                raise LayoutError(f"Region A interval ({a}, {b}) is not inside the period")
            if a < previous_end:
                raise LayoutError("Region A intervals overlap")
            previous_end = b

    @property
    def potentials(self) -> np.ndarray:
        return np.array([e.potential for e in self.electrodes])

    @property
    def geometry_key(self) -> tuple:
        """Hashable description of everything but the potentials."""
        return (
            self.period_lx,
            self.ly,
            tuple((e.center_x, e.center_y, e.width, e.height) for e in self.electrodes),
        )

    def with_potentials(self, potentials: Sequence[float]) -> "ElectrodeLayout":
        """Return a copy with new electrode potentials, in electrode order."""
        potentials = list(potentials)
        if len(potentials) != len(self.electrodes):
            raise LayoutError("Potential count does not match electrode count")
        electrodes = tuple(
            replace(e, potential=float(u)) for e, u in zip(self.electrodes, potentials)
        )
        return replace(self, electrodes=electrodes)

    def scaled(self, factor: float) -> "ElectrodeLayout":
        """Return a copy with every potential multiplied by `factor`."""
        return self.with_potentials(self.potentials * factor)

    def group_indices(self, group: str) -> Tuple[int, ...]:
        return tuple(n for n, e in enumerate(self.electrodes) if e.group == group)


@dataclass(frozen=True)
class Wire:
    """Line current along z through (x, y)."""

    x: float
    y: float
    current: float


@dataclass(frozen=True)
class WireLayout:
    """
    Line currents plus a uniform bias field.

    With `period` set, the wires repeat along x and `n_images` periodic images
    on each side are summed.
    """

    wires: Tuple[Wire, ...]
    bias_field: Tuple[float, float] = (0.0, 0.0)
    period: Optional[float] = None
    n_images: int = 64

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        object.__setattr__(self, "bias_field", tuple(float(b) for b in self.bias_field))
        positions = {(w.x, w.y) for w in self.wires}
        if len(positions) != len(self.wires):
            raise LayoutError("Wire positions must be distinct")
        if self.period is not None and self.period <= 0:
            raise LayoutError("Wire array period must be positive")


@dataclass(frozen=True)
class GridSpec:
    """Resolution of the solve: cells per array period, square cells."""

    cells_per_period: int = 256

    def axes(self, period: float, ly: float) -> Tuple[np.ndarray, np.ndarray]:
        nx = int(self.cells_per_period)
        if nx < 4:
            raise GridError("At least 4 cells per period are required")
        hx = period / nx
        n_half = max(1, int(round(ly / (2 * hx))))
        hy = ly / (2 * n_half)
        x = hx * np.arange(-(nx // 2), nx - nx // 2)
        y = hy * np.arange(-n_half, n_half + 1)
        return x, y


@dataclass(frozen=True, eq=False)
class FieldMap:
    """
    Field sampled on a grid.

    `phi` is the electrostatic potential (V), None for magnetic maps.
    `field_x`, `field_y` are E (V/m) or total B including bias (T).
    """

    x: np.ndarray
    y: np.ndarray
    phi: Optional[np.ndarray]
    field_x: np.ndarray
    field_y: np.ndarray
    kind: FieldKind = FieldKind.ELECTRIC
    bias_field: Tuple[float, float] = (0.0, 0.0)
    period_lx: Optional[float] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.x), len(self.y))

    @property
    def spacing(self) -> Tuple[float, float]:
        return (float(self.x[1] - self.x[0]), float(self.y[1] - self.y[0]))

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.field_x, self.field_y)

    def shift_component(self) -> np.ndarray:
        """
        Field scalar that shifts the transition.

        Electric: E_y (ion dipoles are perpendicular to x).
        Magnetic: change of |B0 + b| relative to |B0|; b_x when there is no bias.
        """
        if self.kind is FieldKind.ELECTRIC:
            return self.field_y
        bias = float(np.hypot(*self.bias_field))
        if bias == 0:
            return self.field_x
        return self.magnitude - bias

    def y_index(self, y0: float = 0.0) -> int:
        return int(np.argmin(np.abs(self.y - y0)))


@dataclass(frozen=True, eq=False)
class ShiftProfile:
    """Frequency shift (Hz) sampled along the storage axis x (m)."""

    x: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        shift = np.asarray(self.shift, dtype=float)
        if x.shape != shift.shape or x.ndim != 1:
            raise FitError("Profile x and shift must be 1D arrays of equal length")
        if len(x) > 1 and np.any(np.diff(x) <= 0):
            raise FitError("Profile x values must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def linear(cls, delta_nu: float, lx: float, samples: int = 2001) -> "ShiftProfile":
        """Ideal ramp from +Δν at x = -lx/2 to -Δν at x = +lx/2."""
        x = np.linspace(-lx / 2, lx / 2, samples)
        return cls(x, -2 * delta_nu * x / lx)

    @property
    def span(self) -> Interval:
        return (float(self.x[0]), float(self.x[-1]))

    def restrict(self, span: Interval) -> "ShiftProfile":
        mask = _span_mask(self.x, span)
        return ShiftProfile(self.x[mask], self.shift[mask])

    def centered(self, center: float) -> "ShiftProfile":
        """Profile with x measured from `center`."""
        return ShiftProfile(self.x - center, self.shift)

    def plus(self, other_shift: np.ndarray) -> "ShiftProfile":
        return ShiftProfile(self.x, self.shift + np.asarray(other_shift))

    def interpolate(self, x) -> np.ndarray:
        """Linear interpolation between samples; atoms must lie inside the span."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.span
        slack = 1e-12 * max(abs(lo), abs(hi), 1e-300)
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            raise ProfileSpanError(
                f"Positions outside the profile span [{lo:.6g}, {hi:.6g}] m"
            )
        return np.interp(x, self.x, self.shift)


@dataclass(frozen=True, eq=False)
class LinearityReport:
    """
    Least-squares straight-line fit of a shift profile.

    Attributes:
        slope: Fitted slope b (Hz/m).
        intercept: Fitted intercept a (Hz).
        delta_nu: Half-range of the linear part, |b| * span / 2 (Hz).
        delta_nu_rms: RMS of the residuals, δν (Hz).
        ratio: δν/Δν.
        x: Sample positions used in the fit (m).
        residuals: shift - (a + b x) per sample (Hz).
    """

    slope: float
    intercept: float
    delta_nu: float
    delta_nu_rms: float
    ratio: float
    x: np.ndarray
    residuals: np.ndarray

    def residual_profile(self) -> ShiftProfile:
        return ShiftProfile(self.x, self.residuals)

    def to_dict(self) -> dict:
        return {
            "slope_hz_per_m": self.slope,
            "intercept_hz": self.intercept,
            "delta_nu_hz": self.delta_nu,
            "delta_nu_rms_hz": self.delta_nu_rms,
            "ratio": self.ratio,
            "samples": int(len(self.x)),
        }


@dataclass(frozen=True)
class RegionBox:
    """Rectangle x0 <= x <= x1, |y| <= y_half whose boundary is scanned."""

    x0: float
    x1: float
    y_half: float = 0.0


def _span_mask(x: np.ndarray, span: Interval) -> np.ndarray:
    a, b = span
    slack = 1e-9 * max(abs(b - a), 1e-300)
    return (x >= a - slack) & (x <= b + slack)


class LaplaceOperator:
    """
    Five-point Laplacian with Dirichlet nodes and insulating edges.

    Fixed nodes get identity rows. Free nodes on the y edges (and on the x
    edges when x is not periodic) use mirror ghost points, i.e. zero normal
    derivative. The LU factorization is computed once and reused.
    """

    def __init__(self, fixed: np.ndarray, hx: float, hy: float, periodic_x: bool = True):
        fixed = np.asarray(fixed, dtype=bool)
        nx, ny = fixed.shape
        if nx < 3 or ny < 3:
            raise GridError("Grid needs at least 3 nodes per direction")
        if not fixed.any():
            raise LayoutError("No Dirichlet nodes: potential is undetermined")
        self.fixed = fixed
        self.hx = hx
        self.hy = hy
        self.periodic_x = periodic_x
        self.matrix = self._assemble()
        self._lu = None

    def _assemble(self) -> sparse.csc_matrix:
        nx, ny = self.fixed.shape
        idx = np.arange(nx * ny).reshape(nx, ny)
        free = ~self.fixed
        i, j = np.nonzero(free)
        rows = [idx[i, j]]
        cols = [idx[i, j]]
        # rows scaled by hx**2 so free and fixed rows are both O(1)
        cx = 1.0
        cy = (self.hx / self.hy) ** 2
        vals = [np.full(len(i), -2 * cx - 2 * cy)]

        for step in (1, -1):
            if self.periodic_x:
                ni = (i + step) % nx
            else:
                ni = i + step
                outside = (ni < 0) | (ni >= nx)
                ni = np.where(outside, i - step, ni)
            rows.append(idx[i, j])
            cols.append(idx[ni, j])
            vals.append(np.full(len(i), cx))

            nj = j + step
            outside = (nj < 0) | (nj >= ny)
            nj = np.where(outside, j - step, nj)
            rows.append(idx[i, j])
            cols.append(idx[i, nj])
            vals.append(np.full(len(i), cy))

        fi, fj = np.nonzero(self.fixed)
        rows.append(idx[fi, fj])
        cols.append(idx[fi, fj])
        vals.append(np.ones(len(fi)))

        matrix = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(nx * ny, nx * ny),
        )
        return matrix.tocsc()

    def rhs(self, values: np.ndarray) -> np.ndarray:
        return np.where(self.fixed, values, 0.0).ravel()

    def residual(self, phi: np.ndarray, values: np.ndarray) -> float:
        """Relative residual ||A phi - b|| / ||b|| (absolute when b = 0)."""
        b = self.rhs(values)
        r = np.linalg.norm(self.matrix @ phi.ravel() - b)
        norm_b = np.linalg.norm(b)
        return float(r / norm_b) if norm_b > 0 else float(r)

    def solve(
        self,
        values: np.ndarray,
        method: str = "direct",
        tolerance: float = settings.SOLVER_TOLERANCE,
        max_iter: int = settings.SOLVER_MAX_ITER,
    ) -> np.ndarray:
        """
        Solve for the potential given Dirichlet values on fixed nodes.

        Args:
            values: Array of node values; only fixed nodes are read.
            method: "direct" (sparse LU) or "bicgstab" (ILU-preconditioned).
            tolerance: Required relative residual.
            max_iter: Iteration cap for the iterative method.

        Raises:
            SolverConvergenceError: If the residual stays above `tolerance`.
        """
        b = self.rhs(values)
        if not np.any(b):
            return np.zeros(self.fixed.shape)

        if method == "direct":
            if self._lu is None:
                try:
                    self._lu = splinalg.splu(self.matrix)
                except RuntimeError as e:
                    raise SolverConvergenceError(f"Sparse factorization failed: {e}")
            phi = self._lu.solve(b)
        elif method == "bicgstab":
            ilu = splinalg.spilu(self.matrix, drop_tol=1e-5, fill_factor=20)
            preconditioner = splinalg.LinearOperator(self.matrix.shape, ilu.solve)
            phi, info = splinalg.bicgstab(
                self.matrix, b, rtol=0.1 * tolerance, atol=0.0, maxiter=max_iter, M=preconditioner
            )
            if info != 0:
                raise SolverConvergenceError(
                    f"bicgstab stopped after {max_iter} iterations (info={info})"
                )
        else:
            raise GridError(f"Unknown solver method '{method}'")

        phi = phi.reshape(self.fixed.shape)
        residual = self.residual(phi, values)
        logger.debug(f"Laplace solve ({method}) relative residual {residual:.3e}")
        if residual > tolerance:
            raise SolverConvergenceError(
                f"Relative residual {residual:.3e} exceeds tolerance {tolerance:.1e}"
            )
        return phi


def _field_from_potential(phi: np.ndarray, hx: float, hy: float, periodic_x: bool):
    if periodic_x:
        ex = -(np.roll(phi, -1, axis=0) - np.roll(phi, 1, axis=0)) / (2 * hx)
    else:
        ex = -np.gradient(phi, hx, axis=0, edge_order=2)
    ey = -np.gradient(phi, hy, axis=1, edge_order=2)
    return ex, ey


def solve_grid(
    x: np.ndarray,
    y: np.ndarray,
    fixed: np.ndarray,
    values: np.ndarray,
    periodic_x: bool = True,
    method: str = "direct",
    tolerance: float = settings.SOLVER_TOLERANCE,
) -> FieldMap:
    """
    Solve Laplace's equation on an explicit grid.

    Args:
        x, y: Uniform node coordinates (m).
        fixed: Boolean mask of Dirichlet nodes, shape (len(x), len(y)).
        values: Node potentials (V); read on fixed nodes.
        periodic_x: Wrap x; otherwise unfixed x edges are insulating.

    Returns:
        FieldMap with potential and E components.
    """
    hx = float(x[1] - x[0])
    hy = float(y[1] - y[0])
    operator = LaplaceOperator(fixed, hx, hy, periodic_x=periodic_x)
    phi = operator.solve(np.asarray(values, dtype=float), method=method, tolerance=tolerance)
    ex, ey = _field_from_potential(phi, hx, hy, periodic_x)
    period = hx * len(x) if periodic_x else None
    return FieldMap(x=x, y=y, phi=phi, field_x=ex, field_y=ey, period_lx=period)


class PotentialSolver:
    """
    Electrode-array solver that caches factorizations per geometry.

    Changing only potentials reuses the cached LU factorization, which keeps
    potential optimization cheap.
    """

    def __init__(
        self,
        tolerance: float = settings.SOLVER_TOLERANCE,
        max_iter: int = settings.SOLVER_MAX_ITER,
        cache_size: int = 8,
    ):
        self.tolerance = tolerance
        self.max_iter = max_iter
        self.cache_size = cache_size
        self._cache: "OrderedDict[tuple, tuple]" = OrderedDict()

    def _prepare(self, layout: ElectrodeLayout, grid: GridSpec):
        key = (layout.geometry_key, grid.cells_per_period)
        if key in self._cache:
            self._cache.move_to_end(key)
            return self._cache[key]

        x, y = grid.axes(layout.period_lx, layout.ly)
        hx = float(x[1] - x[0])
        hy = float(y[1] - y[0])
        masks = []
        for n, e in enumerate(layout.electrodes):
            offset = _periodic_offset(x, e.center_x, layout.period_lx)
            in_x = np.abs(offset) <= e.width / 2 + 1e-9 * hx
            in_y = np.abs(y - e.center_y) <= e.height / 2 + 1e-9 * hy
            if in_x.sum() < 2 or in_y.sum() < 2:
                raise GridError(
                    f"Electrode {n} covers {in_x.sum()}x{in_y.sum()} cells; "
                    f"refine the grid to at least 2 cells per side"
                )
            masks.append(np.outer(in_x, in_y))
        fixed = np.logical_or.reduce(masks)
        operator = LaplaceOperator(fixed, hx, hy, periodic_x=True)
        entry = (x, y, operator, masks)

        self._cache[key] = entry
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return entry

    def solve(
        self, layout: ElectrodeLayout, grid: GridSpec = GridSpec(), method: str = "direct"
    ) -> FieldMap:
        x, y, operator, masks = self._prepare(layout, grid)
        values = np.zeros(operator.fixed.shape)
        for mask, e in zip(masks, layout.electrodes):
            values[mask] = e.potential
        phi = operator.solve(
            values, method=method, tolerance=self.tolerance, max_iter=self.max_iter
        )
        ex, ey = _field_from_potential(phi, operator.hx, operator.hy, periodic_x=True)
        return FieldMap(
            x=x, y=y, phi=phi, field_x=ex, field_y=ey, period_lx=layout.period_lx
        )

    def clear(self) -> None:
        self._cache.clear()


_default_solver = PotentialSolver()


def solve_potential(
    layout: ElectrodeLayout,
    grid: GridSpec = GridSpec(),
    method: str = "direct",
    solver: Optional[PotentialSolver] = None,
) -> FieldMap:
    """
    Solve the static potential of a periodic electrode layout.

    Electrode cells are Dirichlet nodes at the electrode potential, x is
    periodic with the layout period, and the slab faces y = ±ly/2 are
    insulating between electrodes.

    Args:
        layout: Electrode geometry and potentials.
        grid: Cells per period.
        method: "direct" or "bicgstab".
        solver: Solver instance with its own factorization cache.

    Returns:
        FieldMap with potential and electric field.

    Raises:
        GridError: If an electrode spans fewer than 2 cells per side.
        SolverConvergenceError: If the residual misses the tolerance.
    """
    return (solver or _default_solver).solve(layout, grid, method=method)


def _wire_b(layout: WireLayout, x, y) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    bx = np.zeros(np.broadcast(x, y).shape)
    by = np.zeros_like(bx)
    shifts = [0.0]
    if layout.period is not None:
        shifts = [k * layout.period for k in range(-layout.n_images, layout.n_images + 1)]
    for wire in layout.wires:
        for s in shifts:
            dx = x - (wire.x + s)
            dy = y - wire.y
            r2 = dx**2 + dy**2
            if np.any(r2 <= 1e-30):
                raise WireSingularityError(
                    f"Field evaluated on the wire at ({wire.x + s:.6g}, {wire.y:.6g})"
                )
            scale = mu_0 * wire.current / (2 * np.pi * r2)
            bx = bx - scale * dy
            by = by + scale * dx
    return bx, by


def wire_field(layout: WireLayout, x, y) -> np.ndarray:
    """
    Magnetic field of line currents plus bias (T).

    Each wire contributes μ0 I / (2π r) along the azimuth (right-hand rule
    about +z). Accepts scalars or broadcastable arrays; returns an array whose
    leading axis holds (B_x, B_y).

    Raises:
        WireSingularityError: If (x, y) coincides with a wire.
    """
    bx, by = _wire_b(layout, x, y)
    return np.stack([bx + layout.bias_field[0], by + layout.bias_field[1]])


def wire_field_map(layout: WireLayout, ly: float, grid: GridSpec = GridSpec()) -> FieldMap:
    """Sample a periodic wire layout on the solver grid over |y| <= ly/2."""
    if layout.period is None:
        raise LayoutError("Wire field maps need a periodic wire layout")
    x, y = grid.axes(layout.period, ly)
    xx, yy = np.meshgrid(x, y, indexing="ij")
    b = wire_field(layout, xx, yy)
    return FieldMap(
        x=x,
        y=y,
        phi=None,
        field_x=b[0],
        field_y=b[1],
        kind=FieldKind.MAGNETIC,
        bias_field=layout.bias_field,
        period_lx=layout.period,
    )


def shift_profile(
    field_map: FieldMap, preset: MaterialPreset, core_half_width: Optional[float] = None
) -> ShiftProfile:
    """
    Frequency-shift profile along x.

    Args:
        field_map: Solved field.
        preset: Medium whose coefficient converts field to shift.
        core_half_width: If given, average the shift over |y| <= core_half_width;
                         otherwise sample y = 0.

    Raises:
        FieldTypeMismatchError: If map and preset field types differ.
        GridError: If the core band exceeds the grid.
    """
    if field_map.kind is not preset.field_kind:
        raise FieldTypeMismatchError(
            f"{preset.name} needs a {preset.field_kind.value} field map, "
            f"got {field_map.kind.value}"
        )
    component = field_map.shift_component()
    if core_half_width is None:
        values = component[:, field_map.y_index(0.0)]
    else:
        y_max = float(np.max(np.abs(field_map.y)))
        if core_half_width < 0 or core_half_width > y_max * (1 + 1e-9):
            raise GridError(
                f"Core half-width {core_half_width:.4g} m exceeds the grid ({y_max:.4g} m)"
            )
        band = np.abs(field_map.y) <= core_half_width * (1 + 1e-9)
        values = component[:, band].mean(axis=1)
    return ShiftProfile(field_map.x.copy(), preset.coefficient * values)


def linearity_report(profile: ShiftProfile, span: Optional[Interval] = None) -> LinearityReport:
    """
    Fit shift ≈ a + b x by least squares over `span` and report δν/Δν.

    Δν is |b| * (span length) / 2 and δν is the RMS residual.

    Raises:
        FitError: If fewer than 3 samples fall in the span or all x are equal.
    """
    if span is None:
        span = profile.span
    if span[1] <= span[0]:
        raise FitError(f"Degenerate span ({span[0]}, {span[1]})")
    mask = _span_mask(profile.x, span)
    x = profile.x[mask]
    shift = profile.shift[mask]
    if len(x) < 3:
        raise FitError(f"Only {len(x)} samples in span; need at least 3")
    if np.ptp(x) == 0:
        raise FitError("All sample positions are equal")

    center = x.mean()
    scale = np.ptp(x) / 2
    u = (x - center) / scale
    design = np.column_stack([np.ones_like(u), u])
    (a_u, b_u), *_ = np.linalg.lstsq(design, shift, rcond=None)
    residuals = shift - design @ np.array([a_u, b_u])

    slope = b_u / scale
    intercept = a_u - slope * center
    delta_nu = abs(slope) * (span[1] - span[0]) / 2
    rms = float(np.sqrt(np.mean(residuals**2)))
    if delta_nu > 0:
        ratio = rms / delta_nu
    else:
        ratio = 0.0 if rms == 0 else float("inf")
    return LinearityReport(
        slope=float(slope),
        intercept=float(intercept),
        delta_nu=float(delta_nu),
        delta_nu_rms=rms,
        ratio=float(ratio),
        x=x,
        residuals=residuals,
    )


def max_field(field_map: FieldMap, region: RegionBox) -> float:
    """Maximum field magnitude on the grid nodes of the region boundary."""
    ix = np.nonzero(_span_mask(field_map.x, (region.x0, region.x1)))[0]
    iy = np.nonzero(np.abs(field_map.y) <= region.y_half * (1 + 1e-9) + 1e-300)[0]
    if len(ix) == 0 or len(iy) == 0:
        raise GridError("Region does not contain any grid nodes")
    magnitude = field_map.magnitude
    edges = [
        magnitude[ix[0], iy],
        magnitude[ix[-1], iy],
        magnitude[ix, iy[0]],
        magnitude[ix, iy[-1]],
    ]
    return float(max(np.max(edge) for edge in edges))


def harmonic_residual(field_map: FieldMap, fixed: Optional[np.ndarray] = None) -> float:
    """Largest 5-point Laplacian of φ over interior non-fixed nodes (V/m²)."""
    if field_map.phi is None:
        raise GridError("Magnetic maps carry no potential")
    phi = field_map.phi
    hx, hy = field_map.spacing
    lap = (phi[2:, 1:-1] - 2 * phi[1:-1, 1:-1] + phi[:-2, 1:-1]) / hx**2 + (
        phi[1:-1, 2:] - 2 * phi[1:-1, 1:-1] + phi[1:-1, :-2]
    ) / hy**2
    if fixed is not None:
        lap = np.where(fixed[1:-1, 1:-1], 0.0, lap)
    return float(np.max(np.abs(lap))) if lap.size else 0.0
