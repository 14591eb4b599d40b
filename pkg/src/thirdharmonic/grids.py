"""Grids, complex fields, and quadrature for the three supported geometries.

Conventions
-----------
Radial3D   : domain [0, L], midpoint samples r_j = (j + 1/2) h with h = L/N.
             Quadrature weight 4 pi r^2 h (composite midpoint for the 3D
             radial measure).  The transform basis is sin(m pi r / L),
             m = 1..N, acting on w = r * u (see operators).
Cart3D     : periodic box [-L, L)^3, samples x_i = -L + i h with h = 2L/N
             per axis.  Quadrature is plain cell-volume summation, which is
             spectrally accurate for smooth periodic integrands.
Cyl3D      : domain [0, L_rho] x [-L_z, L_z), midpoint samples in rho,
             periodic samples in z.  Quadrature weight 2 pi rho h_rho h_z.

Grid cardinality is capped at desk scale: 256 points per Cartesian axis and
2^16 radial points.
"""

from __future__ import annotations

import enum
import functools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalFaultError, ShapeMismatchError

RADIAL_MAX_POINTS = 2**16
CART_MAX_POINTS_PER_AXIS = 256
CYL_MAX_POINTS_PER_AXIS = 2**16
MIN_POINTS = 8

SUPPORT_MARGIN = 1e-8


class Mode(enum.Enum):
    RADIAL3D = "radial"
    CART3D = "cart"
    CYL3D = "cyl"


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Discretized spatial domain.  Immutable; derived arrays are cached."""

    mode: Mode
    extent: tuple[float, ...]
    points: tuple[int, ...]

    def __post_init__(self):
        if any(e <= 0 for e in self.extent):
            raise ConfigurationError(f"extents must be positive, got {self.extent}")
        if any(n < MIN_POINTS for n in self.points):
            raise ConfigurationError(f"point counts must be >= {MIN_POINTS}, got {self.points}")
        if self.mode is Mode.RADIAL3D:
            if len(self.extent) != 1 or len(self.points) != 1:
                raise ConfigurationError("radial grid takes one extent and one point count")
            if not _is_pow2(self.points[0]):
                raise ConfigurationError("radial point count must be a power of two")
            if self.points[0] > RADIAL_MAX_POINTS:
                raise ConfigurationError(f"radial point count exceeds {RADIAL_MAX_POINTS}")
        elif self.mode is Mode.CART3D:
            if len(self.extent) != 1 or len(self.points) != 3:
                raise ConfigurationError("cartesian grid takes one extent and three point counts")
            if not all(_is_pow2(n) for n in self.points):
                raise ConfigurationError("cartesian point counts must be powers of two")
            if any(n > CART_MAX_POINTS_PER_AXIS for n in self.points):
                raise ConfigurationError(f"cartesian axes exceed {CART_MAX_POINTS_PER_AXIS} points")
        elif self.mode is Mode.CYL3D:
            if len(self.extent) != 2 or len(self.points) != 2:
                raise ConfigurationError("cylindrical grid takes (L_rho, L_z) and (N_rho, N_z)")
            if not _is_pow2(self.points[1]):
                raise ConfigurationError("cylindrical z point count must be a power of two")
            if any(n > CYL_MAX_POINTS_PER_AXIS for n in self.points):
                raise ConfigurationError(f"cylindrical axes exceed {CYL_MAX_POINTS_PER_AXIS} points")
        else:  # pragma: no cover
            raise ConfigurationError(f"unknown mode {self.mode}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def radial(cls, points: int, extent: float) -> "GridSpec":
        return cls(Mode.RADIAL3D, (float(extent),), (int(points),))

    @classmethod
    def cartesian(cls, points, extent: float) -> "GridSpec":
        if np.isscalar(points):
            points = (int(points),) * 3
        return cls(Mode.CART3D, (float(extent),), tuple(int(n) for n in points))

    @classmethod
    def cylindrical(cls, points_rho: int, points_z: int, extent_rho: float, extent_z: float) -> "GridSpec":
        return cls(Mode.CYL3D, (float(extent_rho), float(extent_z)), (int(points_rho), int(points_z)))

    # -- derived geometry --------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def cardinality(self) -> int:
        return int(np.prod(self.points))

    @property
    def spacing(self) -> tuple[float, ...]:
        """Step per axis: axis length / point count (periodic axes span 2L)."""
        if self.mode is Mode.RADIAL3D:
            return (self.extent[0] / self.points[0],)
        if self.mode is Mode.CART3D:
            return tuple(2.0 * self.extent[0] / n for n in self.points)
        return (self.extent[0] / self.points[0], 2.0 * self.extent[1] / self.points[1])

    @functools.cached_property
    def radii(self) -> np.ndarray:
        """Radial sample points (Radial3D only)."""
        if self.mode is not Mode.RADIAL3D:
            raise ConfigurationError("radii is defined for Radial3D grids")
        h = self.spacing[0]
        return (np.arange(self.points[0]) + 0.5) * h

    @functools.cached_property
    def sine_wavenumbers(self) -> np.ndarray:
        """k_m = m pi / L for the radial sine basis, m = 1..N."""
        if self.mode is not Mode.RADIAL3D:
            raise ConfigurationError("sine_wavenumbers is defined for Radial3D grids")
        return np.arange(1, self.points[0] + 1) * np.pi / self.extent[0]

    @functools.cached_property
    def axis_coords(self) -> tuple[np.ndarray, ...]:
        """Per-axis coordinates (Cart3D: x, y, z; Cyl3D: rho, z)."""
        if self.mode is Mode.CART3D:
            L = self.extent[0]
            return tuple(-L + np.arange(n) * (2.0 * L / n) for n in self.points)
        if self.mode is Mode.CYL3D:
            h_rho, h_z = self.spacing
            rho = (np.arange(self.points[0]) + 0.5) * h_rho
            z = -self.extent[1] + np.arange(self.points[1]) * h_z
            return rho, z
        return (self.radii,)

    @functools.cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Fourier wavenumbers of the periodic axes."""
        if self.mode is Mode.CART3D:
            return tuple(
                2.0 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.points, self.spacing)
            )
        if self.mode is Mode.CYL3D:
            return (2.0 * np.pi * np.fft.fftfreq(self.points[1], d=self.spacing[1]),)
        raise ConfigurationError("wavenumbers is defined for periodic axes")

    @functools.cached_property
    def deriv_wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers for odd-derivative multipliers: the Nyquist mode is
        zeroed so that d/dx of a real field stays real (the unpaired Nyquist
        mode cannot carry an odd multiplier)."""
        out = []
        for k in self.wavenumbers:
            k = k.copy()
            n = k.shape[0]
            if n % 2 == 0:
                k[n // 2] = 0.0
            out.append(k)
        return tuple(out)

    @functools.cached_property
    def radius_field(self) -> np.ndarray:
        """|x| sampled on the full grid."""
        if self.mode is Mode.RADIAL3D:
            return self.radii
        if self.mode is Mode.CART3D:
            x, y, z = self.axis_coords
            return np.sqrt(
                x[:, None, None] ** 2 + y[None, :, None] ** 2 + z[None, None, :] ** 2
            )
        rho, z = self.axis_coords
        return np.sqrt(rho[:, None] ** 2 + z[None, :] ** 2)

    @property
    def cell_volume(self) -> float:
        if self.mode is Mode.CART3D:
            hx, hy, hz = self.spacing
            return hx * hy * hz
        raise ConfigurationError("cell_volume is defined for Cart3D grids")

    @functools.cached_property
    def quad_weights(self) -> np.ndarray:
        """Quadrature weights, broadcastable against sample arrays."""
        if self.mode is Mode.RADIAL3D:
            h = self.spacing[0]
            return 4.0 * np.pi * self.radii**2 * h
        if self.mode is Mode.CYL3D:
            h_rho, h_z = self.spacing
            rho = self.axis_coords[0]
            return (2.0 * np.pi * rho * h_rho * h_z)[:, None]
        raise ConfigurationError("Cart3D uses uniform cell volume, not a weight array")

    def describe(self) -> dict:
        return {"mode": self.mode.value, "extent": list(self.extent), "points": list(self.points)}


def integrate(grid: GridSpec, values: np.ndarray) -> float:
    """Quadrature of a real-valued sample array with the grid's measure.

    Radial3D uses 4 pi r^2 dr, Cart3D dx dy dz, Cyl3D 2 pi rho drho dz,
    all as deterministic midpoint/cell sums.
    """
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ShapeMismatchError(f"values shape {values.shape} != grid shape {grid.shape}")
    if np.iscomplexobj(values):
        values = values.real
    if grid.mode is Mode.CART3D:
        return float(values.sum() * grid.cell_volume)
    return float((values * grid.quad_weights).sum())


@dataclass(frozen=True)
class ComplexField:
    """Complex samples bound to a grid.  Immutable after construction."""

    grid: GridSpec
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            raise ShapeMismatchError(
                f"samples shape {arr.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise NumericalFaultError("field contains NaN or Inf samples")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def with_samples(self, samples: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, samples)

    def norm_l2(self) -> float:
        """Discrete L2 norm with the grid's measure."""
        return float(np.sqrt(integrate(self.grid, np.abs(self.samples) ** 2)))


def zero_field(grid: GridSpec) -> ComplexField:
    return ComplexField(grid, np.zeros(grid.shape, dtype=np.complex128))


@dataclass(frozen=True)
class StatePair:
    """The system state (u, v) with coupling parameters (gamma, mu)."""

    u: ComplexField
    v: ComplexField
    gamma: float
    mu: float
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ShapeMismatchError("u and v must share one grid")
        if not (self.gamma > 0 and self.mu > 0):
            raise ConfigurationError("gamma and mu must be strictly positive")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    def with_fields(self, u_samples: np.ndarray, v_samples: np.ndarray, time: float | None = None) -> "StatePair":
        return StatePair(
            self.u.with_samples(u_samples),
            self.v.with_samples(v_samples),
            self.gamma,
            self.mu,
            self.time if time is None else time,
        )


def boundary_magnitude_ratio(f: ComplexField) -> float:
    """max |f| on the outermost cell shell relative to the global max."""
    a = np.abs(f.samples)
    peak = a.max()
    if peak == 0.0:
        return 0.0
    grid = f.grid
    if grid.mode is Mode.RADIAL3D:
        edge = a[-1]
    elif grid.mode is Mode.CART3D:
        edge = max(
            a[0, :, :].max(), a[-1, :, :].max(),
            a[:, 0, :].max(), a[:, -1, :].max(),
            a[:, :, 0].max(), a[:, :, -1].max(),
        )
    else:
        edge = max(a[-1, :].max(), a[:, 0].max(), a[:, -1].max())
    return float(edge / peak)


def check_support_margin(state: StatePair, warn: bool = True) -> bool:
    """True when both fields are below SUPPORT_MARGIN of their max at the boundary shell."""
    ratio = max(boundary_magnitude_ratio(state.u), boundary_magnitude_ratio(state.v))
    ok = ratio < SUPPORT_MARGIN
    if not ok and warn:
        warnings.warn(
            f"field magnitude at the boundary shell is {ratio:.2e} of the max; "
            "solution mass should stay away from the domain boundary",
            stacklevel=2,
        )
    return ok
