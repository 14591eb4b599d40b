"""Localization weights for virial and Morawetz monitoring.

The base bump zeta: [0, inf) -> [0, 2] equals 2 on [0, 1], 0 beyond 2, and
transitions with the quintic smoothstep s(t) = t^3 (10 - 15 t + 6 t^2), so
every derived weight has a closed form:

    theta(r)   = double antiderivative of zeta (no runtime quadrature)
    phi_R(x)   = R^2 theta(|x| / R)      radial virial weight, = |x|^2 on |x| <= R
    psi_R(rho) = R^2 theta(rho / R)      cylindrical analogue in the rho plane

The Morawetz family starts from the cutoff chi (1 on [0, 1 - sigma], 0 from 1,
|chi'| <= (15/8)/sigma):

    Phi_R   = (chi_R^2 * chi_R^2) / (omega3 R^3)     (self-convolution)
    Phi_1,R = (chi_R^2 * chi_R^4) / (omega3 R^3)
    Psi_R(r)   = (1/r) int_0^r Phi_R
    Theta_R(r) = int_0^r s Psi_R(s) ds

with omega3 = 4 pi / 3 the unit ball volume.  The convolutions are radial, so
they are computed with the spherical (sine-based) transform on a padded 1D
domain and stored as 1D tables with linear interpolation plus the exact
analytic tails Phi = 0, Psi = A/r, Theta' = A for r >= 2R.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigurationError, ShapeMismatchError, UnsupportedModeError
from .grids import GridSpec, Mode

OMEGA3 = 4.0 * np.pi / 3.0

__all__ = [
    "smoothstep",
    "zeta",
    "zeta_antiderivative",
    "vartheta",
    "chi",
    "varrho",
    "ProfileKind",
    "CutoffProfile",
    "RadialVirialWeight",
    "radial_virial_weight",
    "CylindricalVirialWeight",
    "cylindrical_weight",
    "MorawetzWeights",
    "build_morawetz_weights",
    "WeightIdentityReport",
    "verify_weight_identities",
    "tangential_projector",
]


def smoothstep(t):
    """Quintic smoothstep s with s(0)=0, s(1)=1, s'(0)=s'(1)=s''(0)=s''(1)=0."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _check_nonnegative(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ConfigurationError("radial argument must be nonnegative")
    return r


def zeta(r):
    """Plateau bump: 2 on [0,1], quintic transition on (1,2), 0 beyond."""
    r = _check_nonnegative(r)
    return 2.0 * smoothstep(2.0 - r) * (r <= 2.0) + 0.0 * r


def _S(t):
    # antiderivative of smoothstep
    return 2.5 * t**4 - 3.0 * t**5 + t**6


def _S2(t):
    # antiderivative of _S
    return 0.5 * t**5 - 0.5 * t**6 + t**7 / 7.0


def zeta_antiderivative(r):
    """Z(r) = int_0^r zeta; equals 2r on [0,1] and the constant 3 beyond 2."""
    r = _check_nonnegative(r)
    mid = np.clip(2.0 - r, 0.0, 1.0)
    out = np.where(r <= 1.0, 2.0 * r, 3.0 - 2.0 * _S(mid))
    return out if out.ndim else float(out)


THETA_AT_2 = 26.0 / 7.0


def vartheta(r):
    """theta(r) = int_0^r int_0^tau zeta; r^2 on [0,1], slope-3 linear past 2."""
    r = _check_nonnegative(r)
    mid = np.clip(2.0 - r, 0.0, 1.0)
    inner = r * r
    middle = 1.0 + 3.0 * (r - 1.0) - 2.0 / 7.0 + 2.0 * _S2(mid)
    outer = THETA_AT_2 + 3.0 * (r - 2.0)
    out = np.where(r <= 1.0, inner, np.where(r < 2.0, middle, outer))
    return out if out.ndim else float(out)


def chi(r, sigma: float):
    """Morawetz cutoff: 1 on [0, 1-sigma], 0 from 1, max slope (15/8)/sigma."""
    if not 0.0 < sigma < 1.0:
        raise ConfigurationError("sigma must lie in (0, 1)")
    r = _check_nonnegative(r)
    out = np.where(r <= 1.0 - sigma, 1.0, np.where(r >= 1.0, 0.0, smoothstep((1.0 - r) / sigma)))
    return out if out.ndim else float(out)


def varrho(r):
    """Local-mass cutoff: 1 on [0, 1/2], 0 from 1."""
    r = _check_nonnegative(r)
    out = np.where(r <= 0.5, 1.0, np.where(r >= 1.0, 0.0, smoothstep(2.0 * (1.0 - r))))
    return out if out.ndim else float(out)


class ProfileKind(enum.Enum):
    ZETA = "zeta"
    VARTHETA = "vartheta"
    CHI = "chi"
    VARRHO = "varrho"


@dataclass(frozen=True)
class CutoffProfile:
    """A named radial profile with a scale: evaluator(r) = base(r / R)."""

    kind: ProfileKind
    scale: float = 1.0
    sigma: float | None = None

    def __post_init__(self):
        if self.scale <= 0:
            raise ConfigurationError("profile scale must be positive")
        if self.kind is ProfileKind.CHI and self.sigma is None:
            object.__setattr__(self, "sigma", 0.1)

    def __call__(self, r):
        t = np.asarray(r, dtype=float) / self.scale
        if self.kind is ProfileKind.ZETA:
            return zeta(t)
        if self.kind is ProfileKind.VARTHETA:
            return vartheta(t)
        if self.kind is ProfileKind.CHI:
            return chi(t, self.sigma)
        return varrho(t)


# -- virial weights -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialVirialWeight:
    """phi_R = R^2 theta(|x|/R) with analytically evaluated derivatives."""

    R: float
    grid: GridSpec
    phi: np.ndarray
    grad: tuple[np.ndarray, ...]
    laplacian: np.ndarray
    second_radial: np.ndarray


def radial_virial_weight(R: float, grid: GridSpec) -> RadialVirialWeight:
    """Build phi_R and its derivative fields on a Radial3D or Cart3D grid."""
    if R <= 0:
        raise ConfigurationError("R must be positive")
    if grid.mode not in (Mode.RADIAL3D, Mode.CART3D):
        raise UnsupportedModeError("radial virial weight needs a Radial3D or Cart3D grid")
    if 2.0 * R > grid.extent[0]:
        raise ConfigurationError(
            f"weight needs 2R <= extent; got R={R}, extent={grid.extent[0]}"
        )
    r = grid.radius_field
    rho = r / R
    phi = R**2 * vartheta(rho)
    second = zeta(rho)
    # phi'(r)/r = Z(rho)/rho -> zeta(0) = 2 at the origin
    with np.errstate(invalid="ignore", divide="ignore"):
        slope = np.where(r > 0, R * zeta_antiderivative(rho) / np.where(r > 0, r, 1.0), 2.0)
    lap = second + 2.0 * slope
    if grid.mode is Mode.RADIAL3D:
        grad = (R * zeta_antiderivative(rho),)
    else:
        x, y, z = grid.axis_coords
        grad = (
            x[:, None, None] * slope,
            y[None, :, None] * slope,
            z[None, None, :] * slope,
        )
    return RadialVirialWeight(R=R, grid=grid, phi=phi, grad=grad, laplacian=lap, second_radial=second)


@dataclass(frozen=True, eq=False)
class CylindricalVirialWeight:
    """phi = psi_R(rho) + z^2 on a Cyl3D grid, derivatives analytic."""

    R: float
    grid: GridSpec
    phi: np.ndarray
    grad: tuple[np.ndarray, ...]
    psi_second: np.ndarray
    laplacian_plane: np.ndarray


def cylindrical_weight(R: float, grid: GridSpec) -> CylindricalVirialWeight:
    if R <= 0:
        raise ConfigurationError("R must be positive")
    if grid.mode is not Mode.CYL3D:
        raise UnsupportedModeError("cylindrical weight needs a Cyl3D grid")
    if 2.0 * R > grid.extent[0]:
        raise ConfigurationError("weight needs 2R <= rho extent")
    rho, z = grid.axis_coords
    t = rho / R
    psi = R**2 * vartheta(t)
    phi = psi[:, None] + (z**2)[None, :]
    dpsi = R * zeta_antiderivative(t)
    grad = (
        np.broadcast_to(dpsi[:, None], grid.shape).copy(),
        np.broadcast_to((2.0 * z)[None, :], grid.shape).copy(),
    )
    psi_second = zeta(t)
    lap_plane = psi_second + dpsi / rho
    return CylindricalVirialWeight(
        R=R,
        grid=grid,
        phi=phi,
        grad=grad,
        psi_second=np.broadcast_to(psi_second[:, None], grid.shape).copy(),
        laplacian_plane=np.broadcast_to(lap_plane[:, None], grid.shape).copy(),
    )


# -- Morawetz family ----------------------------------------------------------


def _spherical_selfconv_profile(
    left_power: int, right_power: int, sigma: float, R: float, r_nodes: np.ndarray,
    fine_points: int = 16384, pad_factor: float = 4.0,
) -> np.ndarray:
    """(chi_R^a * chi_R^b)(r) / (omega3 R^3) at given radii, via the spherical
    sine transform on a padded radial domain (supports stay clear of the
    Dirichlet edge)."""
    pad = pad_factor * R
    m = fine_points
    h = pad / m
    rr = (np.arange(m) + 0.5) * h
    kk = np.arange(1, m + 1) * np.pi / pad
    base = chi(rr / R, sigma)

    def hat(power):
        w = 0.5 * h * sfft.dst(base**power * rr, type=2)   # int f r sin(kr) dr
        return 4.0 * np.pi * w / kk

    coef = (np.pi / pad) * kk * hat(left_power) * hat(right_power) / (2.0 * np.pi**2)
    out = np.empty_like(r_nodes)
    nz = r_nodes > 0
    # chunked sine synthesis at arbitrary radii
    idx = np.nonzero(nz)[0]
    for lo in range(0, idx.size, 256):
        sel = idx[lo : lo + 256]
        out[sel] = (np.sin(np.outer(r_nodes[sel], kk)) @ coef) / r_nodes[sel]
    if (~nz).any():
        # value at the origin: (chi_R^a * chi_R^b)(0) = R^3 int chi^(a+b) dw
        t = np.linspace(0.0, 1.0, 20001)
        power = left_power + right_power
        out[~nz] = R**3 * np.trapezoid(4.0 * np.pi * t**2 * chi(t, sigma) ** power, t)
    return out / (OMEGA3 * R**3)


@dataclass(frozen=True, eq=False)
class MorawetzWeights:
    """Radial tables for Phi_R, Psi_R, Theta_R (and optionally Phi_1,R).

    Values beyond the last node follow the exact tails Phi = 0, Psi = A / r,
    Theta(r) = Theta(2R) + A (r - 2R) with A = int_0^{2R} Phi.
    """

    R: float
    sigma: float
    grid: GridSpec
    r_table: np.ndarray
    phi_table: np.ndarray
    psi_table: np.ndarray
    theta_table: np.ndarray
    phi1_table: np.ndarray | None
    tail_integral: float   # A = int_0^{r_max} Phi

    def _interp(self, r, table, tail):
        r = np.asarray(r, dtype=float)
        inside = np.interp(r, self.r_table, table)
        return np.where(r <= self.r_table[-1], inside, tail(r))

    def phi(self, r):
        return self._interp(r, self.phi_table, lambda rr: np.zeros_like(rr))

    def phi1(self, r):
        if self.phi1_table is None:
            raise ConfigurationError("Phi_1 table was not built")
        return self._interp(r, self.phi1_table, lambda rr: np.zeros_like(rr))

    def psi(self, r):
        return self._interp(
            r, self.psi_table, lambda rr: self.tail_integral / np.maximum(rr, 1e-300)
        )

    def theta(self, r):
        r_max = self.r_table[-1]
        theta_end = self.theta_table[-1]
        return self._interp(
            r, self.theta_table, lambda rr: theta_end + self.tail_integral * (rr - r_max)
        )

    @functools.cached_property
    def _kernel_hats(self) -> tuple[np.ndarray, ...]:
        # FFT of grad Theta_R(w) = w_j Psi_R(|w|) on the displacement grid
        if self.grid.mode is not Mode.CART3D:
            raise UnsupportedModeError("interaction kernels need a Cart3D grid")
        psi_vals = self.psi(self.grid.radius_field)
        x, y, z = self.grid.axis_coords
        comps = (
            x[:, None, None] * psi_vals,
            y[None, :, None] * psi_vals,
            z[None, None, :] * psi_vals,
        )
        return tuple(sfft.fftn(c) for c in comps)

    def kernel_hats(self) -> tuple[np.ndarray, ...]:
        return self._kernel_hats

    def grid_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.grid.describe(), sort_keys=True).encode()).hexdigest()

    def export_tables(self, outdir) -> list[str]:
        """Two-column (r, value) text tables plus a JSON meta record."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        names = {"phi": self.phi_table, "psi": self.psi_table, "theta": self.theta_table}
        if self.phi1_table is not None:
            names["phi1"] = self.phi1_table
        for name, table in names.items():
            p = outdir / f"{name}.txt"
            with p.open("w") as fh:
                fh.write(f"# r {name}\n")
                for r, val in zip(self.r_table, table):
                    fh.write(f"{r:.17g} {val:.17g}\n")
            written.append(str(p))
        meta = {"R": self.R, "sigma": self.sigma, "grid_hash": self.grid_hash(),
                "grid": self.grid.describe(), "tail_integral": self.tail_integral}
        mp = outdir / "weights.json"
        mp.write_text(json.dumps(meta, indent=2) + "\n")
        written.append(str(mp))
        return written


def build_morawetz_weights(
    R: float, sigma: float = 0.1, grid: GridSpec | None = None,
    with_phi1: bool = True, table_step: float | None = None,
) -> MorawetzWeights:
    """Construct the Morawetz weight family for a Cart3D grid.

    The table step defaults to min(grid spacing / 2, sigma R / 32): the
    self-convolution has curvature ~ 1/sigma at the sigma R scale near the
    origin, and the finite-difference identity checks need that resolved.
    """
    if grid is None or grid.mode is not Mode.CART3D:
        raise UnsupportedModeError("Morawetz weights require a Cart3D grid")
    if not 0.0 < sigma < 1.0:
        raise ConfigurationError("sigma must lie in (0, 1)")
    if grid.extent[0] < 4.0 * R:
        raise ConfigurationError(
            f"grid extent {grid.extent[0]} too small; need extent >= 4R = {4.0 * R}"
        )
    if table_step is None:
        table_step = min(min(grid.spacing) / 2.0, sigma * R / 32.0)
    r_max = 2.0 * R
    n_nodes = int(np.ceil(r_max / table_step)) + 1
    r_table = np.linspace(0.0, r_max, n_nodes)
    phi_table = _spherical_selfconv_profile(2, 2, sigma, R, r_table)
    phi1_table = _spherical_selfconv_profile(2, 4, sigma, R, r_table) if with_phi1 else None
    iphi = cumulative_trapezoid(phi_table, r_table, initial=0.0)
    psi_table = np.empty_like(phi_table)
    psi_table[0] = phi_table[0]
    psi_table[1:] = iphi[1:] / r_table[1:]
    theta_table = cumulative_trapezoid(r_table * psi_table, r_table, initial=0.0)
    return MorawetzWeights(
        R=R, sigma=sigma, grid=grid,
        r_table=r_table, phi_table=phi_table, psi_table=psi_table,
        theta_table=theta_table, phi1_table=phi1_table,
        tail_integral=float(iphi[-1]),
    )


@dataclass(frozen=True)
class WeightIdentityReport:
    """Measured residuals and fitted constants for the Morawetz identities."""

    laplacian_residual: float        # max |Delta Theta - 2 Psi - Phi| (FD)
    laplacian_residual_rel: float    # relative to max |Phi|
    dtheta_residual: float           # max |Theta' - r Psi| (FD)
    min_psi_minus_phi: float
    phi_max: float
    c_psi_bound: float               # Psi <= c min(1, R/r)
    c_grad_phi: float                # |Phi'| <= c / (sigma R)
    c_psi_phi_gap: float             # |Psi - Phi| <= (c/sigma) min(r/R, R/r)
    c_phi1_gap: float | None         # |Phi - Phi_1| <= c sigma

    def to_json(self) -> str:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        return json.dumps(d, indent=2)


def verify_weight_identities(w: MorawetzWeights) -> WeightIdentityReport:
    """Check the differential identities and bounds of the weight family by
    second-order finite differences on the stored tables."""
    r, phi, psi, theta = w.r_table, w.phi_table, w.psi_table, w.theta_table
    dt = r[1] - r[0]
    d1 = (theta[2:] - theta[:-2]) / (2.0 * dt)
    d2 = (theta[2:] - 2.0 * theta[1:-1] + theta[:-2]) / dt**2
    lap = d2 + 2.0 * d1 / r[1:-1]
    resid = np.abs(lap - (2.0 * psi[1:-1] + phi[1:-1])).max()
    dtheta_resid = np.abs(d1 - (r * psi)[1:-1]).max()
    phi_max = float(np.abs(phi).max())
    rr = r[1:]
    c_psi = float((psi[1:] / np.minimum(1.0, w.R / rr)).max())
    c_grad_phi = float(np.abs(np.gradient(phi, r)).max() * w.sigma * w.R)
    gap_bound = (1.0 / w.sigma) * np.minimum(rr / w.R, w.R / rr)
    c_gap = float((np.abs(psi[1:] - phi[1:]) / gap_bound).max())
    c_phi1 = None
    if w.phi1_table is not None:
        c_phi1 = float(np.abs(phi - w.phi1_table).max() / w.sigma)
    return WeightIdentityReport(
        laplacian_residual=float(resid),
        laplacian_residual_rel=float(resid / phi_max),
        dtheta_residual=float(dtheta_resid),
        min_psi_minus_phi=float((psi - phi).min()),
        phi_max=phi_max,
        c_psi_bound=c_psi,
        c_grad_phi=c_grad_phi,
        c_psi_phi_gap=c_gap,
        c_phi1_gap=c_phi1,
    )


def tangential_projector(x) -> np.ndarray:
    """P_jk = delta_jk - x_j x_k / |x|^2: symmetric, idempotent, kills x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ShapeMismatchError("tangential projector takes a 3-vector")
    n2 = float(x @ x)
    if n2 == 0.0:
        raise ConfigurationError("tangential projector is undefined at x = 0")
    return np.eye(3) - np.outer(x, x) / n2
