"""Spectral differential operators for the three grid modes.

Cart3D     : exact Fourier multipliers (-|k|^2 for the Laplacian, i k_j for
             gradients) on the periodic box.
Radial3D   : the w = r u reduction.  w is expanded in sin(m pi r / L) on the
             midpoint grid (DST-II analysis / DST-III synthesis), where the
             3D radial Laplacian acts diagonally: Delta u = w'' / r.  The
             implied odd extension of w about r = 0 matches even (radial)
             fields u.
Cyl3D      : conservative second-order differences in rho with the zero-flux
             (Neumann/regularity) condition at rho = 0 and a decay (zero)
             ghost at the outer edge; Fourier multiplier in z.

apply_multiplier is defined on the transform-capable modes (Radial3D and
Cart3D); the finite-difference rho axis of Cyl3D has no multiplier form.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import ShapeMismatchError, UnsupportedModeError
from .grids import ComplexField, GridSpec, Mode

__all__ = [
    "laplacian",
    "gradient",
    "apply_multiplier",
    "sine_coefficients",
    "sine_synthesis",
    "cosine_synthesis",
]


# -- radial sine machinery (midpoint grid) ----------------------------------
#
# Basis: phi_m(r_j) = sin(m pi (j + 1/2) / N), m = 1..N.  Orthogonality on the
# midpoint grid gives sum_j phi_m phi_m' = (N/2) delta (m,m' < N) and N for
# m = m' = N, which fixes the scalings below.

def sine_coefficients(w: np.ndarray) -> np.ndarray:
    """Coefficients a_m of w_j = sum_m a_m sin(m pi (j+1/2)/N)."""
    n = w.shape[0]
    a = sfft.dst(w, type=2) / n
    a[-1] *= 0.5
    return a

def sine_synthesis(a: np.ndarray) -> np.ndarray:
    """Evaluate sum_m a_m sin(m pi (j+1/2)/N) at the midpoints."""
    x = a.copy()
    x[:-1] *= 0.5
    return sfft.dst(x, type=3)

def cosine_synthesis(b: np.ndarray) -> np.ndarray:
    """Evaluate sum_{m=1}^{N-1} b_m cos(m pi (j+1/2)/N) at the midpoints.

    The caller passes b indexed m = 1..N; the m = N cosine vanishes at every
    midpoint and is dropped.
    """
    n = b.shape[0]
    x = np.zeros(n, dtype=b.dtype)
    x[1:] = 0.5 * b[:-1]
    return sfft.dct(x, type=3)


def _radial_laplacian(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    r = grid.radii
    k = grid.sine_wavenumbers
    a = sine_coefficients(r * u)
    return sine_synthesis(-(k**2) * a) / r


def _radial_derivative(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    # w = r u  =>  u' = (w' - u) / r, with w' summed in the cosine basis
    r = grid.radii
    k = grid.sine_wavenumbers
    a = sine_coefficients(r * u)
    wprime = cosine_synthesis(a * k)
    return (wprime - u) / r


# -- cylindrical finite differences ------------------------------------------

def _cyl_radial_laplacian(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    # (1/rho) d/drho (rho du/drho) in flux form on the midpoint grid;
    # the rho = 0 face carries zero flux, the outer ghost value is 0 (decay).
    h = grid.spacing[0]
    rho = grid.axis_coords[0]
    faces = rho + 0.5 * h          # rho_{i+1/2}
    flux_hi = np.zeros_like(u)
    flux_hi[:-1] = faces[:-1, None] * (u[1:] - u[:-1]) / h
    flux_hi[-1] = faces[-1] * (0.0 - u[-1]) / h
    flux_lo = np.zeros_like(u)
    flux_lo[1:] = flux_hi[:-1]
    # rho_{-1/2} = 0: no inner flux through the axis
    return (flux_hi - flux_lo) / (rho[:, None] * h)


def _cyl_radial_derivative(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    h = grid.spacing[0]
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    out[0] = (u[1] - u[0]) / (2 * h)       # even ghost across rho = 0
    out[-1] = (0.0 - u[-2]) / (2 * h)      # zero ghost outside
    return out


def _cyl_z_multiplier(grid: GridSpec, u: np.ndarray, symbol_values: np.ndarray) -> np.ndarray:
    return sfft.ifft(symbol_values[None, :] * sfft.fft(u, axis=1), axis=1)


# -- cartesian helpers --------------------------------------------------------

def _cart_k_broadcast(grid: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    kx, ky, kz = grid.wavenumbers
    return kx[:, None, None], ky[None, :, None], kz[None, None, :]


def _cart_k2(grid: GridSpec) -> np.ndarray:
    kx, ky, kz = _cart_k_broadcast(grid)
    return kx**2 + ky**2 + kz**2


# -- public operators ----------------------------------------------------------

def laplacian(f: ComplexField) -> ComplexField:
    """3D Laplacian of the field in its grid's discretization."""
    grid, u = f.grid, f.samples
    if grid.mode is Mode.CART3D:
        out = sfft.ifftn(-_cart_k2(grid) * sfft.fftn(u))
    elif grid.mode is Mode.RADIAL3D:
        out = _radial_laplacian(grid, u)
    else:
        kz = grid.wavenumbers[0]
        out = _cyl_radial_laplacian(grid, u) + _cyl_z_multiplier(grid, u, -(kz**2))
    return f.with_samples(out)


def gradient(f: ComplexField) -> tuple[ComplexField, ...]:
    """Gradient components.

    Cart3D returns (d/dx, d/dy, d/dz); Radial3D returns the single radial
    derivative (for radial fields |grad u|^2 = |du/dr|^2); Cyl3D returns
    (d/drho, d/dz).
    """
    grid, u = f.grid, f.samples
    if grid.mode is Mode.CART3D:
        uhat = sfft.fftn(u)
        kx, ky, kz = grid.deriv_wavenumbers
        comps = (kx[:, None, None], ky[None, :, None], kz[None, None, :])
        return tuple(f.with_samples(sfft.ifftn(1j * kj * uhat)) for kj in comps)
    if grid.mode is Mode.RADIAL3D:
        return (f.with_samples(_radial_derivative(grid, u)),)
    kz = grid.deriv_wavenumbers[0]
    d_rho = f.with_samples(_cyl_radial_derivative(grid, u))
    d_z = f.with_samples(_cyl_z_multiplier(grid, u, 1j * kz))
    return (d_rho, d_z)


def apply_multiplier(f: ComplexField, symbol: Callable[[Sequence[np.ndarray]], np.ndarray]) -> ComplexField:
    """inverse-transform(symbol(k) * transform(f)) on a transform-capable grid.

    The symbol receives the grid's wavevector components as broadcastable
    arrays: (kx, ky, kz) on Cart3D and (k_radial,) on Radial3D, where
    k_radial are the sine wavenumbers m pi / L acting on w = r u.
    """
    grid, u = f.grid, f.samples
    if grid.mode is Mode.CART3D:
        s = np.asarray(symbol(_cart_k_broadcast(grid)))
        s = np.broadcast_to(s, grid.shape)
        if not np.all(np.isfinite(s)):
            raise ShapeMismatchError("multiplier symbol produced non-finite values")
        return f.with_samples(sfft.ifftn(s * sfft.fftn(u)))
    if grid.mode is Mode.RADIAL3D:
        k = grid.sine_wavenumbers
        s = np.broadcast_to(np.asarray(symbol((k,))), k.shape)
        if not np.all(np.isfinite(s)):
            raise ShapeMismatchError("multiplier symbol produced non-finite values")
        r = grid.radii
        a = sine_coefficients(r * u)
        return f.with_samples(sine_synthesis(s * a) / r)
    raise UnsupportedModeError("apply_multiplier needs a fully transform-capable grid (Radial3D or Cart3D)")
