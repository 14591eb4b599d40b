"""Conserved and variational quantities evaluated on state snapshots.

All quantities are pure functions of a StatePair:

    mass(state, w)       = ||u||^2 + w ||v||^2
    kinetic              = ||grad u||^2 + ||grad v||^2
    interaction density  N(u, v) = |u|^4/36 + 9|v|^4/4 + |u|^2 |v|^2
                                   + Re(conj(u)^3 v)/9
    potential            P = integral of N
    energy               E_mu = (K + M_mu)/2 - P      (conserved by the flow)
    action(omega)        S = E_mu + (omega/2) M_{3 gamma}
    pohozaev             G = K - 3P

The time derivative of the weighted virial integral

    M_phi = 2 Im integral grad(phi) . (conj(u) grad u + gamma conj(v) grad v)

equals 8 G for phi = |x|^2, which is what the blow-up diagnostics monitor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, ShapeMismatchError, UnsupportedModeError
from .grids import ComplexField, GridSpec, Mode, StatePair, integrate
from .operators import gradient

REPORT_FIELDS = (
    "time",
    "mass_mu",
    "mass_3gamma",
    "kinetic",
    "potential",
    "energy_mu",
    "pohozaev",
    "action_omega",
)


@dataclass(frozen=True)
class FunctionalReport:
    """Snapshot of every tracked functional at one time."""

    time: float
    mass_mu: float
    mass_3gamma: float
    kinetic: float
    potential: float
    energy_mu: float
    pohozaev: float
    action_omega: float
    omega: float = 0.0

    def to_row(self) -> str:
        return ",".join(f"{getattr(self, name):.17g}" for name in REPORT_FIELDS)

    def to_json_line(self) -> str:
        return json.dumps({name: getattr(self, name) for name in REPORT_FIELDS})

    @staticmethod
    def csv_header() -> str:
        return ",".join(REPORT_FIELDS)


def mass(state: StatePair, weight: float) -> float:
    """||u||^2 + weight ||v||^2; weight mu gives M_mu, gamma^2 the pair density W."""
    if weight < 0:
        raise ConfigurationError("mass weight must be nonnegative")
    g = state.grid
    return integrate(g, np.abs(state.u.samples) ** 2) + weight * integrate(
        g, np.abs(state.v.samples) ** 2
    )


def kinetic(state: StatePair) -> float:
    g = state.grid
    total = 0.0
    for f in (state.u, state.v):
        for comp in gradient(f):
            total += integrate(g, np.abs(comp.samples) ** 2)
    return total


def interaction_density(u_values: np.ndarray, v_values: np.ndarray) -> np.ndarray:
    """Pointwise coupling density N(u, v); real-valued."""
    au2 = np.abs(u_values) ** 2
    av2 = np.abs(v_values) ** 2
    cross = (np.conj(u_values) ** 3 * v_values).real
    return au2**2 / 36.0 + 2.25 * av2**2 + au2 * av2 + cross / 9.0


def potential(state: StatePair) -> float:
    return integrate(state.grid, interaction_density(state.u.samples, state.v.samples))


def energy(state: StatePair) -> float:
    return 0.5 * (kinetic(state) + mass(state, state.mu)) - potential(state)


def action(state: StatePair, omega: float) -> float:
    return energy(state) + 0.5 * omega * mass(state, 3.0 * state.gamma)


def pohozaev(state: StatePair) -> float:
    return kinetic(state) - 3.0 * potential(state)


def report(state: StatePair, omega: float = 0.0) -> FunctionalReport:
    """Evaluate all functionals once, with the defining algebraic relations."""
    k = kinetic(state)
    m_mu = mass(state, state.mu)
    m_3g = mass(state, 3.0 * state.gamma)
    p = potential(state)
    e = 0.5 * (k + m_mu) - p
    return FunctionalReport(
        time=state.time,
        mass_mu=m_mu,
        mass_3gamma=m_3g,
        kinetic=k,
        potential=p,
        energy_mu=e,
        pohozaev=k - 3.0 * p,
        action_omega=e + 0.5 * omega * m_3g,
        omega=omega,
    )


def momentum_density(state: StatePair) -> tuple[np.ndarray, ...]:
    """Im(conj(u) grad u + gamma conj(v) grad v), componentwise real fields."""
    du = gradient(state.u)
    dv = gradient(state.v)
    uc = np.conj(state.u.samples)
    vc = np.conj(state.v.samples)
    return tuple(
        (uc * gu.samples + state.gamma * vc * gv.samples).imag for gu, gv in zip(du, dv)
    )


def virial_quantity(state: StatePair, weight_gradient) -> float:
    """2 integral grad(phi) . Im(conj(u) grad u + gamma conj(v) grad v).

    weight_gradient holds the components of grad(phi) on the state's grid,
    in the same component order as `gradient` for that mode.
    """
    comps = [np.asarray(getattr(c, "samples", c)) for c in weight_gradient]
    vels = momentum_density(state)
    if len(comps) != len(vels):
        raise ShapeMismatchError(
            f"weight gradient has {len(comps)} components, state needs {len(vels)}"
        )
    g = state.grid
    total = 0.0
    for c, v in zip(comps, vels):
        if c.shape != g.shape:
            raise ShapeMismatchError("weight gradient is not sampled on the state's grid")
        total += integrate(g, c * v)
    return 2.0 * total


def local_mass(state: StatePair, radius: float) -> float:
    """integral over {|x| <= R} of |u|^2 + 3 gamma |v|^2 (sharp cells)."""
    if radius <= 0:
        raise ConfigurationError("local_mass radius must be positive")
    g = state.grid
    dens = np.abs(state.u.samples) ** 2 + 3.0 * state.gamma * np.abs(state.v.samples) ** 2
    mask = g.radius_field <= radius
    if g.mode is Mode.RADIAL3D:
        return float((dens * g.quad_weights)[mask].sum())
    if g.mode is Mode.CART3D:
        return float(dens[mask].sum() * g.cell_volume)
    return float((dens * g.quad_weights)[mask].sum())


def local_lebesgue(state: StatePair, radius: float, exponent: float = 10.0 / 3.0) -> float:
    """integral over {|x| <= R} of |u|^p + |v|^p (sharp cells)."""
    if radius <= 0:
        raise ConfigurationError("radius must be positive")
    g = state.grid
    dens = np.abs(state.u.samples) ** exponent + np.abs(state.v.samples) ** exponent
    mask = g.radius_field <= radius
    if g.mode is Mode.CART3D:
        return float(dens[mask].sum() * g.cell_volume)
    return float((dens * g.quad_weights)[mask].sum())


def lebesgue_norm_p5(state: StatePair) -> float:
    """||u||_L5^5 + ||v||_L5^5 for the windowed space-time accumulator."""
    g = state.grid
    return integrate(g, np.abs(state.u.samples) ** 5) + integrate(
        g, np.abs(state.v.samples) ** 5
    )


def sobolev_h1_distance(a: StatePair, b: StatePair) -> float:
    """H1 x H1 distance between two states on one grid."""
    if a.grid != b.grid:
        raise ShapeMismatchError("states live on different grids")
    g = a.grid
    total = 0.0
    for fa, fb in ((a.u, b.u), (a.v, b.v)):
        diff = fa.with_samples(fa.samples - fb.samples)
        total += integrate(g, np.abs(diff.samples) ** 2)
        for comp in gradient(diff):
            total += integrate(g, np.abs(comp.samples) ** 2)
    return float(np.sqrt(total))


def interaction_morawetz(state: StatePair, weights) -> float:
    """Interaction Morawetz pairing on a Cart3D grid.

    Evaluates 2 integral_x [ (L_gamma conv grad Theta_R)(x) . V(x) ] dx where
    L_gamma = |u|^2 + gamma^2 |v|^2, V = Im(conj(u) grad u + gamma conj(v)
    grad v), and the convolution realizes the (x - y) pairing of the double
    integral; grad Theta_R(w) = w Psi_R(|w|) is odd, so orientation matters
    and is fixed by convolving the kernel built on the displacement grid.
    """
    g = state.grid
    if g.mode is not Mode.CART3D:
        raise UnsupportedModeError("interaction_morawetz requires a Cart3D grid")
    if weights.grid != g:
        raise ShapeMismatchError("Morawetz weights were built for a different grid")
    dens = np.abs(state.u.samples) ** 2 + state.gamma**2 * np.abs(state.v.samples) ** 2
    dens_hat = sfft.fftn(dens)
    vels = momentum_density(state)
    vol = g.cell_volume
    total = 0.0
    for kernel_hat, vel in zip(weights.kernel_hats(), vels):
        conv = sfft.ifftn(dens_hat * kernel_hat).real * vol
        total += integrate(g, conv * vel)
    return 2.0 * total
