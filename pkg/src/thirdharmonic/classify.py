"""Threshold classification of initial data against ground-state constants.

With (K_gs, M_gs, E_gs) from a converged ground state at the same gamma, the
data's products are compared against

    energy product   E_mu(u0, v0) M_{3 gamma}(u0, v0)  vs  E_gs M_gs / 2
    kinetic product  K(u0, v0)    M_{3 gamma}(u0, v0)  vs  K_gs M_gs

Global + scattering requires both strict inequalities (for non-radial data
with gamma != 3 the result carries an unquantified smallness condition on
|gamma - 3|, flagged as a caveat).  Blow-up requires radial or cylindrical
(Sigma_3) symmetry together with either negative energy or the energy
product below threshold and the kinetic product above it.  Everything else,
including boundary cases inside a relative band and the regimes the theory
leaves open, is Indeterminate.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ValidationError
from .grids import GridSpec, Mode, StatePair
from .functionals import energy as energy_fn, kinetic as kinetic_fn, mass as mass_fn
from .groundstate import GroundStateConstants, GroundStateSolution

BOUNDARY_BAND = 1e-9
SYMMETRY_TOL = 1e-8


class VerdictKind(enum.Enum):
    GLOBAL_SCATTERING = "GlobalScattering"
    BLOW_UP = "BlowUp"
    INDETERMINATE = "Indeterminate"


class VerdictBasis(enum.Enum):
    ENERGY_NEGATIVE = "EnergyNegative"
    BELOW_THRESHOLD = "BelowThreshold"
    ABOVE_THRESHOLD = "AboveThreshold"
    BOUNDARY = "Boundary"


class Symmetry(enum.Enum):
    RADIAL = "Radial"
    CYLINDRICAL = "Cylindrical"
    NONE = "None"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    basis: VerdictBasis
    symmetry: Symmetry
    caveats: tuple[str, ...]
    energy_product: float
    kinetic_product: float
    energy_threshold: float
    gwp_threshold: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "basis": self.basis.value,
            "symmetry": self.symmetry.value,
            "caveats": list(self.caveats),
            "energy_product": self.energy_product,
            "kinetic_product": self.kinetic_product,
            "energy_threshold": self.energy_threshold,
            "gwp_threshold": self.gwp_threshold,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _reflect(a: np.ndarray, axis: int) -> np.ndarray:
    # periodic point reflection: index i -> (N - i) mod N, exact on the grid
    return np.roll(np.flip(a, axis), 1, axis)


def _orbit_average_deviation(samples: np.ndarray, axes_perms, reflect_axes) -> float:
    """Max deviation of a field from its average over the grid's symmetry
    orbit (axis permutations and periodic reflections).  A spherically
    (resp. axially) symmetric field is exactly invariant, so the deviation
    measures asymmetry without any radial-binning error."""
    total = np.zeros_like(samples)
    count = 0
    for perm in axes_perms:
        base = np.transpose(samples, perm)
        for mask in range(2 ** len(reflect_axes)):
            t = base
            for bit, axis in enumerate(reflect_axes):
                if mask >> bit & 1:
                    t = _reflect(t, axis)
            total = total + t
            count += 1
    avg = total / count
    return float(np.abs(samples - avg).max())


def _spherical_average_deviation(samples: np.ndarray, grid: GridSpec) -> float:
    """Deviation of a Cart3D field from its octahedral orbit average."""
    import itertools

    n = set(grid.points)
    perms = list(itertools.permutations((0, 1, 2))) if len(n) == 1 else [(0, 1, 2)]
    return _orbit_average_deviation(samples, perms, (0, 1, 2))


def validate_symmetry(state: StatePair, symmetry: Symmetry) -> None:
    """Numerically validate a declared symmetry flag.

    Radial: fields must deviate from their spherical average by at most
    SYMMETRY_TOL relative to the field max (automatic on Radial3D grids).
    Cylindrical: same over the angular direction in the (x1, x2) plane, plus
    finite z-variance for Sigma_3 membership (automatic on Cyl3D grids).
    """
    grid = state.grid
    if symmetry is Symmetry.NONE:
        return
    if symmetry is Symmetry.RADIAL:
        if grid.mode is Mode.RADIAL3D:
            return
        if grid.mode is Mode.CART3D:
            for f in (state.u, state.v):
                peak = max(float(np.abs(f.samples).max()), 1e-300)
                if _spherical_average_deviation(f.samples, grid) > SYMMETRY_TOL * peak:
                    raise ValidationError("declared Radial symmetry fails numerical validation")
            return
        raise ValidationError("cylindrical-grid data cannot be declared Radial")
    # cylindrical: dihedral invariance in the (x1, x2) plane
    if grid.mode is Mode.CYL3D:
        return
    if grid.mode is Mode.CART3D:
        perms = [(0, 1, 2)] + ([(1, 0, 2)] if grid.points[0] == grid.points[1] else [])
        for f in (state.u, state.v):
            peak = max(float(np.abs(f.samples).max()), 1e-300)
            if _orbit_average_deviation(f.samples, perms, (0, 1)) > SYMMETRY_TOL * peak:
                raise ValidationError("declared Cylindrical symmetry fails numerical validation")
        # Sigma_3 additionally needs z f in L^2, which every grid field has
        return
    raise ValidationError("radial-grid data is radial, not merely cylindrical")


def classify(
    initial: StatePair,
    gs: GroundStateSolution | GroundStateConstants,
    symmetry: Symmetry,
    band: float = BOUNDARY_BAND,
    validate: bool = True,
) -> Verdict:
    """Classify initial data per the threshold dichotomy.

    Raises ConfigurationError when the data's gamma does not match the
    ground-state constants' gamma.
    """
    consts = gs.constants if isinstance(gs, GroundStateSolution) else gs
    if abs(initial.gamma - consts.gamma) > 1e-12 * max(1.0, abs(consts.gamma)):
        raise ConfigurationError(
            f"gamma mismatch: data {initial.gamma} vs ground state {consts.gamma}"
        )
    if validate:
        validate_symmetry(initial, symmetry)

    e = energy_fn(initial)
    m3 = mass_fn(initial, 3.0 * initial.gamma)
    k = kinetic_fn(initial)
    e_prod = e * m3
    k_prod = k * m3
    e_th = consts.energy_threshold
    k_th = consts.gwp_threshold

    def verdict(kind, basis, caveats=()):
        return Verdict(
            kind=kind,
            basis=basis,
            symmetry=symmetry,
            caveats=tuple(caveats),
            energy_product=e_prod,
            kinetic_product=k_prod,
            energy_threshold=e_th,
            gwp_threshold=k_th,
        )

    on_energy_boundary = abs(e_prod - e_th) <= band * abs(e_th)
    on_kinetic_boundary = abs(k_prod - k_th) <= band * abs(k_th)
    symmetric = symmetry in (Symmetry.RADIAL, Symmetry.CYLINDRICAL)

    if e < 0.0:
        if symmetric:
            return verdict(VerdictKind.BLOW_UP, VerdictBasis.ENERGY_NEGATIVE)
        # negative energy without symmetry: open regime
        return verdict(
            VerdictKind.INDETERMINATE, VerdictBasis.ENERGY_NEGATIVE, ("SymmetryRequired",)
        )

    if on_energy_boundary or on_kinetic_boundary:
        return verdict(VerdictKind.INDETERMINATE, VerdictBasis.BOUNDARY)

    ener_ok = e_prod < e_th
    if ener_ok and k_prod < k_th:
        caveats = []
        if symmetry is not Symmetry.RADIAL and initial.gamma != 3.0:
            caveats.append("NonRadialGammaFar")
        return verdict(VerdictKind.GLOBAL_SCATTERING, VerdictBasis.BELOW_THRESHOLD, caveats)
    if ener_ok and k_prod > k_th and symmetric:
        return verdict(VerdictKind.BLOW_UP, VerdictBasis.ABOVE_THRESHOLD)
    basis = VerdictBasis.ABOVE_THRESHOLD if k_prod > k_th else VerdictBasis.BOUNDARY
    return verdict(VerdictKind.INDETERMINATE, basis)
