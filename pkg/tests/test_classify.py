"""Threshold classification against the scaled-ground-state family.

With the Pohozaev chain P = E = M = K/3 the scaled pair c (phi, psi) has

    E(c) M(c) / (E_gs M_gs) = 2 c^4 - c^6,     K(c) M(c) / (K_gs M_gs) = c^4,

so against the thresholds (E_gs M_gs / 2, K_gs M_gs): the energy condition
reads 2 c^4 - c^6 < 1/2 and the kinetic one c^4 < 1 (below) or > 1 (above).
The energy condition holds for c below ~0.7374 and again above ~1.3624;
in between (e.g. c = 1.2) the data sit above the energy threshold and the
theory does not classify them.
"""

import numpy as np
import pytest

from thirdharmonic import (
    ComplexField,
    ConfigurationError,
    GridSpec,
    StatePair,
    Symmetry,
    ValidationError,
    VerdictBasis,
    VerdictKind,
    classify,
    energy,
    mass,
    validate_symmetry,
    zero_field,
)


def scaled_gs(gs, c):
    return gs.as_state(scale=c)


class TestScaledFamily:
    def test_homogeneity_against_measured_products(self, gs_ref):
        c = 1.2
        s = scaled_gs(gs_ref, c)
        e_prod = energy(s) * mass(s, 9.0)
        base = gs_ref.constants.energy_3gamma * gs_ref.constants.mass_3gamma
        assert e_prod == pytest.approx((2.0 * c**4 - c**6) * base, rel=1e-6)

    def test_zero_data_scatters(self, gs_ref):
        g = GridSpec.radial(256, 24.0)
        s = StatePair(zero_field(g), zero_field(g), 3.0, 9.0)
        v = classify(s, gs_ref, Symmetry.RADIAL)
        assert v.kind is VerdictKind.GLOBAL_SCATTERING
        assert v.basis is VerdictBasis.BELOW_THRESHOLD

    def test_half_scale_scatters(self, gs_ref):
        v = classify(scaled_gs(gs_ref, 0.5), gs_ref, Symmetry.RADIAL)
        assert v.kind is VerdictKind.GLOBAL_SCATTERING
        assert v.kinetic_product == pytest.approx(0.0625 * v.gwp_threshold, rel=1e-8)

    def test_negative_energy_blowup(self, gs_ref):
        # c > sqrt(2): E(c) = E_gs (2 c^2 - c^4) < 0
        v = classify(scaled_gs(gs_ref, 1.6), gs_ref, Symmetry.RADIAL)
        assert v.kind is VerdictKind.BLOW_UP
        assert v.basis is VerdictBasis.ENERGY_NEGATIVE

    def test_above_threshold_blowup(self, gs_ref):
        # c = 1.4: E >= 0, 2c^4 - c^6 = 0.154 < 1/2, c^4 = 3.84 > 1
        v = classify(scaled_gs(gs_ref, 1.4), gs_ref, Symmetry.RADIAL)
        assert v.kind is VerdictKind.BLOW_UP
        assert v.basis is VerdictBasis.ABOVE_THRESHOLD

    def test_gap_region_is_indeterminate(self, gs_ref):
        # c = 1.2 sits above the energy threshold (2c^4 - c^6 = 1.16 > 1/2)
        # with E > 0: neither theorem hypothesis holds
        v = classify(scaled_gs(gs_ref, 1.2), gs_ref, Symmetry.RADIAL)
        assert v.kind is VerdictKind.INDETERMINATE
        assert v.energy_product > v.energy_threshold

    def test_exact_boundary_band(self, gs_ref):
        # the ground state itself sits exactly on the kinetic threshold
        v = classify(scaled_gs(gs_ref, 1.0), gs_ref, Symmetry.RADIAL)
        assert v.kind is VerdictKind.INDETERMINATE
        assert v.basis is VerdictBasis.BOUNDARY

    def test_scale_monotone_consistency(self, gs_ref):
        # on (0, 1] the verdict never moves from scattering to blow-up
        seen_blowup = False
        for c in np.linspace(0.05, 1.0, 30):
            v = classify(scaled_gs(gs_ref, float(c)), gs_ref, Symmetry.RADIAL)
            assert v.kind is not VerdictKind.BLOW_UP
            seen_blowup = seen_blowup or v.kind is VerdictKind.BLOW_UP


class TestSymmetryRules:
    def test_no_symmetry_never_blowup_with_nonneg_energy(self, gs_ref):
        v = classify(scaled_gs(gs_ref, 1.4), gs_ref, Symmetry.NONE, validate=False)
        assert v.kind is not VerdictKind.BLOW_UP

    def test_no_symmetry_negative_energy_open(self, gs_ref):
        v = classify(scaled_gs(gs_ref, 1.6), gs_ref, Symmetry.NONE, validate=False)
        assert v.kind is VerdictKind.INDETERMINATE
        assert "SymmetryRequired" in v.caveats

    def test_nonradial_gamma_caveat(self, gs_ref):
        gs15 = None
        from thirdharmonic import solve_ground_state
        gs15 = solve_ground_state(1.5, GridSpec.radial(1024, 24.0), tol=1e-9)
        s = gs15.as_state(scale=0.5)
        v = classify(s, gs15, Symmetry.NONE, validate=False)
        assert v.kind is VerdictKind.GLOBAL_SCATTERING
        assert "NonRadialGammaFar" in v.caveats
        v3 = classify(scaled_gs(gs_ref, 0.5), gs_ref, Symmetry.NONE, validate=False)
        assert v3.caveats == ()

    def test_gamma_mismatch_rejected(self, gs_ref):
        g = GridSpec.radial(256, 24.0)
        s = StatePair(zero_field(g), zero_field(g), 2.0, 6.0)
        with pytest.raises(ConfigurationError):
            classify(s, gs_ref, Symmetry.RADIAL)


class TestSymmetryValidation:
    def test_radial_grid_is_radial(self, gs_ref):
        validate_symmetry(gs_ref.as_state(), Symmetry.RADIAL)

    def test_cart_radial_field_passes(self, make_gaussian_state):
        g = GridSpec.cartesian(32, 6.0)
        s = make_gaussian_state(g, amp_u=1.0, amp_v=0.5)
        validate_symmetry(s, Symmetry.RADIAL)
        validate_symmetry(s, Symmetry.CYLINDRICAL)

    def test_cart_asymmetric_field_fails(self):
        g = GridSpec.cartesian(32, 6.0)
        x = g.axis_coords[0]
        f = np.exp(-(g.radius_field**2)) * (1.0 + 0.2 * np.tanh(x[:, None, None]))
        s = StatePair(ComplexField(g, f.astype(complex)), zero_field(g), 3.0, 9.0)
        with pytest.raises(ValidationError):
            validate_symmetry(s, Symmetry.RADIAL)

    def test_cylindrical_but_not_radial(self):
        g = GridSpec.cartesian(32, 6.0)
        x, y, z = g.axis_coords
        rho2 = x[:, None, None] ** 2 + y[None, :, None] ** 2
        f = np.exp(-rho2 - 2.0 * (z**2)[None, None, :])
        s = StatePair(ComplexField(g, f.astype(complex)), zero_field(g), 3.0, 9.0)
        validate_symmetry(s, Symmetry.CYLINDRICAL)
        with pytest.raises(ValidationError):
            validate_symmetry(s, Symmetry.RADIAL)

    def test_none_skips_validation(self, make_gaussian_state):
        g = GridSpec.cartesian(16, 6.0)
        validate_symmetry(make_gaussian_state(g), Symmetry.NONE)


class TestVerdictSerialization:
    def test_round_trip_fields(self, gs_ref):
        v = classify(scaled_gs(gs_ref, 0.5), gs_ref, Symmetry.RADIAL)
        d = v.to_dict()
        assert d["kind"] == "GlobalScattering"
        assert d["basis"] == "BelowThreshold"
        assert d["symmetry"] == "Radial"
        import json
        assert json.loads(v.to_json()) == d
