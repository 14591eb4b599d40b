"""Grid construction, quadrature, field/state types, snapshots."""

import numpy as np
import pytest

from thirdharmonic import (
    ComplexField,
    ConfigurationError,
    GridSpec,
    Mode,
    NumericalFaultError,
    ShapeMismatchError,
    StatePair,
    check_support_margin,
    integrate,
    zero_field,
    snapshots,
)

GAUSS_3D = (np.pi / 2.0) ** 1.5        # integral of exp(-2|x|^2) over R^3
BALL_VOLUME = 4.0 * np.pi / 3.0


class TestGridSpec:
    def test_radial_geometry(self):
        g = GridSpec.radial(64, 8.0)
        assert g.spacing == (0.125,)
        assert g.radii[0] == pytest.approx(0.0625)
        assert g.radii[-1] == pytest.approx(8.0 - 0.0625)
        assert g.cardinality == 64

    def test_cartesian_geometry(self):
        g = GridSpec.cartesian(16, 4.0)
        assert g.spacing == (0.5, 0.5, 0.5)
        x = g.axis_coords[0]
        assert x[0] == -4.0 and x[-1] == pytest.approx(3.5)
        assert g.cell_volume == pytest.approx(0.125)

    def test_cylindrical_geometry(self):
        g = GridSpec.cylindrical(16, 32, 4.0, 8.0)
        assert g.spacing == (0.25, 0.5)
        rho, z = g.axis_coords
        assert rho[0] == pytest.approx(0.125)
        assert z[0] == -8.0

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            GridSpec.radial(4, 8.0)            # too few points
        with pytest.raises(ConfigurationError):
            GridSpec.radial(100, 8.0)          # not a power of two
        with pytest.raises(ConfigurationError):
            GridSpec.radial(2**17, 8.0)        # beyond desk scale
        with pytest.raises(ConfigurationError):
            GridSpec.cartesian(512, 8.0)       # beyond 256 per axis
        with pytest.raises(ConfigurationError):
            GridSpec.radial(64, -1.0)

    def test_spacing_reproducible(self):
        g = GridSpec.radial(256, 12.0)
        assert g.spacing[0] == g.extent[0] / g.points[0]
        c = GridSpec.cartesian(32, 5.0)
        assert c.spacing[0] == 2.0 * c.extent[0] / c.points[0]


class TestIntegrate:
    def test_zero_integrand(self):
        for g in (GridSpec.radial(64, 8.0), GridSpec.cartesian(16, 4.0),
                  GridSpec.cylindrical(16, 16, 4.0, 4.0)):
            assert integrate(g, np.zeros(g.shape)) == 0.0

    def test_gaussian_radial(self):
        g = GridSpec.radial(4096, 12.0)
        val = integrate(g, np.exp(-2.0 * g.radii**2))
        assert val == pytest.approx(GAUSS_3D, rel=1e-12)

    def test_gaussian_cartesian(self):
        g = GridSpec.cartesian(64, 6.0)
        val = integrate(g, np.exp(-2.0 * g.radius_field**2))
        assert val == pytest.approx(GAUSS_3D, rel=1e-10)

    def test_gaussian_cylindrical(self):
        # midpoint in rho is O(h^2) for the 2 pi rho measure; check the rate too
        vals = {}
        for n in (256, 512):
            g = GridSpec.cylindrical(n, 256, 8.0, 8.0)
            rho, z = g.axis_coords
            vals[n] = integrate(g, np.exp(-2.0 * (rho[:, None] ** 2 + z[None, :] ** 2)))
        assert vals[512] == pytest.approx(GAUSS_3D, rel=1e-4)
        err = {n: abs(v - GAUSS_3D) for n, v in vals.items()}
        assert 2.5 < err[256] / err[512] < 6.0

    def test_ball_indicator(self):
        # O(h) tolerance: the boundary shell is one cell thick
        g = GridSpec.radial(4096, 2.0)
        h = g.spacing[0]
        val = integrate(g, (g.radii <= 1.0).astype(float))
        assert abs(val - BALL_VOLUME) / BALL_VOLUME < 4.0 * h

    def test_linear_and_monotone(self, rng):
        g = GridSpec.radial(128, 4.0)
        a = rng.uniform(0.0, 1.0, g.shape)
        b = rng.uniform(0.0, 1.0, g.shape)
        assert integrate(g, 2.0 * a + b) == pytest.approx(
            2.0 * integrate(g, a) + integrate(g, b), rel=1e-13
        )
        assert integrate(g, a + b) >= integrate(g, a)

    def test_shape_mismatch(self):
        g = GridSpec.radial(64, 8.0)
        with pytest.raises(ShapeMismatchError):
            integrate(g, np.zeros(32))


class TestFieldTypes:
    def test_field_validation(self):
        g = GridSpec.radial(64, 8.0)
        with pytest.raises(ShapeMismatchError):
            ComplexField(g, np.zeros(32, dtype=complex))
        bad = np.zeros(64, dtype=complex)
        bad[3] = np.nan
        with pytest.raises(NumericalFaultError):
            ComplexField(g, bad)

    def test_field_immutable(self):
        g = GridSpec.radial(64, 8.0)
        f = zero_field(g)
        with pytest.raises(ValueError):
            f.samples[0] = 1.0

    def test_state_pair_validation(self):
        g1 = GridSpec.radial(64, 8.0)
        g2 = GridSpec.radial(128, 8.0)
        with pytest.raises(ShapeMismatchError):
            StatePair(zero_field(g1), zero_field(g2), 3.0, 9.0)
        with pytest.raises(ConfigurationError):
            StatePair(zero_field(g1), zero_field(g1), -1.0, 9.0)

    def test_support_margin(self, make_gaussian_state):
        g = GridSpec.radial(256, 12.0)
        ok = check_support_margin(make_gaussian_state(g, width=1.0), warn=False)
        assert ok
        wide = make_gaussian_state(g, width=20.0)
        with pytest.warns(UserWarning):
            assert not check_support_margin(wide)


class TestSnapshots:
    def test_field_round_trip(self, tmp_path, rng):
        for g in (GridSpec.radial(64, 8.0), GridSpec.cartesian(8, 2.0),
                  GridSpec.cylindrical(8, 16, 2.0, 3.0)):
            f = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
            p = snapshots.write_field(tmp_path / "f.crf1", f)
            back = snapshots.read_field(p)
            assert back.grid == g
            assert np.array_equal(back.samples, f.samples)

    def test_header_layout(self, tmp_path):
        g = GridSpec.radial(64, 8.0)
        p = snapshots.write_field(tmp_path / "f.crf1", zero_field(g))
        raw = p.read_bytes()
        assert raw[:4] == b"CRF1"
        assert raw[4] == 0
        assert len(raw) == 64 + 64 * 16

    def test_state_round_trip(self, tmp_path, make_gaussian_state):
        s = make_gaussian_state(GridSpec.radial(64, 8.0), amp_v=0.5, phase_v=0.7, time=1.5)
        snapshots.write_state(tmp_path / "state", s)
        back = snapshots.read_state(tmp_path / "state")
        assert back.gamma == s.gamma and back.mu == s.mu and back.time == s.time
        assert np.array_equal(back.u.samples, s.u.samples)
        assert np.array_equal(back.v.samples, s.v.samples)
