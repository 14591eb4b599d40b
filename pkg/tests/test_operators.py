"""Spectral operators: Laplacian, gradient, multipliers, transform invariants."""

import numpy as np
import pytest

from thirdharmonic import (
    ComplexField,
    GridSpec,
    UnsupportedModeError,
    apply_multiplier,
    gradient,
    integrate,
    laplacian,
    zero_field,
)

GAUSS_3D = (np.pi / 2.0) ** 1.5


def plane_wave(grid, modes):
    x, y, z = grid.axis_coords
    kx, ky, kz = grid.wavenumbers
    k = np.array([kx[modes[0]], ky[modes[1]], kz[modes[2]]])
    phase = (
        k[0] * x[:, None, None] + k[1] * y[None, :, None] + k[2] * z[None, None, :]
    )
    return ComplexField(grid, np.exp(1j * phase)), k


class TestLaplacian:
    def test_constant_cart(self):
        g = GridSpec.cartesian(16, 4.0)
        f = ComplexField(g, np.ones(g.shape, dtype=complex))
        assert np.abs(laplacian(f).samples).max() < 1e-13

    def test_plane_wave_cart(self):
        g = GridSpec.cartesian(16, np.pi)
        f, k = plane_wave(g, (2, 3, 5))
        out = laplacian(f)
        expected = -(k @ k) * f.samples
        assert np.abs(out.samples - expected).max() < 1e-10 * abs(k @ k)

    def test_gaussian_radial(self):
        g = GridSpec.radial(2048, 12.0)
        r = g.radii
        f = ComplexField(g, np.exp(-(r**2)).astype(complex))
        out = laplacian(f)
        exact = (4.0 * r**2 - 6.0) * np.exp(-(r**2))
        assert np.abs(out.samples - exact).max() < 1e-8

    def test_gaussian_cylindrical(self):
        g = GridSpec.cylindrical(256, 256, 8.0, 8.0)
        rho, z = g.axis_coords
        r2 = rho[:, None] ** 2 + z[None, :] ** 2
        f = ComplexField(g, np.exp(-r2).astype(complex))
        out = laplacian(f)
        exact = (4.0 * r2 - 6.0) * np.exp(-r2)
        # second-order differences in rho
        h = g.spacing[0]
        assert np.abs(out.samples - exact).max() < 20.0 * h**2


class TestGradient:
    def test_constant_cart(self):
        # the radial basis assumes decay, so the constant checks are periodic-mode
        g = GridSpec.cartesian(8, 2.0)
        f = ComplexField(g, np.ones(g.shape, dtype=complex))
        for comp in gradient(f):
            assert np.abs(comp.samples).max() < 1e-12

    def test_plane_wave(self):
        g = GridSpec.cartesian(16, np.pi)
        f, k = plane_wave(g, (1, 4, 2))
        comps = gradient(f)
        for j in range(3):
            assert np.abs(comps[j].samples - 1j * k[j] * f.samples).max() < 1e-10 * (1 + abs(k[j]))

    def test_radial_gaussian_derivative(self):
        g = GridSpec.radial(2048, 12.0)
        r = g.radii
        f = ComplexField(g, np.exp(-(r**2)).astype(complex))
        (dr,) = gradient(f)
        assert np.abs(dr.samples - (-2.0 * r * np.exp(-(r**2)))).max() < 1e-10

    def test_gaussian_kinetic_norm(self):
        g = GridSpec.radial(4096, 12.0)
        f = ComplexField(g, np.exp(-(g.radii**2)).astype(complex))
        (dr,) = gradient(f)
        val = integrate(g, np.abs(dr.samples) ** 2)
        assert val == pytest.approx(3.0 * GAUSS_3D, rel=1e-10)

    def test_cylindrical_components(self):
        g = GridSpec.cylindrical(256, 128, 8.0, 8.0)
        rho, z = g.axis_coords
        f = ComplexField(g, np.exp(-(rho[:, None] ** 2) - z[None, :] ** 2).astype(complex))
        d_rho, d_z = gradient(f)
        exact_rho = -2.0 * rho[:, None] * f.samples
        exact_z = -2.0 * z[None, :] * f.samples
        h = g.spacing[0]
        assert np.abs(d_rho.samples - exact_rho).max() < 10.0 * h**2
        assert np.abs(d_z.samples - exact_z).max() < 1e-9


class TestMultiplier:
    def test_identity_symbol(self, rng):
        g = GridSpec.radial(128, 8.0)
        f = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        out = apply_multiplier(f, lambda k: np.ones_like(k[0]))
        assert np.abs(out.samples - f.samples).max() < 1e-12 * np.abs(f.samples).max()

    @pytest.mark.parametrize("mode", ["radial", "cart"])
    def test_unit_modulus_preserves_norm(self, rng, mode):
        if mode == "radial":
            g = GridSpec.radial(256, 8.0)
        else:
            g = GridSpec.cartesian(16, 4.0)
        f = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        t = 0.37
        out = apply_multiplier(
            f, lambda k: np.exp(-1j * t * (sum(kj**2 for kj in k) + 1.0))
        )
        n0 = integrate(g, np.abs(f.samples) ** 2)
        n1 = integrate(g, np.abs(out.samples) ** 2)
        assert abs(n1 - n0) <= 1e-12 * n0

    def test_symbol_reproduces_laplacian_cart(self, rng):
        g = GridSpec.cartesian(16, 4.0)
        f = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        via_symbol = apply_multiplier(f, lambda k: -sum(kj**2 for kj in k))
        direct = laplacian(f)
        assert np.array_equal(via_symbol.samples, direct.samples)

    def test_cylindrical_unsupported(self):
        g = GridSpec.cylindrical(16, 16, 4.0, 4.0)
        with pytest.raises(UnsupportedModeError):
            apply_multiplier(zero_field(g), lambda k: k[0])


class TestTransformInvariants:
    @pytest.mark.parametrize("mode", ["radial", "cart"])
    def test_parseval_round_trip(self, rng, mode):
        # forward + inverse preserves the discrete L2 norm to 1e-12 relative
        if mode == "radial":
            g = GridSpec.radial(512, 10.0)
        else:
            g = GridSpec.cartesian(32, 4.0)
        f = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        out = apply_multiplier(f, lambda k: np.ones_like(k[0]))
        assert abs(out.norm_l2() - f.norm_l2()) <= 1e-12 * f.norm_l2()

    def test_translation_equivariance_cart(self, rng):
        g = GridSpec.cartesian(16, 4.0)
        f = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        shifted = ComplexField(g, np.roll(f.samples, (3, 1, 2), axis=(0, 1, 2)))
        a = laplacian(shifted).samples
        b = np.roll(laplacian(f).samples, (3, 1, 2), axis=(0, 1, 2))
        scale = np.abs(b).max()
        assert np.abs(a - b).max() < 1e-13 * max(scale, 1.0)
        for ca, cb in zip(gradient(shifted), gradient(f)):
            assert np.abs(ca.samples - np.roll(cb.samples, (3, 1, 2), axis=(0, 1, 2))).max() < 1e-13 * max(scale, 1.0)
