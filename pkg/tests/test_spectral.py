import math

import numpy as np
import pytest

from fnls_lab.grid import ComplexField, GridError, PhysParams, make_grid
from fnls_lab.spectral import (
    effective_bandwidth,
    fractional_power_apply,
    laplacian,
    lebesgue_norm,
    mass_energy,
    resolvent_smooth,
    sobolev_seminorm,
    spectral_l2_squared,
    spectral_tail_fraction,
    strauss_ratio,
    wrap_time,
)


def _fourier_series_oracle(x, l, coeff, symbol, mmax=400):
    """Direct (FFT-free) periodic series (1/2l) sum_m symbol(k) coeff(k) e^{ikx}, k = pi m / l."""
    out = np.zeros_like(x, dtype=complex)
    for m in range(-mmax, mmax + 1):
        k = math.pi * m / l
        out += symbol(k) * coeff(k) * np.exp(1j * k * x)
    return out / (2 * l)


class TestMakeGrid:
    def test_unit_box(self):
        g = make_grid(1, 16, math.pi)
        assert g.dx == pytest.approx(2 * math.pi / 16)
        m = np.sort(np.rint(g.wavenumbers * g.l / math.pi).astype(int))
        assert m.tolist() == list(range(-8, 8))
        assert g.dx * g.n == pytest.approx(2 * g.l)

    def test_3d_spacing(self):
        g = make_grid(3, 64, 20.0)
        assert g.shape == (64, 64, 64)
        assert np.diff(np.sort(g.wavenumbers)) == pytest.approx(math.pi / 20)

    @pytest.mark.parametrize("d,n,l", [(2, 17, 1.0), (4, 16, 1.0), (0, 16, 1.0), (1, 8, 1.0), (1, 14, 1.0), (1, 16, -1.0)])
    def test_rejects(self, d, n, l):
        with pytest.raises(GridError):
            make_grid(d, n, l)

    def test_accepts_smooth_sizes(self):
        assert make_grid(3, 48, 8.0).n == 48

    def test_origin_is_centre_index(self):
        g = make_grid(2, 32, 3.0)
        assert g.coords[0][16, 0] == 0.0 and g.r[16, 16] == 0.0


class TestMultipliers:
    def test_unit_frequency_eigenfunction(self):
        g = make_grid(3, 16, math.pi)
        u = ComplexField.from_function(g, lambda x, y, z: np.exp(1j * x))
        out = fractional_power_apply(u, 1.5)
        assert np.max(np.abs(out.physical() - u.physical())) < 1e-12

    def test_sigma_two_on_sine(self):
        g = make_grid(1, 64, math.pi)
        u = ComplexField.from_function(g, np.sin)
        out = fractional_power_apply(u, 2.0)
        assert np.max(np.abs(out.physical() - u.physical())) < 1e-12
        lap = laplacian(u)
        assert np.max(np.abs(out.physical() + lap.physical())) < 1e-12

    def test_zero_mode_killed(self):
        g = make_grid(1, 32, 2.0)
        u = ComplexField(g, np.full(g.shape, 3.0 + 0j))
        assert np.max(np.abs(fractional_power_apply(u, 0.7).physical())) < 1e-14

    def test_half_derivative_of_gaussian_against_series(self, grid_1d):
        x = grid_1d.coords[0]
        u = ComplexField(grid_1d, np.exp(-x ** 2 / 2))
        got = fractional_power_apply(u, 1.0).physical()
        ref = _fourier_series_oracle(x, grid_1d.l, lambda k: math.sqrt(2 * math.pi) * math.exp(-k * k / 2), abs)
        assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 1e-8

    def test_non_finite_rejected(self):
        g = make_grid(1, 16, 1.0)
        vals = np.zeros(g.shape, complex)
        vals[3] = np.nan
        with pytest.raises(FloatingPointError):
            fractional_power_apply(ComplexField(g, vals), 1.0)


class TestResolvent:
    def test_amplitude(self):
        g = make_grid(1, 32, math.pi)
        u = ComplexField.from_function(g, lambda x: np.exp(1j * x))
        out = resolvent_smooth(u, 1.0, PhysParams(0.5, 3.0))
        ratio = out.physical() / u.physical()
        assert np.allclose(ratio, 0.28209479177387814, rtol=0, atol=1e-14)

    def test_inverse(self, rng):
        g = make_grid(2, 32, 4.0)
        p = PhysParams(0.75, 3.0)
        u = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        lam = 2.5
        v = resolvent_smooth(u, lam, p) * (1 / math.sqrt(p.c_s))
        back = laplacian(v) * -1.0 + v * lam
        assert np.max(np.abs(back.physical() - u.physical())) < 1e-11

    @pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
    def test_l2_bound(self, lam, rng):
        g = make_grid(1, 128, 5.0)
        p = PhysParams(0.6, 3.0)
        u = ComplexField(g, rng.standard_normal(g.shape))
        assert lebesgue_norm(resolvent_smooth(u, lam, p), 2) <= lebesgue_norm(u, 2) * math.sqrt(p.c_s) / lam * (1 + 1e-12)

    def test_rejects_nonpositive(self):
        g = make_grid(1, 16, 1.0)
        with pytest.raises(ValueError):
            resolvent_smooth(ComplexField(g, np.ones(g.shape)), 0.0, PhysParams(0.5, 3.0))


class TestNorms:
    def test_seminorm_single_mode(self):
        g = make_grid(2, 32, math.pi)
        u = ComplexField.from_function(g, lambda x, y: np.exp(2j * x))
        assert sobolev_seminorm(u, 0.8) == pytest.approx(2 ** 0.8 * lebesgue_norm(u, 2), rel=1e-12)

    def test_sigma_zero_is_l2(self, rng):
        g = make_grid(1, 64, 3.0)
        u = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        assert sobolev_seminorm(u, 0.0) == pytest.approx(lebesgue_norm(u, 2), rel=1e-14)

    def test_gaussian_half_seminorm_against_series(self, grid_1d):
        x = grid_1d.coords[0]
        u = ComplexField(grid_1d, np.exp(-x ** 2 / 2))
        got = sobolev_seminorm(u, 0.5) ** 2
        ks = math.pi * np.arange(-400, 401) / grid_1d.l
        ref = np.sum(np.abs(ks) * 2 * math.pi * np.exp(-ks ** 2)) / (2 * grid_1d.l)
        assert got == pytest.approx(ref, rel=1e-8)

    @pytest.mark.parametrize("r", [1.0, 2.0, 3.5, math.inf])
    def test_constant_field(self, r):
        g = make_grid(2, 16, 1.5)
        A = 1.7
        u = ComplexField(g, np.full(g.shape, A + 0j))
        expect = A if math.isinf(r) else A * g.volume ** (1 / r)
        assert lebesgue_norm(u, r) == pytest.approx(expect, rel=1e-12)

    def test_parseval(self, rng):
        g = make_grid(3, 16, 2.0)
        u = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        assert spectral_l2_squared(g, u.spectral()) == pytest.approx(lebesgue_norm(u, 2) ** 2, rel=1e-12)

    def test_sech_l4(self, sech_soliton):
        assert lebesgue_norm(sech_soliton, 4) ** 4 == pytest.approx(16 / 3, rel=1e-10)

    def test_bad_exponent(self):
        g = make_grid(1, 16, 1.0)
        with pytest.raises(ValueError):
            lebesgue_norm(ComplexField(g, np.ones(g.shape)), 0.5)


class TestMassEnergy:
    def test_zero(self):
        g = make_grid(2, 16, 1.0)
        assert mass_energy(ComplexField(g, np.zeros(g.shape)), PhysParams(0.7, 3.0)) == (0.0, 0.0)

    @pytest.mark.parametrize("sign", ["focusing", "defocusing"])
    def test_plane_wave(self, sign):
        g = make_grid(2, 32, 2.0)
        p = PhysParams(0.7, 3.5, sign)
        A, m = 0.8, (3, -2)
        k = [math.pi * mj / g.l for mj in m]
        u = ComplexField.from_function(g, lambda x, y: A * np.exp(1j * (k[0] * x + k[1] * y)))
        k2s = (k[0] ** 2 + k[1] ** 2) ** p.s
        V = g.volume
        sgn = -1 if sign == "focusing" else 1
        M, E = mass_energy(u, p)
        assert M == pytest.approx(A * A * V, rel=1e-12)
        assert E == pytest.approx(V * (A * A * k2s / 2 + sgn * A ** (p.p + 1) / (p.p + 1)), rel=1e-12)

    def test_sech(self, sech_soliton, nls_cubic):
        M, _ = mass_energy(sech_soliton, nls_cubic)
        assert M == pytest.approx(4.0, rel=1e-10)
        assert sobolev_seminorm(sech_soliton, 1.0) ** 2 == pytest.approx(4 / 3, rel=1e-10)


class TestStrauss:
    def test_amplitude_homogeneity(self):
        g = make_grid(3, 32, 6.0)
        p = PhysParams(0.9, 3.0)
        u = ComplexField(g, np.exp(-g.r ** 2))
        assert strauss_ratio(u * 2.0, p) == pytest.approx(strauss_ratio(u, p), rel=1e-12)

    def test_rescaling(self):
        p = PhysParams(0.9, 3.0)
        g = make_grid(3, 32, 6.0)
        mu = 2.0
        u = ComplexField(g, np.exp(-g.r ** 2))
        g2 = g.rescaled(mu)
        v = ComplexField(g2, mu ** ((3 - 2 * p.s) / 2) * np.exp(-(mu * g2.r) ** 2))
        assert strauss_ratio(v, p) == pytest.approx(strauss_ratio(u, p), rel=1e-3)

    def test_refinement(self):
        p = PhysParams(0.9, 3.0)
        vals = []
        for n in (32, 64):
            g = make_grid(3, n, 6.0)
            vals.append(strauss_ratio(ComplexField(g, np.exp(-g.r ** 2)), p))
        assert np.isfinite(vals).all() and abs(vals[1] / vals[0] - 1) < 0.05

    def test_zero_field(self):
        g = make_grid(1, 16, 1.0)
        with pytest.raises(ValueError):
            strauss_ratio(ComplexField(g, np.zeros(g.shape)), PhysParams(0.5, 3.0))


class TestBandwidth:
    def test_tail_fraction_of_top_mode(self):
        g = make_grid(1, 32, math.pi)
        u = ComplexField.from_function(g, lambda x: np.exp(15j * x))
        assert spectral_tail_fraction(g, u.spectral()) == pytest.approx(1.0)
        low = ComplexField.from_function(g, lambda x: np.exp(2j * x))
        assert spectral_tail_fraction(g, low.spectral()) < 1e-30

    def test_wrap_time_single_mode(self):
        g = make_grid(1, 64, math.pi)
        p = PhysParams(0.75, 3.0)
        u = ComplexField.from_function(g, lambda x: np.exp(4j * x))
        assert effective_bandwidth(u) == pytest.approx(4.0)
        assert wrap_time(u, p) == pytest.approx(2 * math.pi / (1.5 * 4 ** 0.5))
