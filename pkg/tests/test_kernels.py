import os
import subprocess
import sys

import numpy as np
import pytest

from fnls_lab import _kernels as K

numba_only = pytest.mark.skipif(not K.USE_NUMBA, reason="numba backend unavailable or disabled")

N = 4099  # odd size, so no kernel can lean on a vectorized tail


@pytest.fixture
def field(rng):
    return rng.standard_normal(N) + 1j * rng.standard_normal(N)


@numba_only
class TestNumbaMatchesNumpy:
    @pytest.mark.parametrize("r", [2.0, 3.0, 4.0, 2.5])
    def test_abs_pow_sum(self, field, r):
        assert K.nb_abs_pow_sum(field, r) == pytest.approx(K.np_abs_pow_sum(field, r), rel=1e-13)

    def test_weighted_abs_pow_sum(self, field, rng):
        w = rng.uniform(0, 1, N)
        w[::3] = 0.0
        a = K.nb_weighted_abs_pow_sum(field, w, 4.0)
        assert a == pytest.approx(K.np_weighted_abs_pow_sum(field, w, 4.0), rel=1e-13)

    @pytest.mark.parametrize("expo", [2.0, 4.0, 1.5])
    def test_phase_rotate(self, field, expo):
        a = K.nb_phase_rotate(field, -0.37, expo)
        b = K.np_phase_rotate(field, -0.37, expo)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-14)

    @pytest.mark.parametrize("p", [3.0, 5.0, 2.2])
    def test_signed_power(self, field, p):
        assert np.allclose(K.nb_signed_power(field, p), K.np_signed_power(field, p), rtol=1e-13, atol=0)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_hessian_form(self, rng, d):
        h = rng.standard_normal((d, d, N))
        h = 0.5 * (h + h.transpose(1, 0, 2))
        g = rng.standard_normal((d, N)) + 1j * rng.standard_normal((d, N))
        assert np.allclose(K.nb_hessian_form(h, g), K.np_hessian_form(h, g), rtol=1e-12, atol=1e-13)

    @pytest.mark.parametrize("d", [1, 3])
    def test_accumulate_virial_density(self, rng, d):
        g = rng.standard_normal((d, N)) + 1j * rng.standard_normal((d, N))
        ul = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        pairs = [(np.zeros((d, d, N)), np.zeros(N)) for _ in range(2)]
        for w in (0.3, 1.7):
            K.nb_accumulate_virial_density(*pairs[0], g, ul, w)
            K.np_accumulate_virial_density(*pairs[1], g, ul, w)
        for a, b in zip(pairs[0], pairs[1]):
            assert np.allclose(a, b, rtol=1e-13, atol=1e-14)


class TestReference:
    def test_hessian_form_is_quadratic_form(self, rng):
        d = 3
        h = rng.standard_normal((d, d, 5))
        h = 0.5 * (h + h.transpose(1, 0, 2))
        g = rng.standard_normal((d, 5)) + 1j * rng.standard_normal((d, 5))
        want = [np.real(np.conj(g[:, i]) @ h[:, :, i] @ g[:, i]) for i in range(5)]
        assert np.allclose(K.np_hessian_form(h, g), want, rtol=1e-13)

    def test_phase_rotate_keeps_modulus(self, field):
        assert np.allclose(np.abs(K.phase_rotate(field, 2.3, 2.0)), np.abs(field), rtol=1e-14)

    def test_signed_power_cubic(self, field):
        assert np.allclose(K.signed_power(field, 3.0), np.abs(field) ** 2 * field, rtol=1e-13)

    def test_backend_label(self):
        assert K.backend() in ("numba", "numpy")


def _backend_in_subprocess(flag):
    env = {**os.environ, "FNLS_LAB_DISABLE_NUMBA": flag}
    code = "from fnls_lab import _kernels as K; print(K.backend(), K.abs_pow_sum.__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split()


def test_env_flag_forces_numpy():
    assert _backend_in_subprocess("1") == ["numpy", "np_abs_pow_sum"]


@numba_only
def test_default_is_numba():
    assert _backend_in_subprocess("0") == ["numba", "nb_abs_pow_sum"]


def test_numpy_backend_end_to_end():
    # same physics through the fallback path: sech ground state mass
    env = {**os.environ, "FNLS_LAB_DISABLE_NUMBA": "1"}
    code = (
        "import math\n"
        "from fnls_lab.grid import make_grid, PhysParams\n"
        "from fnls_lab.groundstate import petviashvili_solve\n"
        "g = petviashvili_solve(PhysParams(1.0, 3.0), make_grid(1, 512, 10 * math.pi), tol=1e-10)\n"
        "print(repr(g.mass))\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == pytest.approx(4.0, abs=1e-6)
