"""Pointwise hot loops, compiled with numba when available.

Set ``FNLS_LAB_DISABLE_NUMBA=1`` to force the pure-numpy path (useful for
debugging and for the benchmark in ``benchmarks/bench_kernels.py``).  Both
paths take flat contiguous arrays and must agree to round-off.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_REQUESTED = os.environ.get("FNLS_LAB_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")
USE_NUMBA = NUMBA_REQUESTED and numba is not None


# -- numpy reference implementations ---------------------------------------

def np_abs_pow_sum(u, r):
    return float(np.sum(np.abs(u) ** r))


def np_weighted_abs_pow_sum(u, weight, r):
    return float(np.sum(weight * np.abs(u) ** r))


def np_phase_rotate(u, coeff, expo):
    a2 = u.real ** 2 + u.imag ** 2
    theta = coeff * (a2 if expo == 2.0 else a2 ** (0.5 * expo))
    return u * (np.cos(theta) + 1j * np.sin(theta))


def np_signed_power(q, p):
    return np.abs(q) ** (p - 1.0) * q


def np_hessian_form(hess, grads):
    # hess: (d, d, N) real symmetric, grads: (d, N) complex
    d = grads.shape[0]
    out = np.zeros(grads.shape[1])
    for j in range(d):
        out += hess[j, j] * (grads[j].real ** 2 + grads[j].imag ** 2)
        for k in range(j + 1, d):
            out += 2.0 * hess[j, k] * (grads[j].real * grads[k].real + grads[j].imag * grads[k].imag)
    return out


def np_accumulate_virial_density(acc_h, acc_u, grads, ulam, w):
    d = grads.shape[0]
    for j in range(d):
        for k in range(j, d):
            acc_h[j, k] += w * (grads[j].real * grads[k].real + grads[j].imag * grads[k].imag)
    acc_u += w * (ulam.real ** 2 + ulam.imag ** 2)


# -- numba versions ---------------------------------------------------------

if USE_NUMBA:
    _jit = numba.njit(cache=True, fastmath=False)

    @_jit
    def _mod_pow(a2, half, ihalf):
        # |z|^r from |z|^2: integer halves avoid the generic pow
        return a2 ** ihalf if ihalf >= 0 else a2 ** half

    @_jit
    def _int_or_neg(half):
        return int(half) if half == int(half) and 0 <= half <= 16 else -1

    @_jit
    def nb_abs_pow_sum(u, r):
        half = 0.5 * r
        ih = _int_or_neg(half)
        acc = 0.0
        for i in range(u.size):
            z = u[i]
            acc += _mod_pow(z.real * z.real + z.imag * z.imag, half, ih)
        return acc

    @_jit
    def nb_weighted_abs_pow_sum(u, weight, r):
        half = 0.5 * r
        ih = _int_or_neg(half)
        acc = 0.0
        for i in range(u.size):
            z = u[i]
            acc += weight[i] * _mod_pow(z.real * z.real + z.imag * z.imag, half, ih)
        return acc

    @_jit
    def nb_phase_rotate(u, coeff, expo):
        out = np.empty_like(u)
        half = 0.5 * expo
        square = expo == 2.0
        for i in range(u.size):
            re = u[i].real
            im = u[i].imag
            a2 = re * re + im * im
            theta = coeff * (a2 if square else a2 ** half)
            c = np.cos(theta)
            s = np.sin(theta)
            out[i] = complex(re * c - im * s, re * s + im * c)
        return out

    @_jit
    def nb_signed_power(q, p):
        half = 0.5 * (p - 1.0)
        ih = _int_or_neg(half)
        out = np.empty_like(q)
        for i in range(q.size):
            z = q[i]
            out[i] = _mod_pow(z.real * z.real + z.imag * z.imag, half, ih) * z
        return out

    @_jit
    def nb_hessian_form(hess, grads):
        d = grads.shape[0]
        n = grads.shape[1]
        out = np.zeros(n)
        for i in range(n):
            acc = 0.0
            for j in range(d):
                gj = grads[j, i]
                acc += hess[j, j, i] * (gj.real * gj.real + gj.imag * gj.imag)
                for k in range(j + 1, d):
                    gk = grads[k, i]
                    acc += 2.0 * hess[j, k, i] * (gj.real * gk.real + gj.imag * gk.imag)
            out[i] = acc
        return out

    @_jit
    def nb_accumulate_virial_density(acc_h, acc_u, grads, ulam, w):
        d = grads.shape[0]
        n = grads.shape[1]
        for i in range(n):
            for j in range(d):
                gj = grads[j, i]
                for k in range(j, d):
                    gk = grads[k, i]
                    acc_h[j, k, i] += w * (gj.real * gk.real + gj.imag * gk.imag)
            z = ulam[i]
            acc_u[i] += w * (z.real * z.real + z.imag * z.imag)

    abs_pow_sum = nb_abs_pow_sum
    weighted_abs_pow_sum = nb_weighted_abs_pow_sum
    phase_rotate = nb_phase_rotate
    signed_power = nb_signed_power
    hessian_form = nb_hessian_form
    accumulate_virial_density = nb_accumulate_virial_density
else:
    abs_pow_sum = np_abs_pow_sum
    weighted_abs_pow_sum = np_weighted_abs_pow_sum
    phase_rotate = np_phase_rotate
    signed_power = np_signed_power
    hessian_form = np_hessian_form
    accumulate_virial_density = np_accumulate_virial_density


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
