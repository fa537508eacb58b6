"""Fourier multipliers, norms and conserved quantities on the periodic box."""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .grid import ComplexField, Grid, PhysParams, fftn, ifftn


def _check_finite(u: ComplexField) -> None:
    if not np.all(np.isfinite(u.values)):
        raise FloatingPointError("field contains non-finite values")


def symbol_power(grid: Grid, sigma: float) -> np.ndarray:
    """``|k|^sigma`` with the zero mode mapped to 0 for ``sigma > 0``."""
    if sigma == 0:
        return np.ones(grid.shape)
    with np.errstate(divide="ignore"):
        out = grid.kabs ** sigma
    if sigma < 0:
        out[(0,) * grid.d] = 0.0
    return out


def apply_multiplier(u: ComplexField, symbol: np.ndarray) -> ComplexField:
    return ComplexField(u.grid, ifftn(u.spectral() * symbol))


def fractional_power_apply(u: ComplexField, sigma: float) -> ComplexField:
    """Apply ``D^sigma = (-Delta)^(sigma/2)``; ``sigma = 2s`` gives ``(-Delta)^s``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    _check_finite(u)
    return apply_multiplier(u, symbol_power(u.grid, sigma))


def laplacian(u: ComplexField) -> ComplexField:
    return apply_multiplier(u, -u.grid.k2)


def linear_flow_symbol(grid: Grid, t: float, params: PhysParams) -> np.ndarray:
    """Multiplier ``exp(-i t |k|^(2s))`` of the free flow."""
    return np.exp(-1j * t * symbol_power(grid, 2 * params.s))


def resolvent_symbol(grid: Grid, lam: float, params: PhysParams) -> np.ndarray:
    return math.sqrt(params.c_s) / (grid.k2 + lam)


def resolvent_smooth(u: ComplexField, lam: float, params: PhysParams) -> ComplexField:
    """``u_lam = sqrt(sin(pi s)/pi) (lam - Delta)^{-1} u``."""
    if not lam > 0:
        raise ValueError(f"resolvent parameter must be positive, got {lam}")
    return apply_multiplier(u, resolvent_symbol(u.grid, lam, params))


def gradient_spectral(grid: Grid, uhat: np.ndarray) -> list[np.ndarray]:
    """Physical-space gradient components from spectral data (Nyquist dropped)."""
    return [ifftn(1j * kj * uhat) for kj in grid.kvec_odd]


def gradient(u: ComplexField) -> list[np.ndarray]:
    return gradient_spectral(u.grid, u.spectral())


def spectral_l2_squared(grid: Grid, uhat: np.ndarray, weight=None) -> float:
    """``||u||_2^2`` evaluated on the Fourier side (optionally with a symbol weight)."""
    dens = uhat.real ** 2 + uhat.imag ** 2
    if weight is not None:
        dens = dens * weight
    return float(np.sum(dens)) * grid.cell_volume / grid.size


def sobolev_seminorm(u: ComplexField, sigma: float) -> float:
    """``||D^sigma u||_{L^2}`` computed spectrally."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return lebesgue_norm(u, 2)
    return math.sqrt(spectral_l2_squared(u.grid, u.spectral(), symbol_power(u.grid, 2 * sigma)))


def sobolev_norm(u: ComplexField, sigma: float) -> float:
    """Inhomogeneous ``H^sigma`` norm with the Bessel weight ``(1+|k|^2)^sigma``."""
    return math.sqrt(spectral_l2_squared(u.grid, u.spectral(), (1.0 + u.grid.k2) ** sigma))


def lebesgue_norm(u: ComplexField, r: float) -> float:
    if not r >= 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {r}")
    vals = np.ravel(u.physical())
    if math.isinf(r):
        return float(np.max(np.abs(vals))) if vals.size else 0.0
    if r == 2:
        return math.sqrt(float(np.vdot(vals, vals).real) * u.grid.cell_volume)
    return (_kernels.abs_pow_sum(vals, float(r)) * u.grid.cell_volume) ** (1.0 / r)


def potential_integral(u: ComplexField, p: float, weight: np.ndarray | None = None) -> float:
    """``int w |u|^(p+1) dx`` (``w = 1`` when omitted)."""
    vals = np.ravel(u.physical())
    if weight is None:
        acc = _kernels.abs_pow_sum(vals, p + 1.0)
    else:
        w = np.ascontiguousarray(np.broadcast_to(weight, u.grid.shape), dtype=float).ravel()
        acc = _kernels.weighted_abs_pow_sum(vals, w, p + 1.0)
    return acc * u.grid.cell_volume


def mass(u: ComplexField) -> float:
    return lebesgue_norm(u, 2) ** 2


def energy_from_norms(hs2: float, pot: float, params: PhysParams) -> float:
    sgn = -1.0 if params.focusing else 1.0
    return 0.5 * hs2 + sgn * pot / (params.p + 1.0)


def mass_energy(u: ComplexField, params: PhysParams) -> tuple[float, float]:
    """Mass ``int |u|^2`` and energy ``1/2 ||u||_{H^s}^2 -+ ||u||_{p+1}^{p+1}/(p+1)``."""
    hs2 = sobolev_seminorm(u, params.s) ** 2
    pot = potential_integral(u, params.p)
    return mass(u), energy_from_norms(hs2, pot, params)


def strauss_ratio(u: ComplexField, params: PhysParams) -> float:
    """``max |x|^((d-2s)/2) |u| / ||u||_{H^s}`` for radial ``u``."""
    g = u.grid
    hs = sobolev_seminorm(u, params.s)
    if hs == 0:
        raise ValueError("strauss ratio undefined for a field with vanishing H^s seminorm")
    weight = g.r ** ((g.d - 2.0 * params.s) / 2.0)
    return float(np.max(weight * np.abs(u.physical()))) / hs


def spectral_tail_fraction(grid: Grid, uhat: np.ndarray, fraction: float = 2.0 / 3.0) -> float:
    """Share of ``sum |u_hat|^2`` carried by modes with ``max_j |m_j| > fraction * n/2``."""
    dens = uhat.real ** 2 + uhat.imag ** 2
    total = float(np.sum(dens))
    if total == 0:
        return 0.0
    return float(np.sum(dens * tail_mask(grid, fraction))) / total


def tail_mask(grid: Grid, fraction: float = 2.0 / 3.0) -> np.ndarray:
    m = np.abs(np.fft.fftfreq(grid.n) * grid.n)
    high = m > fraction * (grid.n // 2)
    mask = np.zeros(grid.shape, dtype=bool)
    for j in range(grid.d):
        shape = [1] * grid.d
        shape[j] = grid.n
        mask = mask | high.reshape(shape)
    return mask


def effective_bandwidth(u: ComplexField, tail: float = 1e-8) -> float:
    """Smallest ``K`` with ``sum_{|k|>K} |u_hat|^2 <= tail * sum |u_hat|^2``."""
    dens = np.ravel(np.abs(u.spectral()) ** 2)
    kabs = np.ravel(u.grid.kabs)
    order = np.argsort(kabs)
    cum = np.cumsum(dens[order])
    total = cum[-1]
    if total == 0:
        return 0.0
    idx = int(np.searchsorted(cum, (1.0 - tail) * total))
    idx = min(idx, cum.size - 1)
    return float(kabs[order][idx])


def wrap_time(u: ComplexField, params: PhysParams, tail: float = 1e-4) -> float:
    """Time for the fastest significant wave packet to cross the box once.

    Uses the group speed ``2s |k|^(2s-1)`` at the bandwidth holding all but
    ``tail`` of the spectral mass; beyond this horizon periodic images
    contaminate diagnostics.
    """
    kmax = max(effective_bandwidth(u, tail), math.pi / u.grid.l)
    speed = 2.0 * params.s * kmax ** (2.0 * params.s - 1.0)
    return 2.0 * u.grid.l / speed
