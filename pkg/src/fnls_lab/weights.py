"""Radial test functions for virial/Morawetz computations and smooth cutoffs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid


def smoothstep7(xi: np.ndarray) -> np.ndarray:
    """Septic smoothstep: 0 -> 1 on [0, 1] with three vanishing derivatives at both ends."""
    x = np.clip(xi, 0.0, 1.0)
    return x ** 4 * (35.0 - 84.0 * x + 70.0 * x ** 2 - 20.0 * x ** 3)


def _smoothstep7_derivs(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.clip(xi, 0.0, 1.0)
    d1 = 140.0 * x ** 3 * (1.0 - x) ** 3
    d2 = 420.0 * x ** 2 * (1.0 - x) ** 2 * (1.0 - 2.0 * x)
    d3 = 840.0 * x * (1.0 - x) * (1.0 - 5.0 * x + 5.0 * x ** 2)
    return d1, d2, d3


def _smoothstep7_int1(x: np.ndarray) -> np.ndarray:
    return 7.0 * x ** 5 - 14.0 * x ** 6 + 10.0 * x ** 7 - 2.5 * x ** 8


def _smoothstep7_int2(x: np.ndarray) -> np.ndarray:
    return 7.0 / 6.0 * x ** 6 - 2.0 * x ** 7 + 1.25 * x ** 8 - 2.5 / 9.0 * x ** 9


def psi_profile(r: np.ndarray, delta: float) -> tuple[np.ndarray, ...]:
    """``psi`` and its first four derivatives for the blended quadratic-to-linear profile.

    ``psi' = r`` below ``1 - delta``, ``psi' = 1`` above ``1 + delta`` and
    ``psi'' = 1 - S((r - 1 + delta) / (2 delta))`` in between, so ``psi'' >= 0``.
    """
    r = np.asarray(r, dtype=float)
    a, w = 1.0 - delta, 2.0 * delta
    xi = np.clip((r - a) / w, 0.0, 1.0)
    blend = (r > a) & (r < 1.0 + delta)
    outer = r >= 1.0 + delta
    inner = ~(blend | outer)

    s1, s2, _ = _smoothstep7_derivs(xi)
    dr = r - a
    p0 = np.where(inner, 0.5 * r ** 2, 0.5 * a ** 2 + a * dr + 0.5 * dr ** 2 - w ** 2 * _smoothstep7_int2(xi))
    p1 = np.where(inner, r, a + dr - w * _smoothstep7_int1(xi))
    p2 = np.where(inner, 1.0, 1.0 - smoothstep7(xi))
    p3 = np.where(blend, -s1 / w, 0.0)
    p4 = np.where(blend, -s2 / w ** 2, 0.0)
    b = 1.0 + delta
    psi_b = 0.5 * a ** 2 + a * w + 0.5 * w ** 2 - w ** 2 * float(_smoothstep7_int2(np.float64(1.0)))
    p0 = np.where(outer, psi_b + (r - b), p0)
    p1 = np.where(outer, 1.0, p1)
    p2 = np.where(outer, 0.0, p2)
    return p0, p1, p2, p3, p4


@dataclass(frozen=True)
class MorawetzWeight:
    """A radial weight ``phi`` with the derivative fields used by virial identities."""

    R: float
    phi: np.ndarray
    grad: np.ndarray  # (d, *shape)
    hess: np.ndarray  # (d, d, *shape)
    lap: np.ndarray
    bilap: np.ndarray
    grid: Grid
    kind: str = "morawetz"

    def min_hessian_eigenvalue(self) -> float:
        d = self.grid.d
        h = np.moveaxis(self.hess.reshape(d, d, -1), -1, 0)
        return float(np.linalg.eigvalsh(h).min())

    def grad_w2inf(self) -> float:
        """``||grad phi||_{W^{2,inf}}`` estimated from the stored fields."""
        g = float(np.max(np.sqrt(np.sum(self.grad ** 2, axis=0))))
        h = float(np.max(np.abs(self.hess)))
        return g + h + float(np.max(np.abs(self.lap))) + float(np.max(np.abs(self.bilap)))


def _radial_fields(grid: Grid, R: float, p1, p2, p3, p4, inner):
    """Assemble Hessian, Laplacian and bi-Laplacian of ``R^2 psi(|x|/R)``."""
    d = grid.d
    r = np.broadcast_to(grid.r, grid.shape)
    safe = np.where(r > 0, r, 1.0)
    xhat = [np.broadcast_to(xj, grid.shape) / safe for xj in grid.coords]
    radial_over_r = np.where(inner, 1.0, R * p1 / safe)  # R psi'(r/R) / |x|

    grad = np.stack([np.where(inner, np.broadcast_to(xj, grid.shape), R * p1 * xh) for xj, xh in zip(grid.coords, xhat)])
    hess = np.empty((d, d) + grid.shape)
    for j in range(d):
        for k in range(d):
            proj = xhat[j] * xhat[k]
            ident = 1.0 if j == k else 0.0
            hess[j, k] = np.where(inner, ident, radial_over_r * (ident - proj) + p2 * proj)
    lap = np.where(inner, float(d), (d - 1) * radial_over_r + p2)
    c = (d - 1) * (d - 3)
    bilap = c * p2 / safe ** 2 - c * R * p1 / safe ** 3 + 2 * (d - 1) * p3 / (R * safe) + p4 / R ** 2
    if d == 1:
        bilap = p4 / R ** 2
    bilap = np.where(inner, 0.0, bilap)
    return grad, hess, lap, bilap


def build_morawetz_weight(grid: Grid, R: float, delta: float = 0.5) -> MorawetzWeight:
    """``phi_R = R^2 psi(|x|/R)``: quadratic inside ``(1-delta)R``, linear growth beyond ``(1+delta)R``."""
    if not 0 < delta <= 0.5:
        raise ValueError(f"blend width must lie in (0, 1/2], got {delta}")
    if not 0 < R < 0.5 * grid.l:
        raise ValueError(f"radius {R} must be positive and below l/2 = {0.5 * grid.l}")
    rho = grid.r / R
    p0, p1, p2, p3, p4 = psi_profile(rho, delta)
    inner = np.broadcast_to(rho <= 1.0 - delta, grid.shape)
    grad, hess, lap, bilap = _radial_fields(grid, R, p1, p2, p3, p4, inner)
    return MorawetzWeight(R, R ** 2 * p0, grad, hess, lap, bilap, grid)


def build_distance_weight(grid: Grid, eps: float = 1.0) -> MorawetzWeight:
    """``phi = sqrt(|x|^2 + eps^2)``; convex, with ``Delta^2 phi <= 0`` in three dimensions."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    d = grid.d
    r2 = np.broadcast_to(grid.r ** 2, grid.shape)
    rho = np.sqrt(r2 + eps ** 2)
    x = [np.broadcast_to(xj, grid.shape) for xj in grid.coords]
    grad = np.stack([xj / rho for xj in x])
    hess = np.empty((d, d) + grid.shape)
    for j in range(d):
        for k in range(d):
            hess[j, k] = (1.0 / rho if j == k else 0.0) - x[j] * x[k] / rho ** 3
    lap = (d - 1) / rho + eps ** 2 / rho ** 3
    e2 = eps ** 2
    bilap = (
        -(d - 1) / rho ** 3
        + 3 * (d - 1) * r2 / rho ** 5
        - 3 * e2 / rho ** 5
        + 15 * e2 * r2 / rho ** 7
        - (d - 1) ** 2 / rho ** 3
        - 3 * (d - 1) * e2 / rho ** 5
    )
    return MorawetzWeight(float("inf"), rho, grad, hess, lap, bilap, grid, kind="distance")


def radial_cutoff(grid: Grid, R: float) -> tuple[np.ndarray, np.ndarray]:
    """``chi_R`` (1 on ``|x| <= R/2``, 0 beyond ``R``) and its Laplacian."""
    r = np.broadcast_to(grid.r, grid.shape)
    xi = (r / R - 0.5) / 0.5
    s1, s2, _ = _smoothstep7_derivs(xi)
    chi = 1.0 - smoothstep7(xi)
    c1 = -s1 / (0.5 * R)
    c2 = -s2 / (0.5 * R) ** 2
    if grid.d == 1:
        lap = c2
    else:
        safe = np.where(r > 0, r, 1.0)
        lap = c2 + (grid.d - 1) * c1 / safe
    return chi, lap
