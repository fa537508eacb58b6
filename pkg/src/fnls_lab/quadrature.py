"""Quadrature in the resolvent parameter for integrals of the form
``int_0^inf lam^power g(lam) dlam`` with ``g ~ lam^-decay`` at infinity.

The half-line is mapped to ``(0, 1)`` by ``lam = lam0 t / (1 - t)``.  The
endpoint behaviour ``t^power (1-t)^(decay-power-2)`` is absorbed into a
Gauss-Jacobi weight, so the remaining integrand is smooth whenever ``g`` is a
rational function with poles on the negative axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_jacobi, gammaln, roots_jacobi

from .grid import Grid


@dataclass(frozen=True)
class LambdaQuadrature:
    """Nodes/weights with ``sum w_i f(lam_i) ~ int_0^inf f(lam) dlam``.

    Exact in the limit for ``f = lam^power g`` with ``g`` smooth and decaying
    like ``lam^-decay``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    count: int
    lam0: float
    s: float
    power: float
    decay: float

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.nodes)))

    def refined(self, factor: int = 2) -> "LambdaQuadrature":
        return build_lambda_quadrature(self.s, self.count * factor, self.lam0, power=self.power, decay=self.decay)

    def for_power(self, power: float, decay: float) -> "LambdaQuadrature":
        """Same size and scale, re-targeted at a different singular weight."""
        return build_lambda_quadrature(self.s, self.count, self.lam0, power=power, decay=decay)


def build_lambda_quadrature(
    s: float,
    count: int = 200,
    lam0: float = 1.0,
    *,
    power: float | None = None,
    decay: float = 2.0,
) -> LambdaQuadrature:
    if not 0.0 < s < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {s}")
    if count < 8:
        raise ValueError("at least 8 nodes are required")
    if not lam0 > 0:
        raise ValueError("reference scale must be positive")
    beta = s if power is None else float(power)
    alpha = decay - beta - 2.0
    if beta <= -1.0 or alpha <= -1.0:
        raise ValueError(f"non-integrable endpoint weight (power={beta}, decay={decay})")

    t, one_minus, wt = _gauss_jacobi_unit(count, alpha, beta)
    nodes = lam0 * t / one_minus
    # w_i lam_i^beta = W_i lam0^(beta+1) (1-t_i)^(-decay)
    weights = wt * lam0 ** (beta + 1.0) * one_minus ** (-decay) / nodes ** beta
    return LambdaQuadrature(nodes, weights, int(count), float(lam0), float(s), beta, float(decay))


def _gauss_jacobi_unit(n: int, alpha: float, beta: float):
    """Gauss-Jacobi rule for ``int_0^1 (1-t)^alpha t^beta f(t) dt``.

    Returns ``(t, 1 - t, weights)``.  Nodes from scipy are Newton-polished in
    the angle variable ``x = cos(theta)`` so that ``1 - t`` keeps full relative
    precision next to the singular endpoint.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        x0, _ = roots_jacobi(n, alpha, beta)
    theta = np.arccos(np.clip(x0, -1.0, 1.0))

    def dpoly(x):
        return 0.5 * (n + alpha + beta + 1.0) * eval_jacobi(n - 1, alpha + 1.0, beta + 1.0, x)

    for _ in range(4):
        x = np.cos(theta)
        step = eval_jacobi(n, alpha, beta, x) / (-np.sin(theta) * dpoly(x))
        theta = theta - step
        if np.max(np.abs(step)) < 1e-15:
            break
    x = np.cos(theta)
    one_minus = np.sin(0.5 * theta) ** 2  # (1 - x)/2
    t = np.cos(0.5 * theta) ** 2  # (1 + x)/2
    logc = (
        gammaln(n + alpha + 1.0)
        + gammaln(n + beta + 1.0)
        - gammaln(n + alpha + beta + 1.0)
        - gammaln(n + 1.0)
        + (alpha + beta + 1.0) * math.log(2.0)
    )
    # 1 - x^2 = 4 t (1 - t)
    wx = np.exp(logc) / (4.0 * t * one_minus * dpoly(x) ** 2)
    wt = wx * 0.5 ** (alpha + beta + 1.0)
    order = np.argsort(t)
    return t[order], one_minus[order], wt[order]


def default_lambda_scale(grid: Grid) -> float:
    """Geometric mean of the smallest and largest nonzero ``|k|^2`` on the grid."""
    return math.sqrt(grid.k2_min * grid.k2_max)


def beta_integral_closed_form(s: float, a: float) -> float:
    """``int_0^inf lam^s (a + lam)^-2 dlam = a^(s-1) s pi / sin(pi s)``."""
    return a ** (s - 1.0) * s * math.pi / math.sin(math.pi * s)
