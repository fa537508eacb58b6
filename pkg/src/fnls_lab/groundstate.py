"""Ground state of ``(-Delta)^s Q + Q - Q^p = 0`` and the sharp thresholds built on it."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _kernels
from .grid import ComplexField, Grid, PhysParams, fftn, ifftn
from .spectral import (
    energy_from_norms,
    lebesgue_norm,
    mass,
    potential_integral,
    sobolev_seminorm,
    spectral_l2_squared,
    symbol_power,
)

log = logging.getLogger(__name__)


class GroundStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundStateReport:
    q: ComplexField
    params: PhysParams
    mass: float
    hs: float
    lp1: float
    energy: float
    gn_const: float
    residual: float
    iterations: int
    tail_mass: float
    in_regime: bool

    @property
    def grid(self) -> Grid:
        return self.q.grid

    def to_json_dict(self) -> dict:
        g = self.grid
        return {
            "d": g.d,
            "n": g.n,
            "l": g.l,
            "s": self.params.s,
            "p": self.params.p,
            "mass": self.mass,
            "hs": self.hs,
            "lp1": self.lp1,
            "energy": self.energy,
            "gn_const": self.gn_const,
            "residual": self.residual,
            "iterations": self.iterations,
            "tail_mass": self.tail_mass,
        }


def gaussian_guess(grid: Grid, amplitude: float = 2.0) -> ComplexField:
    return ComplexField(grid, amplitude * np.exp(-(grid.r ** 2)))


def _reflect(a: np.ndarray, axis: int) -> np.ndarray:
    # x_j -> -x_j is the index map j -> (n - j) mod n on [-l, l)
    return np.roll(np.flip(a, axis=axis), 1, axis=axis)


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Project onto functions invariant under the grid's reflections and axis swaps.

    This is the exact discrete stand-in for radialisation: it removes
    non-symmetric round-off without interpolating off the grid.
    """
    d = a.ndim
    for ax in range(d):
        a = 0.5 * (a + _reflect(a, ax))
    if d == 2:
        a = 0.5 * (a + a.T)
    elif d == 3:
        perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        a = sum(np.transpose(a, pm) for pm in perms) / 6.0
    return a


def elliptic_residual(q: ComplexField, params: PhysParams) -> float:
    """``||(-Delta)^s q + q - |q|^(p-1) q||_{L^2}``."""
    g = q.grid
    vals = np.ascontiguousarray(q.physical().real)
    qp = _kernels.signed_power(vals.ravel(), params.p).reshape(g.shape)
    rhat = (symbol_power(g, 2 * params.s) + 1.0) * fftn(vals) - fftn(qp)
    return math.sqrt(spectral_l2_squared(g, rhat))


def gn_exponents(d: int, params: PhysParams) -> tuple[float, float]:
    a = d * (params.p - 1.0) / (2.0 * params.s)
    return a, params.p + 1.0 - a


def gn_functional(v: ComplexField, params: PhysParams) -> float:
    """``||v||_{p+1}^{p+1} / (||v||_{H^s}^a ||v||_2^b)``; the sharp constant is its supremum."""
    a, b = gn_exponents(v.grid.d, params)
    hs = sobolev_seminorm(v, params.s)
    l2 = lebesgue_norm(v, 2)
    if hs <= 0 or l2 <= 0:
        raise ValueError("degenerate norms in Gagliardo-Nirenberg quotient")
    return potential_integral(v, params.p) / (hs ** a * l2 ** b)


def gn_constant(report: GroundStateReport) -> float:
    """Sharp Gagliardo-Nirenberg constant, attained at the ground state."""
    a, b = gn_exponents(report.grid.d, report.params)
    if report.hs <= 0 or report.mass <= 0 or report.lp1 <= 0:
        raise ValueError("degenerate norms in ground-state report")
    return report.lp1 ** (report.params.p + 1.0) / (report.hs ** a * math.sqrt(report.mass) ** b)


def report_from_field(
    q: ComplexField,
    params: PhysParams,
    residual: float | None = None,
    iterations: int = 0,
) -> GroundStateReport:
    g = q.grid
    hs = sobolev_seminorm(q, params.s)
    pot = potential_integral(q, params.p)
    m = mass(q)
    lp1 = pot ** (1.0 / (params.p + 1.0))
    a, b = gn_exponents(g.d, params)
    gn = pot / (hs ** a * math.sqrt(m) ** b) if hs > 0 and m > 0 else float("nan")
    outer = g.r > 0.5 * g.l
    tail = g.integrate(np.abs(q.physical()) ** 2 * outer)
    return GroundStateReport(
        q=q,
        params=params,
        mass=m,
        hs=hs,
        lp1=lp1,
        energy=energy_from_norms(hs ** 2, pot, params.with_sign("focusing")),
        gn_const=gn,
        residual=elliptic_residual(q, params) if residual is None else residual,
        iterations=iterations,
        tail_mass=tail,
        in_regime=params.in_scattering_regime(g.d),
    )


def petviashvili_solve(
    params: PhysParams,
    grid: Grid,
    init: ComplexField | None = None,
    tol: float = 1e-10,
    max_iter: int = 2000,
    radialize: bool | None = None,
) -> GroundStateReport:
    """Stabilised fixed-point iteration for the positive radial ground state.

    ``Q <- S^gamma ((-Delta)^s + 1)^{-1} Q^p`` with
    ``S = <((-Delta)^s + 1) Q, Q> / <Q^p, Q>`` and ``gamma = p/(p-1)``.
    Stops once the L2 residual of the elliptic equation drops to ``tol``.
    """
    if not params.focusing:
        raise GroundStateError("ground states exist only for the focusing sign")
    if init is None:
        init = gaussian_guess(grid)
    if radialize is None:
        radialize = grid.d >= 2
    gamma = params.p / (params.p - 1.0)
    denom = symbol_power(grid, 2 * params.s) + 1.0
    q = np.ascontiguousarray(init.physical().real)
    if np.any(q < 0) or not np.any(q > 0):
        raise GroundStateError("initial guess must be positive")
    nsz = grid.size
    residual = math.inf
    for it in range(max_iter + 1):
        qhat = fftn(q)
        qp = _kernels.signed_power(q.ravel(), params.p).reshape(grid.shape)
        qphat = fftn(qp)
        residual = math.sqrt(spectral_l2_squared(grid, denom * qhat - qphat))
        if not math.isfinite(residual):
            raise GroundStateError(f"non-finite residual at iteration {it}")
        if residual <= tol:
            log.debug("petviashvili converged: it=%d residual=%.3e", it, residual)
            return report_from_field(ComplexField(grid, q), params, residual, it)
        if it == max_iter:
            break
        top = float(np.sum(denom * (qhat.real ** 2 + qhat.imag ** 2)))
        bottom = float(np.sum(qp * q)) * nsz
        if not bottom > 0:
            raise GroundStateError(f"iterate collapsed to zero at iteration {it}")
        stab = top / bottom
        if not (math.isfinite(stab) and stab > 1e-12):
            raise GroundStateError(f"stabilising factor degenerate ({stab}) at iteration {it}")
        q = stab ** gamma * ifftn(qphat / denom).real
        if radialize:
            q = symmetrize(q)
        q = np.ascontiguousarray(q)
    raise GroundStateError(f"no convergence in {max_iter} iterations (residual {residual:.3e})")


Classification = Literal["scatter-candidate", "blowup-candidate", "above-threshold", "negative-energy-blowup"]


@dataclass(frozen=True)
class ThresholdReport:
    energy_ratio: float
    kinetic_ratio: float
    classification: Classification
    energy: float
    mass: float


def threshold_quantities(hs: float, l2: float, s: float, s_c: float) -> float:
    return hs ** s_c * l2 ** (s - s_c)


def classify_initial_data(u0: ComplexField, report: GroundStateReport, params: PhysParams) -> ThresholdReport:
    """Compare ``u0`` with the ground state through the mass-energy and kinetic quotients."""
    focusing = params.with_sign("focusing")
    s, sc = params.s, params.s_c(u0.grid.d)
    m0 = mass(u0)
    hs0 = sobolev_seminorm(u0, s)
    e0 = energy_from_norms(hs0 ** 2, potential_integral(u0, params.p), focusing)
    kin = threshold_quantities(hs0, math.sqrt(m0), s, sc) / threshold_quantities(
        report.hs, math.sqrt(report.mass), s, sc
    )
    if e0 < 0:
        return ThresholdReport(float("nan"), kin, "negative-energy-blowup", e0, m0)
    eratio = (e0 ** sc * m0 ** (s - sc)) / (report.energy ** sc * report.mass ** (s - sc))
    if eratio < 1 and kin < 1:
        cls: Classification = "scatter-candidate"
    elif eratio < 1 and kin > 1:
        cls = "blowup-candidate"
    else:
        cls = "above-threshold"
    return ThresholdReport(eratio, kin, cls, e0, m0)


def pohozaev_soliton_check(report: GroundStateReport, params: PhysParams) -> float:
    """Relative gap in ``||Q||_{H^s}^{s_c} ||Q||_2^{s-s_c} = ((2d+4(s-s_c))/(2d C))^((d-2s_c)/4)``."""
    d = report.grid.d
    s, sc = params.s, params.s_c(d)
    if not 0 < sc < s:
        raise ValueError(f"identity requires 0 < s_c < s (s_c = {sc:.4g}, s = {s})")
    c = gn_constant(report)
    lhs = threshold_quantities(report.hs, math.sqrt(report.mass), s, sc)
    rhs = ((2 * d + 4 * (s - sc)) / (2 * d * c)) ** ((d - 2 * sc) / 4)
    return abs(lhs - rhs) / rhs


def scaled_ground_state(report: GroundStateReport, c: float) -> ComplexField:
    return report.q * c
