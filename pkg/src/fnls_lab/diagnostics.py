"""Resolvent-integral identities, virial/Morawetz functionals and decay fits."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import _kernels
from .grid import ComplexField, Grid, PhysParams, fftn, ifftn
from .quadrature import LambdaQuadrature, build_lambda_quadrature, default_lambda_scale
from .spectral import (
    gradient,
    gradient_spectral,
    lebesgue_norm,
    linear_flow_symbol,
    potential_integral,
    sobolev_seminorm,
    spectral_l2_squared,
    symbol_power,
    wrap_time,
)
from .weights import MorawetzWeight, radial_cutoff


class DiagnosticError(ValueError):
    pass


def default_quadrature(grid: Grid, params: PhysParams, count: int = 200) -> LambdaQuadrature:
    return build_lambda_quadrature(params.s, count, default_lambda_scale(grid))


# -- resolvent-integral identities -------------------------------------------

def plancherel_identity_check(u: ComplexField, params: PhysParams, quad: LambdaQuadrature | None = None) -> float:
    """Relative gap between ``s ||D^s u||^2`` and ``int lam^s ||grad u_lam||^2 dlam``."""
    g = u.grid
    quad = quad or default_quadrature(g, params)
    uhat = u.spectral()
    dens = (uhat.real ** 2 + uhat.imag ** 2) * g.k2
    exact = params.s * spectral_l2_squared(g, uhat, symbol_power(g, 2 * params.s))
    approx = 0.0
    for lam, w in zip(quad.nodes, quad.weights):
        approx += w * lam ** params.s * params.c_s * float(np.sum(dens / (g.k2 + lam) ** 2))
    approx *= g.cell_volume / g.size
    if exact == 0:
        return abs(approx)
    return abs(approx - exact) / exact


def balakrishnan_apply(u: ComplexField, params: PhysParams, quad: LambdaQuadrature | None = None) -> ComplexField:
    """``c_s int lam^(s-1) (-Delta)(lam - Delta)^{-1} u dlam`` assembled node by node."""
    g = u.grid
    quad = quad or default_quadrature(g, params)
    if quad.power != params.s - 1.0:
        quad = quad.for_power(params.s - 1.0, 1.0)
    symbol = np.zeros(g.shape)
    for lam, w in zip(quad.nodes, quad.weights):
        symbol += (w * lam ** (params.s - 1.0)) * g.k2 / (g.k2 + lam)
    return ComplexField(g, ifftn(params.c_s * symbol * u.spectral()))


def balakrishnan_apply_check(u: ComplexField, params: PhysParams, quad: LambdaQuadrature | None = None) -> float:
    """Relative L2 gap between the resolvent assembly and the direct ``|k|^(2s)`` multiplier."""
    g = u.grid
    approx = balakrishnan_apply(u, params, quad).spectral()
    direct = symbol_power(g, 2 * params.s) * u.spectral()
    ref = math.sqrt(spectral_l2_squared(g, direct))
    err = math.sqrt(spectral_l2_squared(g, approx - direct))
    return err if ref == 0 else err / ref


# -- virial machinery -----------------------------------------------------------

def virial_bracket(u: ComplexField, weight: MorawetzWeight) -> float:
    """``M_phi = 2 Im int conj(u) grad u . grad phi``."""
    vals = u.physical()
    acc = 0.0
    for gj, pj in zip(gradient(u), weight.grad):
        acc += float(np.sum(np.imag(np.conj(vals) * gj) * pj))
    return 2.0 * acc * u.grid.cell_volume


def nonlinear_virial_coefficient(params: PhysParams) -> float:
    # -2(p-1)/(p+1) focusing, +2(p-1)/(p+1) defocusing
    c = 2.0 * (params.p - 1.0) / (params.p + 1.0)
    return -c if params.focusing else c


def _nonlinear_virial(u: ComplexField, weight: MorawetzWeight, params: PhysParams) -> float:
    return nonlinear_virial_coefficient(params) * potential_integral(u, params.p, weight.lap)


def _hessian_integral(grid: Grid, weight: MorawetzWeight, grads: np.ndarray, dens: np.ndarray) -> float:
    hess = np.ascontiguousarray(weight.hess.reshape(grid.d, grid.d, -1))
    form = _kernels.hessian_form(hess, grads)
    return grid.integrate(4.0 * form - weight.bilap.ravel() * dens)


def classical_virial_rhs(u: ComplexField, weight: MorawetzWeight, params: PhysParams) -> float:
    """Local-operator virial rate for ``s = 1``."""
    g = u.grid
    grads = np.stack([gj.ravel() for gj in gradient(u)])
    vals = u.physical().ravel()
    lin = _hessian_integral(g, weight, grads, vals.real ** 2 + vals.imag ** 2)
    return lin + _nonlinear_virial(u, weight, params)


def _zero_mode_correction(u: ComplexField, weight: MorawetzWeight, params: PhysParams) -> float:
    # u = c + v with c the box mean: the resolvent sum below sees only v and the
    # cross term i<u,[L,A]u> between c and v equals 2 Re(c int Delta(phi) conj(L v)).
    g = u.grid
    uhat = u.spectral()
    c = uhat[(0,) * g.d] / g.size
    if c == 0:
        return 0.0
    lv = ifftn(symbol_power(g, 2 * params.s) * uhat)
    return 2.0 * float(np.real(c * np.sum(weight.lap * np.conj(lv)))) * g.cell_volume


def virial_rhs(
    u: ComplexField,
    weight: MorawetzWeight,
    params: PhysParams,
    quad: LambdaQuadrature | None = None,
) -> float:
    """Predicted ``dM_phi/dt``.

    ``sum_i w_i lam_i^s int (4 Hess(phi) : Re(grad u_lam (x) grad u_lam) - Delta^2 phi |u_lam|^2)``
    plus the sign-dependent potential term.  At ``s = 1`` the local formula
    is used directly.  On the torus the box mean of ``u`` is removed before
    forming ``u_lam`` (otherwise the small-``lam`` end diverges) and its exact
    contribution is added back separately.
    """
    g = u.grid
    if params.s == 1.0:
        return classical_virial_rhs(u, weight, params)
    quad = quad or default_quadrature(g, params)
    d = g.d
    uhat = np.array(u.spectral())
    uhat[(0,) * d] = 0.0
    sqc = math.sqrt(params.c_s)
    npts = g.size
    acc_h = np.zeros((d, d, npts))
    acc_u = np.zeros(npts)
    grads = np.empty((d, npts), dtype=np.complex128)
    kk = g.kvec_odd
    for lam, w in zip(quad.nodes, quad.weights):
        lhat = (sqc / (g.k2 + lam)) * uhat
        for j in range(d):
            grads[j] = ifftn(1j * kk[j] * lhat).ravel()
        ulam = ifftn(lhat).ravel()
        _kernels.accumulate_virial_density(acc_h, acc_u, grads, ulam, float(w * lam ** params.s))
    hess = weight.hess.reshape(d, d, -1)
    form = np.zeros(npts)
    for j in range(d):
        form += hess[j, j] * acc_h[j, j]
        for k in range(j + 1, d):
            form += 2.0 * hess[j, k] * acc_h[j, k]
    lin = g.integrate(4.0 * form - weight.bilap.ravel() * acc_u)
    return lin + _zero_mode_correction(u, weight, params) + _nonlinear_virial(u, weight, params)


def commutator_rate_direct(u: ComplexField, weight: MorawetzWeight, params: PhysParams) -> float:
    """``i <u, [(-Delta)^s, A] u>`` with ``A = -i(grad phi . grad + grad . grad phi)``, all spectral.

    Independent of the resolvent integral; used to cross-check :func:`virial_rhs`.
    """
    g = u.grid

    def apply_a(f: np.ndarray) -> np.ndarray:
        fhat = fftn(f)
        gr = gradient_spectral(g, fhat)
        flux = [weight.grad[j] * f for j in range(g.d)]
        div = sum(ifftn(1j * g.kvec_odd[j] * fftn(flux[j])) for j in range(g.d))
        return -1j * (sum(weight.grad[j] * gr[j] for j in range(g.d)) + div)

    vals = u.physical()
    lu = ifftn(symbol_power(g, 2 * params.s) * u.spectral())
    term = np.vdot(lu, apply_a(vals)) - np.vdot(vals, apply_a(lu))
    lin = float(np.real(1j * term)) * g.cell_volume
    return lin + _nonlinear_virial(u, weight, params)


def virial_fd_consistency(t: np.ndarray, m_phi: np.ndarray, rhs: np.ndarray) -> tuple[float, np.ndarray]:
    """Centered-difference ``dM_phi/dt`` against the predicted rate.

    Only interior records with a finite ``rhs`` are compared.  Returns the
    error ``max |fd - rhs| / max |rhs|`` over those records and the mask used.
    """
    t, m_phi, rhs = map(np.asarray, (t, m_phi, rhs))
    if t.size < 3:
        raise DiagnosticError("need at least three records for a centered difference")
    fd = np.full_like(m_phi, np.nan)
    fd[1:-1] = (m_phi[2:] - m_phi[:-2]) / (t[2:] - t[:-2])
    mask = np.isfinite(fd) & np.isfinite(rhs)
    if not mask.any():
        raise DiagnosticError("no interior records carry a predicted rate")
    scale = float(np.max(np.abs(rhs[mask])))
    err = float(np.max(np.abs(fd[mask] - rhs[mask])))
    return (err / scale if scale > 0 else err), mask


# -- concentration, Morawetz, coercivity ------------------------------------------

def mass_concentration(u: ComplexField, R: float) -> float:
    """``int_{|x| <= R} |u|^2`` with a sharp indicator."""
    vals = u.physical()
    g = u.grid
    return g.integrate((vals.real ** 2 + vals.imag ** 2) * (g.r <= R))


def localized_potential(u: ComplexField, R: float, p: float) -> float:
    """``int_{|x| <= R/2} |u|^(p+1)``."""
    return potential_integral(u, p, u.grid.r <= 0.5 * R)


def morawetz_time_average(series, R: float, t1: float, t2: float) -> float:
    """``(1/|t2 - t1|) int_{t1}^{t2} int_{|x|<=R/2} |u|^(p+1) dx dt`` from recorded values."""
    if R not in series.local_potential:
        raise DiagnosticError(f"no localized potential recorded for R={R}")
    t = np.asarray(series.t)
    vals = np.asarray(series.local_potential[R])
    tol = 1e-9 * max(1.0, abs(t[-1]))
    if not (t2 > t1 and t1 >= t[0] - tol and t2 <= t[-1] + tol):
        raise DiagnosticError(f"window [{t1}, {t2}] outside recorded range [{t[0]}, {t[-1]}]")
    sel = (t >= t1 - tol) & (t <= t2 + tol)
    if sel.sum() < 2:
        raise DiagnosticError("window holds fewer than two records")
    return float(np.trapezoid(vals[sel], t[sel])) / (t[sel][-1] - t[sel][0])


def coercivity_functional(u: ComplexField, report, params: PhysParams) -> float:
    """``y = ||u||_{H^s} ||u||_2^((s-s_c)/s_c)`` normalised by the same quantity for ``Q``."""
    s, sc = params.s, params.s_c(u.grid.d)
    if not sc > 0:
        raise DiagnosticError(f"coercivity functional needs s_c > 0 (got {sc:.4g})")
    e = (s - sc) / sc
    num = sobolev_seminorm(u, s) * lebesgue_norm(u, 2) ** e
    den = report.hs * math.sqrt(report.mass) ** e
    return num / den


# -- decay scans -------------------------------------------------------------

def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float)))
    return float(np.polyfit(lx, ly, 1)[0])


def commutator_value(u: ComplexField, params: PhysParams, quad: LambdaQuadrature, R: float) -> float:
    """``|int lam^s dlam int chi_R Delta(chi_R) |u_lam|^2 dx|`` (box mean removed)."""
    g = u.grid
    chi, lap = radial_cutoff(g, R)
    dens_w = (chi * lap).ravel()
    uhat = np.array(u.spectral())
    uhat[(0,) * g.d] = 0.0
    acc = np.zeros(g.size)
    sqc = math.sqrt(params.c_s)
    for lam, w in zip(quad.nodes, quad.weights):
        ulam = ifftn((sqc / (g.k2 + lam)) * uhat).ravel()
        acc += (w * lam ** params.s) * (ulam.real ** 2 + ulam.imag ** 2)
    return abs(g.integrate(dens_w * acc))


def commutator_decay_scan(
    u: ComplexField,
    params: PhysParams,
    quad: LambdaQuadrature | None,
    radii: Sequence[float],
) -> tuple[float, np.ndarray]:
    """Fitted log-log slope of the cutoff commutator quantity over ``radii``, plus the values."""
    radii = [float(r) for r in radii]
    if len(radii) < 3:
        raise DiagnosticError("at least three radii are required for a decay fit")
    g = u.grid
    if max(radii) > g.l:
        raise DiagnosticError(f"radius {max(radii)} exceeds the box half-width {g.l}")
    quad = quad or default_quadrature(g, params)
    vals = np.array([commutator_value(u, params, quad, R) for R in radii])
    return loglog_slope(radii, vals), vals


def dispersive_decay_fit(
    u0: ComplexField,
    params: PhysParams,
    r: float,
    times: Sequence[float],
    t_wrap: float | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Fit ``alpha`` in ``||e^{-it(-Delta)^s} u0||_{L^r} ~ t^-alpha`` over ``times`` before ``t_wrap``.

    The default horizon is half the crossing time at the ``1e-8`` bandwidth:
    data spreading both ways meets its own periodic image after roughly
    ``l / speed``, and pointwise norms of decayed fields are sensitive to
    even tiny wrapped amplitudes.  Returns ``(alpha, times_used, norms)``.
    """
    if not r >= 2:
        raise DiagnosticError("decay fits need a Lebesgue exponent of at least 2")
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(times <= 0) or np.any(np.diff(times) <= 0)):
        raise DiagnosticError("times must be positive and strictly increasing")
    horizon = 0.5 * wrap_time(u0, params, tail=1e-8) if t_wrap is None else t_wrap
    used = times[times < horizon]
    if used.size < 3:
        raise DiagnosticError(f"only {used.size} sample times precede t_wrap={horizon:.3g}")
    g = u0.grid
    u0hat = u0.spectral()
    norms = np.array(
        [lebesgue_norm(ComplexField(g, ifftn(u0hat * linear_flow_symbol(g, t, params))), r) for t in used]
    )
    return -loglog_slope(used, norms), used, norms
