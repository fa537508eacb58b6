import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from fnls_lab.grid import ComplexField, PhysParams, make_grid
from fnls_lab.groundstate import (
    GroundStateError,
    classify_initial_data,
    elliptic_residual,
    gn_constant,
    gn_functional,
    petviashvili_solve,
    pohozaev_soliton_check,
    report_from_field,
    symmetrize,
)
from fnls_lab.spectral import sobolev_seminorm


def _shooting_mass_3d() -> float:
    """Mass of the positive radial solution of Q'' + (2/r) Q' - Q + Q^3 = 0 by bisection on Q(0)."""

    def rhs(r, y):
        q, dq = y
        return [dq, -2 * dq / r + q - q ** 3]

    def overshoots(q0):
        r0 = 1e-6
        y0 = [q0 + (q0 - q0 ** 3) * r0 ** 2 / 6, (q0 - q0 ** 3) * r0 / 3]
        ev = lambda r, y: y[0]
        ev.terminal = True
        sol = solve_ivp(rhs, (r0, 25), y0, events=ev, rtol=1e-12, atol=1e-14)
        return sol.status == 1  # crossed zero

    lo, hi = 3.0, 6.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if overshoots(mid):
            hi = mid
        else:
            lo = mid
    q0 = lo
    r0 = 1e-6
    y0 = [q0 + (q0 - q0 ** 3) * r0 ** 2 / 6, (q0 - q0 ** 3) * r0 / 3, 0.0]

    def rhs_m(r, y):
        q, dq, _ = y
        return [dq, -2 * dq / r + q - q ** 3, 4 * math.pi * r * r * q * q]

    # the shooting solution departs from the decaying branch eventually; stop before it does
    sol = solve_ivp(rhs_m, (r0, 9.0), y0, rtol=1e-12, atol=1e-14, dense_output=True)
    return float(sol.y[2, -1])


class TestSech:
    def test_profile(self, gs_1d, grid_1d):
        x = grid_1d.coords[0]
        assert np.max(np.abs(gs_1d.q.physical().real - math.sqrt(2) / np.cosh(x))) <= 1e-6

    def test_norms(self, gs_1d):
        assert gs_1d.mass == pytest.approx(4.0, abs=1e-5)
        assert gs_1d.hs ** 2 == pytest.approx(4 / 3, abs=1e-5)
        assert gs_1d.lp1 ** 4 == pytest.approx(16 / 3, abs=1e-5)

    def test_residual_below_tol(self, gs_1d):
        assert gs_1d.residual <= 1e-10
        assert elliptic_residual(gs_1d.q, gs_1d.params) <= 1e-10

    def test_gn_constant(self, gs_1d):
        assert gn_constant(gs_1d) == pytest.approx(1 / math.sqrt(3), rel=1e-6)

    def test_json_keys(self, gs_1d):
        rep = gs_1d.to_json_dict()
        assert list(rep) == ["d", "n", "l", "s", "p", "mass", "hs", "lp1", "energy", "gn_const", "residual", "iterations", "tail_mass"]
        json.dumps(rep)


class TestResidual:
    def test_exact_sech(self, sech_soliton, nls_cubic):
        assert elliptic_residual(sech_soliton, nls_cubic) <= 1e-8

    def test_zero(self, grid_1d, nls_cubic):
        assert elliptic_residual(ComplexField(grid_1d, np.zeros(grid_1d.shape)), nls_cubic) == 0.0

    def test_doubled(self, gs_1d):
        assert elliptic_residual(gs_1d.q * 2.0, gs_1d.params) > 1.0


class TestThreeD:
    def test_shooting_oracle(self):
        p = PhysParams(1.0, 3.0)
        rep = petviashvili_solve(p, make_grid(3, 80, 8.0), tol=1e-9)
        assert rep.mass == pytest.approx(_shooting_mass_3d(), rel=1e-3)

    def test_nehari(self, gs_3d):
        lhs = gs_3d.hs ** 2 + gs_3d.mass
        assert lhs == pytest.approx(gs_3d.lp1 ** 4, rel=1e-4)

    def test_positive_interior(self, gs_3d):
        q = gs_3d.q.physical().real
        assert np.all(q > -1e-10)
        assert np.all(q[gs_3d.grid.r < 0.5 * gs_3d.grid.l] > 0)

    def test_energy_equals_mass(self, gs_3d):
        # Nehari + Pohozaev at s=0.9, p=3, d=3 force E[Q] = M[Q]
        assert gs_3d.energy == pytest.approx(gs_3d.mass, rel=1e-2)

    def test_pohozaev_fractional(self, gs_3d, frac_params):
        assert pohozaev_soliton_check(gs_3d, frac_params) <= 1e-2

    def test_pohozaev_monotone_in_perturbation(self, gs_3d, frac_params):
        g = gs_3d.grid
        bump = np.exp(-(g.r ** 2)) * np.cos(g.r)
        gaps = []
        for eps in (0.0, 0.02, 0.05, 0.1, 0.2):
            q = ComplexField(g, gs_3d.q.physical().real + eps * bump)
            gaps.append(pohozaev_soliton_check(report_from_field(q, frac_params), frac_params))
        assert all(b > a for a, b in zip(gaps, gaps[1:]))

    def test_regime_flag(self, gs_3d):
        assert gs_3d.in_regime


class TestGN:
    def test_inequality_on_random_radial_fields(self, gs_3d, frac_params, rng):
        g = gs_3d.grid
        c = gn_constant(gs_3d)
        for _ in range(50):
            a = rng.uniform(0.3, 3.0, size=3)
            w = rng.uniform(0.3, 1.5, size=3)
            v = sum(ai * np.exp(-(g.r / wi) ** 2) for ai, wi in zip(a, w))
            assert gn_functional(ComplexField(g, v), frac_params) < c

    def test_homogeneity(self, gs_1d, nls_cubic):
        for mu in (0.5, 3.0):
            rep = report_from_field(gs_1d.q * mu, nls_cubic)
            assert gn_constant(rep) == pytest.approx(gn_constant(gs_1d), rel=1e-12)

    def test_degenerate(self, grid_1d, nls_cubic):
        with pytest.raises(ValueError):
            gn_functional(ComplexField(grid_1d, np.zeros(grid_1d.shape)), nls_cubic)


class TestClassification:
    def test_ground_state_on_boundary(self, gs_3d, frac_params):
        rep = classify_initial_data(gs_3d.q, gs_3d, frac_params)
        assert rep.energy_ratio == pytest.approx(1.0, rel=1e-10)
        assert rep.kinetic_ratio == pytest.approx(1.0, rel=1e-10)
        assert rep.classification == "above-threshold"

    def test_below(self, gs_3d, frac_params):
        rep = classify_initial_data(gs_3d.q * 0.8, gs_3d, frac_params)
        assert rep.kinetic_ratio == pytest.approx(0.8 ** 0.9, rel=1e-12)
        assert rep.energy_ratio < 1
        assert rep.classification == "scatter-candidate"

    def test_above(self, gs_3d, frac_params):
        rep = classify_initial_data(gs_3d.q * 1.2, gs_3d, frac_params)
        assert rep.kinetic_ratio == pytest.approx(1.2 ** 0.9, rel=1e-12)
        assert rep.energy_ratio < 1
        assert rep.classification == "blowup-candidate"

    def test_negative_energy(self, gs_3d, frac_params):
        rep = classify_initial_data(gs_3d.q * 2.0, gs_3d, frac_params)
        assert rep.classification == "negative-energy-blowup"


class TestErrors:
    def test_pohozaev_refuses_outside_regime(self, gs_1d, nls_cubic):
        with pytest.raises(ValueError):
            pohozaev_soliton_check(gs_1d, nls_cubic)

    def test_defocusing(self, grid_1d):
        with pytest.raises(GroundStateError):
            petviashvili_solve(PhysParams(1.0, 3.0, "defocusing"), grid_1d)

    def test_no_convergence(self, grid_1d, nls_cubic):
        with pytest.raises(GroundStateError, match="no convergence"):
            petviashvili_solve(nls_cubic, grid_1d, max_iter=3)

    def test_zero_guess(self, grid_1d, nls_cubic):
        with pytest.raises(GroundStateError):
            petviashvili_solve(nls_cubic, grid_1d, init=ComplexField(grid_1d, np.zeros(grid_1d.shape)))

    def test_symmetrize_is_projection(self, rng):
        a = rng.standard_normal((16, 16, 16))
        once = symmetrize(a)
        assert np.allclose(symmetrize(once), once, atol=1e-14)
        assert np.allclose(once, np.transpose(once, (2, 0, 1)))

    def test_sobolev_of_report_matches(self, gs_1d):
        assert sobolev_seminorm(gs_1d.q, 1.0) == pytest.approx(gs_1d.hs, rel=1e-14)
