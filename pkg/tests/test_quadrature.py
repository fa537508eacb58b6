import math

import numpy as np
import pytest

from fnls_lab.grid import make_grid
from fnls_lab.quadrature import (
    beta_integral_closed_form,
    build_lambda_quadrature,
    default_lambda_scale,
)
from scipy.integrate import quad as scipy_quad


def _beta_test(q, s, a):
    return q.integrate(lambda lam: lam ** s / (a + lam) ** 2)


def test_closed_form_matches_scipy():
    # adaptive quadrature as an independent check of the Beta-function value
    for s, a in [(0.3, 1.0), (0.75, 4.0), (0.9, 0.01)]:
        val, _ = scipy_quad(lambda lam: lam ** s / (a + lam) ** 2, 0, np.inf, limit=400, epsabs=0, epsrel=1e-12)
        assert beta_integral_closed_form(s, a) == pytest.approx(val, rel=1e-9)


def test_half_order_unit_scale():
    q = build_lambda_quadrature(0.5, 64)
    assert _beta_test(q, 0.5, 1.0) == pytest.approx(math.pi / 2, rel=1e-8)


def test_shifted_scale():
    q = build_lambda_quadrature(0.75, 64)
    expect = 4 ** -0.25 * 0.75 * math.pi / math.sin(0.75 * math.pi)
    assert _beta_test(q, 0.75, 4.0) == pytest.approx(expect, rel=1e-8)


@pytest.mark.parametrize("s", [0.3, 0.6, 0.9])
def test_refinement_monotone(s):
    a = 37.0
    exact = beta_integral_closed_form(s, a)
    errs = [abs(_beta_test(build_lambda_quadrature(s, n), s, a) / exact - 1) for n in (8, 16, 32, 64, 128, 256)]
    # once converged the error is round-off noise (~1e-13) that may wobble upward
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= max(coarse, 1e-11)
    assert errs[-1] < 1e-11


@pytest.mark.parametrize("d,n,l", [(1, 1024, 10 * math.pi), (3, 48, 8.0), (3, 64, 5.0)])
@pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
def test_every_grid_scale(d, n, l, s):
    g = make_grid(d, n, l)
    q = build_lambda_quadrature(s, 200, default_lambda_scale(g))
    scales = np.unique(np.round(g.k2[g.k2 > 0], 12))
    approx = np.array([_beta_test(q, s, a) for a in scales])
    exact = np.array([beta_integral_closed_form(s, a) for a in scales])
    assert np.max(np.abs(approx / exact - 1)) <= 1e-8


def test_nodes_and_weights_positive():
    q = build_lambda_quadrature(0.4, 50, 3.0)
    assert q.count == 50 and np.all(q.nodes > 0) and np.all(q.weights > 0)
    assert np.all(np.diff(q.nodes) > 0)


def test_refined_doubles():
    q = build_lambda_quadrature(0.4, 20, 3.0)
    r = q.refined()
    assert r.count == 40 and r.lam0 == q.lam0 and r.power == q.power


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2, 1.5])
def test_rejects_order(s):
    with pytest.raises(ValueError):
        build_lambda_quadrature(s, 16)


def test_rejects_small_count():
    with pytest.raises(ValueError):
        build_lambda_quadrature(0.5, 7)
