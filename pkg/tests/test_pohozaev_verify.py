import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lane_emden_lab.bounded_solver import solve_ball
from lane_emden_lab.common import ValidationError, sphere_area
from lane_emden_lab.greens_ball import BallDomain, green_grad, regular_part_grad
from lane_emden_lab.pohozaev_verify import (bubble_sampler, default_order, flux_constancy,
                                            pohozaev_convergence, pohozaev_residual,
                                            radial_sampler, sphere_rule)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_sphere_rule_low_moments(n):
    quad = sphere_rule(n, np.zeros(n), 1.0)
    area = sphere_area(n)
    assert quad.integrate(np.ones(len(quad.weights))) == pytest.approx(area, rel=1e-13)
    x = quad.nodes
    for i in range(n):
        assert abs(quad.integrate(x[:, i])) < 1e-13
        for j in range(n):
            exact = area / n if i == j else 0.0
            assert abs(quad.integrate(x[:, i] * x[:, j]) - exact) <= 1e-12


@settings(max_examples=20)
@given(st.integers(2, 5), st.floats(0.1, 3.0), st.lists(st.floats(-2, 2), min_size=5, max_size=5))
def test_sphere_rule_area_scales(n, radius, c):
    quad = sphere_rule(n, c[:n], radius)
    assert np.allclose(np.linalg.norm(quad.nodes - c[:n], axis=1), radius)
    assert quad.weights.sum() == pytest.approx(sphere_area(n) * radius ** (n - 1), rel=1e-12)


def test_sphere_rule_rejects_bad_input():
    with pytest.raises(ValidationError):
        sphere_rule(3, [0, 0], 1.0)
    with pytest.raises(ValidationError):
        sphere_rule(3, [0, 0, 0], -1.0)
    with pytest.raises(ValidationError):
        sphere_rule(1, [0], 1.0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_bubble_identity(n):
    f, g = bubble_sampler(n)
    p = q = (n + 2) / (n - 2)
    for center, R in ((np.zeros(n), 1.0), (np.r_[0.3, np.zeros(n - 1)], 0.5)):
        quad = sphere_rule(n, center, R)
        for j in range(n):
            res = pohozaev_residual(f, g, quad, j, p, q)
            assert res.relative < 1e-10


def test_centered_radial_pair_gives_zero_terms():
    f, g = bubble_sampler(3)
    res = pohozaev_residual(f, g, sphere_rule(3, np.zeros(3), 1.0), 0, 5.0, 5.0)
    assert abs(res.L) < 1e-14 and abs(res.R) < 1e-14


def test_convergence_with_order():
    f, g = bubble_sampler(3)
    rows = pohozaev_convergence(f, g, 3, [0.3, 0, 0], 0.5, 0, 5.0, 5.0, orders=(2, 4, 8, 16))
    errs = [r[2] for r in rows]
    assert errs[-1] < 1e-12
    assert errs[1] < errs[0]


def test_solver_solution_satisfies_identity():
    sol = solve_ball(3, 4.0, 0.05)
    u, v = radial_sampler(sol.grid, sol.u, sol.du, sol.v, sol.dv, 3, sol.p, sol.q)
    quad = sphere_rule(3, [0.2, 0.1, 0.0], 0.5)
    for j in range(3):
        assert pohozaev_residual(u, v, quad, j, sol.p, sol.q).relative < 1e-5
    with pytest.raises(ValidationError):
        pohozaev_residual(u, v, sphere_rule(3, [0.5, 0, 0], 0.8), 0, sol.p, sol.q)


def test_sampler_errors_are_validation_errors():
    bad = lambda x: (np.zeros(len(x)), np.zeros((len(x), 2)))
    quad = sphere_rule(3, np.zeros(3), 1.0)
    with pytest.raises(ValidationError):
        pohozaev_residual(bad, bad, quad, 0, 2.0, 2.0)
    f, g = bubble_sampler(3)
    with pytest.raises(ValidationError):
        pohozaev_residual(f, g, quad, 3, 5.0, 5.0)


def _green_sampler(y, dom):
    def G(x):
        return np.zeros(len(x)), np.array([green_grad(xi, y, dom) for xi in x])
    return G


def _regular_sampler(y, dom):
    def H(x):
        return np.zeros(len(x)), np.array([regular_part_grad(xi, y, dom) for xi in x])
    return H


def test_flux_constant_for_harmonic_pair():
    dom = BallDomain(3)
    y = np.array([0.2, -0.1, 0.3])
    H = _regular_sampler(y, dom)
    rep = flux_constancy(H, H, 3, np.zeros(3), [0.2, 0.5, 0.8], 0, order=16)
    assert rep.spread <= max(10 * rep.quad_error, 1e-12 * max(1, np.max(np.abs(rep.values))))


def test_flux_about_singularity():
    dom = BallDomain(3)
    y = np.array([0.2, -0.1, 0.3])
    G = _green_sampler(y, dom)
    rep = flux_constancy(G, G, 3, y, [0.05, 0.1, 0.2], 1, order=16, singular_point=y)
    scale = max(1.0, np.max(np.abs(rep.values)))
    assert rep.spread <= max(10 * rep.quad_error, 1e-10 * scale)
    single = flux_constancy(G, G, 3, y, [0.1], 1, order=8, singular_point=y)
    assert single.spread == 0.0


def test_flux_rejects_straddling_radii():
    dom = BallDomain(3)
    y = np.array([0.3, 0.0, 0.0])
    G = _green_sampler(y, dom)
    with pytest.raises(ValidationError):
        flux_constancy(G, G, 3, np.zeros(3), [0.1, 0.5], 0, singular_point=y)
    with pytest.raises(ValidationError):
        flux_constancy(G, G, 3, np.zeros(3), [0.3], 0, singular_point=y)
    with pytest.raises(ValidationError):
        flux_constancy(G, G, 3, np.zeros(3), [], 0)


def test_default_order_table():
    assert default_order(3) == 16 and default_order(9) == 6
    assert math.isfinite(sphere_rule(7, np.zeros(7), 1.0).weights.sum())
