import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lane_emden_lab.common import ValidationError, sphere_area
from lane_emden_lab.greens_ball import (BallDomain, difference_bound_report, fd_laplacian, green_fn,
                                        green_grad, greens, kelvin_image, poisson_bound_report,
                                        poisson_kernel, regular_part, reflected_point, robin,
                                        robin_lower_bound_check, verify_boundary_asymptotics)
from lane_emden_lab.pohozaev_verify import sphere_rule

C3 = 1 / (4 * math.pi)
coords = arrays(np.float64, 3, elements=st.floats(-0.55, 0.55))


def test_green_example_center_source():
    ev = greens(np.array([0.5, 0, 0]), np.zeros(3), BallDomain(3))
    assert ev.G == pytest.approx(C3, rel=1e-14)
    assert ev.c_n == pytest.approx(0.0795775, rel=1e-6)
    assert ev.G == pytest.approx(C3 / 0.5 - ev.H, rel=1e-14)


def test_greens_rejects_bad_points():
    dom = BallDomain(3)
    with pytest.raises(ValidationError):
        greens(np.zeros(3), np.zeros(3), dom)
    with pytest.raises(ValidationError):
        greens(np.array([1.2, 0, 0]), np.zeros(3), dom)


def test_green_vanishes_on_sphere(rng):
    dom = BallDomain(3, center=(0.2, -0.1, 0.3), radius=1.7)
    w = rng.normal(size=(100, 3))
    w = dom.c + 1.7 * w / np.linalg.norm(w, axis=1, keepdims=True)
    y = dom.c + rng.uniform(-0.8, 0.8, size=(100, 3))
    assert np.max(np.abs(green_fn(w, y, dom))) <= 1e-12


def test_green_vanishes_linearly_near_sphere():
    # G(x, 0) = c_3 (1/r - 1) so G / d -> c_3 as d -> 0
    dom = BallDomain(3)
    for d in (1e-3, 1e-6):
        x = np.array([1 - d, 0, 0])
        assert green_fn(x, np.zeros(3), dom) / d == pytest.approx(C3, rel=2 * d)


@settings(max_examples=60)
@given(coords, coords)
def test_green_symmetry_and_domain_monotonicity(x, y):
    if np.linalg.norm(x - y) < 1e-3:
        return
    dom = BallDomain(3)
    g1, g2 = green_fn(x, y, dom), green_fn(y, x, dom)
    assert abs(g1 - g2) <= 1e-12 * abs(g1)
    assert 0 < g1 < C3 / np.linalg.norm(x - y)


def test_regular_part_harmonic(rng):
    dom = BallDomain(4, radius=2.0)
    for _ in range(10):
        x, y = rng.uniform(-0.7, 0.7, (2, 4))
        lap = fd_laplacian(lambda z: float(regular_part(z, y, dom)), x, 1e-3 * dom.radius)
        assert abs(lap) <= 1e-4


def test_green_gradient_matches_differences(rng):
    dom = BallDomain(3)
    x, y = np.array([0.3, 0.2, -0.1]), np.array([-0.4, 0.1, 0.2])
    h = 1e-6
    fd = [(green_fn(x + h * e, y, dom) - green_fn(x - h * e, y, dom)) / (2 * h) for e in np.eye(3)]
    assert np.allclose(green_grad(x, y, dom), fd, rtol=1e-7, atol=1e-9)


def test_robin_at_center():
    dom = BallDomain(3)
    H, g = robin(np.zeros(3), dom)
    assert H == pytest.approx(C3, rel=1e-14)
    assert np.allclose(g, 0, atol=1e-15)
    H5, g5 = robin(np.array([1.0, 2.0, 0.0, 0.0, 0.0]), BallDomain(5, center=(1, 2, 0, 0, 0), radius=3))
    assert np.allclose(g5, 0, atol=1e-15)


def test_robin_gradient_near_boundary():
    dom = BallDomain(3)
    x = np.array([0.95, 0, 0])
    _, g = robin(x, dom)
    assert g[0] == pytest.approx(C3 / 0.01, rel=0.05)
    assert g[0] == pytest.approx(7.9577, rel=0.05)


def test_reflected_point_examples():
    dom = BallDomain(3)
    fr = reflected_point(np.array([0.9, 0, 0]), dom)
    assert fr.d == pytest.approx(0.1)
    assert np.allclose(fr.n_x, [1, 0, 0]) and np.allclose(fr.x_star, [1.1, 0, 0])
    assert np.allclose(reflected_point(np.array([0, 0.5, 0]), dom).x_star, [0, 1.5, 0])
    with pytest.raises(ValidationError):
        reflected_point(np.zeros(3), dom)
    with pytest.raises(ValidationError):
        reflected_point(np.array([1.1, 0, 0]), dom)


def test_kelvin_image_is_distinct_from_reflection():
    dom = BallDomain(3)
    y = np.array([0.5, 0, 0])
    assert np.allclose(kelvin_image(y, dom), [2.0, 0, 0])
    assert np.allclose(reflected_point(y, dom).x_star, [1.5, 0, 0])


@pytest.mark.parametrize("n", [3, 4])
def test_boundary_asymptotics_at_d_001(n):
    rep = verify_boundary_asymptotics(BallDomain(n), [0.2, 0.1, 0.05, 0.01])
    assert abs(rep.ratio_H[-1] - 1) <= 0.02 and abs(rep.ratio_grad[-1] - 1) <= 0.02
    assert np.all(np.diff(np.abs(rep.ratio_H - 1)) < 0)
    assert rep.converges()
    assert np.all(np.isfinite(rep.bound_H)) and np.max(rep.bound_grad) < 10


def test_boundary_asymptotics_rejects_deep_points():
    with pytest.raises(ValidationError):
        verify_boundary_asymptotics(BallDomain(3), [0.5])


def test_normal_derivative_lower_bound_constant():
    # the exact ball value is (n-2) c_n (2d)^{1-n} (1 + O(d)), i.e. 2^{2-n} times the stated coefficient
    for n in (3, 4, 5):
        ratios, holds = robin_lower_bound_check(BallDomain(n), np.geomspace(1e-3, 0.1, 20))
        assert not holds
        assert ratios[0] == pytest.approx(2.0 ** (2 - n), rel=5e-3)
        ok, holds_half = robin_lower_bound_check(BallDomain(n), np.geomspace(1e-3, 0.1, 20),
                                                 coefficient=(n - 2) * BallDomain(n).cn / 2 ** n)
        assert holds_half


def test_poisson_kernel_properties():
    dom = BallDomain(3)
    w = np.array([[1.0, 0, 0], [0, 0, -1.0]])
    assert np.allclose(poisson_kernel(np.zeros(3), w, dom), 1 / (4 * math.pi))
    quad = sphere_rule(3, np.zeros(3), 1.0, 64)
    for x in ([0.3, -0.2, 0.5], [0.0, 0.8, 0.0]):
        assert quad.integrate(poisson_kernel(np.array(x), quad.nodes, dom)) == pytest.approx(1.0, abs=1e-6)
    sup = poisson_bound_report(dom)
    assert sup <= 4
    assert sup <= 2 / sphere_area(3) * 1.0001


def test_difference_function_bound_stable():
    dom = BallDomain(3)
    c1 = difference_bound_report(dom, [0.1, 0.05, 0.02], seed=0)
    c2 = difference_bound_report(dom, [0.01, 0.005, 0.002], seed=1)
    assert np.isfinite(c1) and np.isfinite(c2)
    assert c2 <= 2 * c1
