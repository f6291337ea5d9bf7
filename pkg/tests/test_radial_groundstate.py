import math

import numpy as np
import pytest

from lane_emden_lab.common import ValidationError, green_constant, sphere_area
from lane_emden_lab.radial_groundstate import (DecayFit, ExponentPair, ProfilePair, bubble,
                                               compute_mass, critical_pair, fit_decay,
                                               ground_state, integrate_system, normalize_max,
                                               shoot_groundstate)

SQRT3 = math.sqrt(3.0)


def test_exponent_pair_validation():
    with pytest.raises(ValidationError):
        ExponentPair(2, 3.0, 3.0)
    with pytest.raises(ValidationError):
        ExponentPair(3, 0.5, 1.5)


def test_integrate_bubble_trajectory_matches_closed_form():
    tr = integrate_system(ExponentPair(3, 5.0, 5.0), 1.0)
    assert tr.status == "decay"
    r = np.geomspace(1e-2, 50, 200)
    st = tr.state(r)
    assert np.max(np.abs(st[0] / bubble(3, r) - 1)) <= 1e-6
    assert np.max(np.abs(st[2] / bubble(3, r) - 1)) <= 1e-6


def test_shooting_classification_brackets_ground_state():
    ex = ExponentPair(3, 5.0, 5.0)
    hi, lo = integrate_system(ex, 2.0), integrate_system(ex, 0.5)
    assert hi.status != "decay" and lo.status != "decay"
    assert hi.status != lo.status
    assert hi.r_end < 1e3 and lo.r_end < 1e3


def test_classification_monotone_in_v0():
    ex = ExponentPair(3, 5.0, 5.0)
    labels = [integrate_system(ex, v0).status for v0 in (0.3, 0.6, 0.9, 1.1, 1.5, 3.0)]
    assert labels[:3] == ["undershoot"] * 3
    assert labels[3:] == ["overshoot"] * 3


def test_bubble_shoot_param_and_decay(bubble3):
    assert abs(bubble3.shoot_param - 1) <= 1e-8
    assert bubble3.tail.regime == "p_gt"
    assert abs(bubble3.tail.a - SQRT3) <= 1e-4
    assert abs(bubble3.tail.b - SQRT3) <= 1e-4


def test_bubble_masses(bubble3):
    m = bubble3.mass
    assert m.A_U == pytest.approx(4 * SQRT3 * math.pi, rel=1e-3)
    assert m.A_U == pytest.approx(m.A_V, rel=1e-8)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_bubble_profile_pointwise(n):
    p = (n + 2) / (n - 2)
    prof = ground_state(n, p)
    r = np.linspace(0, 50, 4001)
    assert np.max(np.abs(prof.U(r) / bubble(n, r) - 1)) <= 1e-6
    assert np.max(np.abs(prof.V(r) / bubble(n, r) - 1)) <= 1e-6


def test_profile_invariants(profile34):
    assert profile34.u_vals[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(profile34.grid) > 0)
    assert np.all(np.diff(profile34.u_vals) < 0) and np.all(np.diff(profile34.v_vals) < 0)
    # power-law decay: r^{n-2} U stays bounded, so U(10^3) is of order 10^-3
    assert profile34.u_vals[-1] < 1e-2 and profile34.v_vals[-1] < 1e-2


def test_far_field_constants_match_masses(profile34):
    # V ~ c_n A_U r^{2-n} and U ~ c_n A_V r^{2-n} when both masses are finite
    cn = green_constant(3)
    assert profile34.tail.a == pytest.approx(cn * profile34.mass.A_U, rel=1e-4)
    assert profile34.tail.b == pytest.approx(cn * profile34.mass.A_V, rel=1e-4)


def test_normalized_profile_values(profile34):
    # frozen from an independent run of the shooter with a tighter bisection
    assert max(profile34.U(0.0), profile34.V(0.0)) == pytest.approx(1.0, abs=1e-12)
    assert profile34.V(0.0) == pytest.approx(0.93507, rel=1e-4)
    assert profile34.mass.A_U == pytest.approx(18.12117382, rel=1e-6)
    assert profile34.mass.A_V == pytest.approx(30.24335662, rel=1e-6)
    assert profile34.mass.S == pytest.approx(8.224404967, rel=1e-7)


def test_ode_residual_small(profile34):
    e = profile34.exps
    r = np.geomspace(0.05, 20, 400)
    h = 1e-3 * r
    u = profile34.U
    lap = (u(r + h) - 2 * u(r) + u(r - h)) / h ** 2 + (e.n - 1) / r * (u(r + h) - u(r - h)) / (2 * h)
    rel = np.abs(lap + profile34.V(r) ** e.p) / profile34.V(r) ** e.p
    assert np.max(rel) < 1e-4


def test_tail_window_is_cauchy(profile34):
    t = profile34.tail
    assert t.fit_residual < 1e-3
    assert t.a_spread < 10 * max(t.fit_residual, 1e-6) or t.a_spread < 1e-3


def test_p_lt_regime_and_infinite_mass():
    prof = ground_state(5, 1.0)
    assert prof.exps.q == pytest.approx(9.0)
    assert prof.tail.regime == "p_lt"
    assert not prof.mass.A_V_finite and math.isinf(prof.mass.A_V)
    # -Δ(b r^{-k}) = a^p r^{-k-2} with k = p(n-2)-2 fixes b in terms of a
    k = 1.0
    assert prof.tail.b * k * (5 - 2 - k) == pytest.approx(prof.tail.a, rel=1e-3)


def test_p_eq_regime_uses_log_model():
    prof = ground_state(3, 3.0)
    assert prof.tail.regime == "p_eq"
    assert prof.tail.a > 0 and prof.tail.b > 0
    assert not prof.mass.A_V_finite


def test_synthetic_tail_recovered():
    # planted tails U ~ r^{-1}, V ~ 2 r^{-3} with corrections in the powers the fitter models
    ex = ExponentPair(5, 1.0, 9.0)
    r = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 1201)])
    U = (1 + r ** 2) ** -0.5
    V = 2 * (1 + r ** 4) ** -0.75
    prof = ProfilePair(ex, r, U, V, 2.0)
    fit = fit_decay(prof, ex)
    assert fit.regime == "p_lt"
    assert fit.b == pytest.approx(1.0, rel=1e-3)
    assert fit.a == pytest.approx(2.0, rel=1e-3)


def test_normalize_max_keeps_quotient():
    ex = critical_pair(3, 4.0)
    prof = shoot_groundstate(ex)
    prof.tail = fit_decay(prof, ex)
    prof.mass = compute_mass(prof, ex)
    nm = normalize_max(prof)
    assert nm.mass.S == pytest.approx(prof.mass.S, rel=1e-12)
    assert max(nm.U(0.0), nm.V(0.0)) == pytest.approx(1.0, abs=1e-12)
