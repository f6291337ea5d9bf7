import numpy as np
import pytest

from lane_emden_lab.bounded_solver import (diagnostics, energy_identity_constant, far_field_check,
                                           limit_constant, rescale_check, scalar_shooting_oracle,
                                           shooting_oracle, solve_ball)
from lane_emden_lab.common import ConvergenceError, ValidationError
from lane_emden_lab.greens_ball import BallDomain


def test_symmetric_case_matches_scalar_oracle():
    # n = 3, p = 2, eps = 1/3 gives q = 2, so u = v solves -Δw = w^2
    sol = solve_ball(3, 2.0, 1 / 3)
    assert sol.q == pytest.approx(2.0, rel=1e-12)
    w = scalar_shooting_oracle(3, 2.0)
    r = np.linspace(0, 0.99, 50)
    u, v, _, _ = sol.sample(r)
    assert np.max(np.abs(u - w(r))) <= 1e-6 * w(0.0)
    assert np.max(np.abs(u - v)) <= 1e-6 * w(0.0)


def test_asymmetric_case_matches_shooting():
    sol = solve_ball(3, 4.0, 0.05)
    u0, v0, prof = shooting_oracle(3, 4.0, sol.q)
    assert sol.u_max == pytest.approx(u0, rel=1e-5)
    assert sol.v_max == pytest.approx(v0, rel=1e-5)
    r = np.linspace(0.0, 0.95, 20)
    u, v, _, _ = sol.sample(r)
    pu, pv = prof(r)
    assert np.allclose(u, pu, rtol=1e-4, atol=1e-6 * u0)


def test_solution_structure():
    dom = BallDomain(3, center=[0.2, 0.0, 0.0], radius=0.7)
    sol = solve_ball(3, 4.0, 0.05, dom)
    assert sol.u[-1] == 0 and sol.v[-1] == 0
    assert np.all(sol.u[:-1] > 0) and np.all(sol.v[:-1] > 0)
    assert np.all(np.diff(sol.u) <= 0) and np.all(np.diff(sol.v) <= 0)
    assert sol.grid[-1] == pytest.approx(0.7)
    assert np.allclose(sol.x_max, [0.2, 0, 0])


def test_rejects_bad_input():
    with pytest.raises(ValidationError):
        solve_ball(3, 4.0, 0.0)
    with pytest.raises(ValidationError):
        solve_ball(3, 4.0, 0.2)   # q_eps falls below p
    with pytest.raises(ValidationError):
        solve_ball(3, 4.0, 0.05, BallDomain(4))


def test_ladder_monotone(ladder34, profile34):
    diag = diagnostics(ladder34, profile34.mass)
    assert diag.lambda_increasing
    assert diag.S_decreasing
    assert diag.regime == "p_gt"
    assert np.all(diag.S_eps_seq >= profile34.mass.S)
    assert abs(diag.S_eps_seq[-1] / profile34.mass.S - 1) < 0.05


def test_ladder_rescaling_approaches_profile(ladder34, profile34):
    first = rescale_check(ladder34[0], profile34)
    last = rescale_check(ladder34[-1], profile34)
    assert last["c0_distance"] < first["c0_distance"]
    assert last["c0_distance"] < 0.02
    assert abs(last["max_normalized"] - 1) < 1e-12


def test_far_field(ladder34, profile34):
    ratios = [far_field_check(s, profile34.mass, radii=(0.5,))["v_ratio"][0] for s in ladder34]
    assert np.all(np.diff(ratios) < 0)
    assert abs(ratios[-1] - 1) < 0.1
    ff = far_field_check(ladder34[-1], profile34.mass, radii=(0.3, 0.5, 0.7))
    assert ff["flatness"] < 1e-2
    with pytest.raises(ValidationError):
        far_field_check(ladder34[0], profile34.mass, radii=(1e-3,))


def test_limit_constants(ladder34, profile34):
    dom = BallDomain(3)
    derived = energy_identity_constant(3, 4.0, profile34.mass, dom)
    diag = diagnostics(ladder34, profile34.mass)
    assert diag.limit_estimate == pytest.approx(derived, rel=0.1)
    m = profile34.mass
    lit = limit_constant(3, 4.0, m, dom)
    assert lit == pytest.approx(m.S ** ((1 - 4 * 6.5) / (4 * 7.5)) * m.A_U * m.A_V * dom.cn)
    with pytest.raises(ValidationError):
        energy_identity_constant(5, 1.0, m, BallDomain(5))


def test_diagnostics_requires_decreasing(ladder34):
    with pytest.raises(ValidationError):
        diagnostics(ladder34[::-1])
