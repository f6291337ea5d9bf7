import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lane_emden_lab.common import ValidationError, green_constant
from lane_emden_lab.gtilde_field import SingularQuadConfig, alpha_constants
from lane_emden_lab.halfspace_criterion import (CriterionConfig, continuity_scan, criterion,
                                                htilde0_diagonal, lhs_integral, p1_scaling_check,
                                                rescaled_convergence_probe, rhs_integral,
                                                w0_derivative, w0_value)


@pytest.fixture(scope="module")
def rep51():
    return criterion(5, 1.0)


def test_criterion_holds_at_p1_n5(rep51):
    assert rep51.verdict == "holds"
    assert rep51.branch == "low"
    assert rep51.diff < 0 and rep51.dW0 < 0
    assert abs(rep51.diff) > 3 * rep51.err


def test_boundary_term_closed_form():
    # ∫_{R^4} (1+s^2)^{-e/2} ds = π^2 Γ((e-4)/2) / Γ(e/2); with e = 6, 8 the pieces are
    # π^2 and 10 π^2/6, and the boundary coefficient is c_5/2
    rhs = rhs_integral(5, 1.0)
    assert rhs.first == pytest.approx(math.pi ** 2, rel=1e-13)
    assert rhs.second == pytest.approx(5 * math.pi ** 2 / 3, rel=1e-13)
    assert rhs.Gv == pytest.approx(math.pi ** 2 / 3, rel=1e-13)
    assert rhs.quad_check < 1e-10


def test_volume_form_is_rejected():
    with pytest.raises(ValidationError, match="diverges"):
        rhs_integral(5, 1.0, form="volume")
    assert rhs_integral(5, 1.0).volume_form_divergent


@pytest.mark.parametrize("n,p", [(4, 1.0), (5, 0.9), (5, 5 / 3), (6, 1.5)])
def test_rejects_out_of_range(n, p):
    with pytest.raises(ValidationError):
        criterion(n, p)


def test_reflected_kernel_flips_sign(rep51):
    Fr, _, _ = lhs_integral(5, 1.0, kernel="reflected")
    assert Fr == pytest.approx(-rep51.F, rel=1e-10, abs=1e-15)


def test_lhs_stable_under_truncation(rep51):
    scale = abs(rep51.Gv)
    F_far, _, _ = lhs_integral(5, 1.0, CriterionConfig(R_trunc=800.0))
    F_in, _, _ = lhs_integral(5, 1.0, CriterionConfig(shell_eps=1e-10))
    assert abs(F_far - rep51.F) <= 0.01 * scale
    assert abs(F_in - rep51.F) <= 0.01 * scale


def test_w0_derivative_matches_normalization(rep51):
    w = w0_derivative(5, 1.0)
    cn = green_constant(5)
    assert w.total == pytest.approx(3 * cn ** 2 * rep51.diff, rel=1e-6)
    assert w.total == pytest.approx(rep51.dW0, rel=1e-6)


@pytest.mark.parametrize("n", [5, 6])
def test_p1_scaling_identity(n):
    out = p1_scaling_check(n)
    assert abs(out["ratio"] - 1) <= 0.02
    assert out["scaling_spread"] < 0.01
    h, err, vol, bnd = htilde0_diagonal(n, 1.0)
    assert h == pytest.approx(vol + bnd, rel=1e-14)


def test_w0_positive_in_half_space():
    v, err = w0_value(3.0, 5, 1.0)
    assert v > 10 * err > 0
    with pytest.raises(ValidationError):
        w0_value(0.0, 5, 1.0)


def test_high_branch_runs():
    rep = criterion(5, 1.4)
    assert rep.branch == "high"
    assert np.isfinite(rep.F) and np.isfinite(rep.Gv)
    assert rep.details["coef"] != alpha_constants(5, 1.4).alpha1


def test_continuity_scan():
    out = continuity_scan(5, [1.0, 1.05, 1.1])
    assert out["finite"]
    assert out["interval"] is not None and out["interval"][0] == 1.0
    with pytest.raises(ValidationError):
        continuity_scan(5, [1.0, 1.4])


@settings(max_examples=5, deadline=None)
@given(st.floats(1.0, 1.3))
def test_boundary_term_positive_in_low_branch(p):
    assert rhs_integral(5, p).Gv > 0


def test_rescaled_probe_decreases():
    cfg = SingularQuadConfig(m=6, dm=2, theta_panels=4, phi_panels=4)
    out = rescaled_convergence_probe([0.2, 0.1], 5, 1.0, offsets=(-0.1, 0.1), ball_cfg=cfg)
    assert out["decreasing"]
    assert out["distance"][-1] < out["distance"][0]
