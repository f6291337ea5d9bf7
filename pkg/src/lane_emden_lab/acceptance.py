"""End-to-end acceptance suite shared by the test runner and ``verify-all``.

Each criterion returns a CriterionResult made of named sub-checks.  A
criterion passes only when every sub-check passes and the run fits its time
budget.  Thresholds are fixed here and never relaxed by the quick mode, which
only shrinks sample counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
import time

import numpy as np

__all__ = ["Check", "CriterionResult", "CRITERIA", "run_criterion", "run_all", "format_line"]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    runtime: float = 0.0
    budget: float = math.inf
    values: dict = field(default_factory=dict)

    @property
    def in_budget(self) -> bool:
        return self.runtime <= self.budget

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks) and self.in_budget

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def failures(self) -> list:
        out = [c for c in self.checks if not c.passed]
        if not self.in_budget:
            out.append(Check("runtime", False, f"{self.runtime:.1f} s > {self.budget:.0f} s"))
        return out


def format_line(res: CriterionResult) -> str:
    tag = "PASS" if res.passed else "FAIL"
    line = f"criterion {res.number} {tag}  {res.title}  ({res.runtime:.1f} s of {res.budget:.0f} s)"
    bad = res.failures()
    if bad:
        line += "  failing: " + "; ".join(f"{c.name} [{c.detail}]" for c in bad)
    return line


# -- criteria ----------------------------------------------------------------------------

def _bubble_oracle(res, quick):
    from .radial_groundstate import ground_state
    prof = ground_state(3, 5.0)
    r = np.linspace(0.0, 50.0, 5001)
    exact = (1 + r * r / 3) ** -0.5
    err_u = float(np.max(np.abs(prof.U(r) / exact - 1)))
    err_v = float(np.max(np.abs(prof.V(r) / exact - 1)))
    res.add("U relerr on [0,50] <= 1e-6", err_u <= 1e-6, f"{err_u:.2e}")
    res.add("V relerr on [0,50] <= 1e-6", err_v <= 1e-6, f"{err_v:.2e}")
    res.add("shoot_param = 1 +- 1e-8", abs(prof.shoot_param - 1) <= 1e-8, f"{prof.shoot_param:.12f}")
    s3 = math.sqrt(3)
    res.add("decay a = sqrt(3) +- 1e-4", abs(prof.tail.a - s3) <= 1e-4, f"{prof.tail.a:.8f}")
    res.add("decay b = sqrt(3) +- 1e-4", abs(prof.tail.b - s3) <= 1e-4, f"{prof.tail.b:.8f}")
    AU = 4 * s3 * math.pi
    rel = abs(prof.mass.A_U / AU - 1)
    res.add("A_U = 4 sqrt(3) pi within 0.1%", rel <= 1e-3, f"{prof.mass.A_U:.6f}, rel {rel:.1e}")
    res.values.update(A_U=prof.mass.A_U, a=prof.tail.a, b=prof.tail.b, relerr_U=err_u)


def _green_machinery(res, quick):
    from .greens_ball import (BallDomain, fd_laplacian, green_fn, regular_part, reflected_point,
                              robin_lower_bound_check, verify_boundary_asymptotics)
    dom = BallDomain(3)
    n, cn = 3, dom.cn
    rng = np.random.default_rng(11)

    def interior(k, rmax=0.95):
        z = rng.normal(size=(k, n))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return z * rmax * rng.uniform(0, 1, size=(k, 1)) ** (1 / n)

    X, Y = interior(200), interior(200)
    gxy, gyx = green_fn(X, Y, dom), green_fn(Y, X, dom)
    sym = float(np.max(np.abs(gxy - gyx) / np.abs(gxy)))
    res.add("symmetry G(x,y) = G(y,x) to 1e-12", sym <= 1e-12, f"{sym:.1e}")
    mono = bool(np.all(gxy < cn * np.linalg.norm(X - Y, axis=1) ** (2 - n)) and np.all(gxy > 0))
    res.add("0 < G < c_n |x-y|^{2-n}", mono)

    W = rng.normal(size=(200, n))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    on_sphere = float(np.max(np.abs(green_fn(W, Y, dom))))
    res.add("G = 0 on the sphere (<= 1e-10)", on_sphere <= 1e-10, f"{on_sphere:.1e}")
    near = W * (1 - 1e-6)
    g_near = float(np.max(np.abs(green_fn(near, Y, dom))))
    # G vanishes linearly in the distance, so this value is of order c_n 1e-6 / |x-y|^2
    res.add("G <= 1e-10 at distance 1e-6", g_near <= 1e-10, f"{g_near:.2e}")

    lap = 0.0
    for x, y in zip(interior(20, 0.8), interior(20, 0.8)):
        lap = max(lap, abs(fd_laplacian(lambda z: float(regular_part(z, y, dom)), x, 1e-3)))
    res.add("FD Laplacian of H(.,y) <= 1e-4 at h = 1e-3", lap <= 1e-4, f"{lap:.1e}")

    d_grid = np.geomspace(1e-3, 0.1, 20)
    ratios, ok = robin_lower_bound_check(dom, d_grid)
    res.add("n_x.grad_1 H(x,x) >= ((n-2)c_n/2) d^{1-n} on 20 points", ok,
            f"ratio range [{ratios.min():.4f}, {ratios.max():.4f}]")
    rep = verify_boundary_asymptotics(dom, [0.01])
    rg, rh = float(rep.ratio_grad[0]), float(rep.ratio_H[0])
    res.add("gradient asymptotic ratio within 2% at d = 0.01", abs(rg - 1) <= 0.02, f"{rg:.5f}")
    res.add("Robin asymptotic ratio within 2% at d = 0.01", abs(rh - 1) <= 0.02, f"{rh:.5f}")
    res.values.update(lower_bound_ratio_min=float(ratios.min()), ratio_grad=rg, ratio_H=rh,
                      G_near_boundary=g_near)
    fr = reflected_point(np.array([0.9, 0.0, 0.0]), dom)
    res.add("reflected point of (0.9,0,0) is (1.1,0,0)", np.allclose(fr.x_star, [1.1, 0, 0]))


def _gtilde_pde(res, quick):
    from .greens_ball import BallDomain, green_fn
    from .gtilde_field import SingularQuadConfig, gtilde
    dom = BallDomain(5)
    n, p, h = 5, 1.0, 0.02
    cfg = SingularQuadConfig(m=8, dm=2, theta_panels=6, phi_panels=4)
    rng = np.random.default_rng(7)

    def point():
        while True:
            z = rng.uniform(-0.6, 0.6, n)
            if np.linalg.norm(z) < 0.6:
                return z

    worst = 0.0
    npairs = 1 if quick else 5
    ok = True
    for _ in range(npairs):
        while True:
            x, y = point(), point()
            if np.linalg.norm(x - y) > 0.3:
                break
        c = gtilde(x, y, dom, p, cfg)
        lap, qerr = -2 * n * c.value, c.quad_error
        for j in range(n):
            for s in (1, -1):
                e = np.zeros(n)
                e[j] = s * h
                ev = gtilde(x + e, y, dom, p, cfg)
                lap += ev.value
                qerr = max(qerr, ev.quad_error)
        lap /= h * h
        target = -float(green_fn(x, y, dom)) ** p
        dist = float(np.linalg.norm(x - y))
        # value noise through the stencil plus an h^2 |G|/|x-y|^2 truncation allowance
        tol = 4 * n * qerr / h ** 2 + h * h * abs(target) / dist ** 2
        miss = abs(lap - target)
        ok &= miss <= 5 * tol
        worst = max(worst, miss / (5 * tol))
    res.add(f"FD Laplacian of G~ = -G^p within combined tolerance ({npairs} pairs)", ok,
            f"worst miss / tolerance = {worst:.3f}")

    y = np.array([0.1, -0.2, 0.0, 0.1, 0.0])
    x = dom.point_on_ray(1e-3)
    ev = gtilde(x, y, dom, p, cfg)
    res.add("G~ <= 10 x quad_error at d = 1e-3", ev.value <= 10 * ev.quad_error,
            f"value {ev.value:.2e}, quad_error {ev.quad_error:.1e}")
    res.values.update(boundary_value=ev.value, boundary_quad_error=ev.quad_error, fd_worst=worst)


def _boundary_growth(res, quick):
    from .greens_ball import BallDomain
    from .gtilde_field import boundary_growth_scan
    rep = boundary_growth_scan(BallDomain(5), 1.0, [0.1, 0.05, 0.025, 0.0125])
    res.add("log-log slope = -2 +- 0.1", abs(rep.slope_direct + 2) <= 0.1, f"{rep.slope_direct:.5f}")
    res.add("positive normal derivative", rep.positive)
    gap = float(np.max(rep.route_gap))
    res.add("direct and diagonal routes within 3%", gap <= 0.03, f"{gap:.1e}")
    res.values.update(slope=rep.slope_direct, slope_diagonal=rep.slope_diagonal)


def _halfspace_p1(res, quick):
    from .halfspace_criterion import criterion, p1_scaling_check
    rep = criterion(5, 1.0)
    res.add("verdict holds", rep.verdict == "holds", f"F - Gv = {rep.diff:.6g} +- {rep.err:.1e}")
    res.add("d/dx_n W0(e_n) < 0", rep.dW0 < 0, f"{rep.dW0:.8g}")
    chk = p1_scaling_check(5)
    res.add("dual routes within 2%", abs(chk["ratio"] - 1) <= 0.02, f"ratio {chk['ratio']:.8f}")
    res.add("t^{4-n} scaling constant within 1%", chk["scaling_spread"] <= 0.01,
            f"spread {chk['scaling_spread']:.1e}")
    res.values.update(dW0=rep.dW0, ratio=chk["ratio"], F=rep.F, Gv=rep.Gv)


def _sweep(res, quick):
    from .halfspace_criterion import continuity_scan
    coarse = continuity_scan(5, np.round(np.arange(1.0, 1.3 + 1e-9, 0.05), 10))
    res.add("F, Gv finite on [1, 1.3]", coarse["finite"])
    fine = continuity_scan(5, np.round(np.arange(1.0, 1.3 + 1e-9, 0.025), 10))
    qc = max(coarse["max_quotient_F"], coarse["max_quotient_G"])
    qf = max(fine["max_quotient_F"], fine["max_quotient_G"])
    # bounded quotients: halving the step must not inflate them
    res.add("difference quotients bounded under step halving", fine["finite"] and qf <= 2 * qc,
            f"max quotient {qc:.3f} (step 0.05), {qf:.3f} (step 0.025)")
    iv = coarse["interval"]
    res.add("sign-persistence interval from p = 1 reported", iv is not None, f"{iv}")
    res.values.update(interval=iv, F=coarse["F"].tolist(), Gv=coarse["Gv"].tolist())


def _pohozaev(res, quick):
    from .greens_ball import BallDomain, green_fn, green_grad, regular_part, regular_part_grad
    from .pohozaev_verify import bubble_sampler, flux_constancy, pohozaev_residual, sphere_rule
    u, v = bubble_sampler(3)
    worst = 0.0
    for c, r in (((0.0, 0.0, 0.0), 1.0), ((0.3, 0.0, 0.0), 0.5)):
        quad = sphere_rule(3, c, r)
        for j in range(3):
            worst = max(worst, abs(pohozaev_residual(u, v, quad, j, 5.0, 5.0).residual))
    res.add("bubble residual <= 1e-8 on centered and off-center balls", worst <= 1e-8, f"{worst:.1e}")

    dom = BallDomain(3)
    y = np.array([0.2, -0.1, 0.3])
    H = lambda x: (regular_part(x, y, dom), regular_part_grad(x, y, dom))   # noqa: E731
    G = lambda x: (green_fn(x, y, dom), green_grad(x, y, dom))              # noqa: E731
    for label, A, center, radii, sing in (
            ("H(.,y), r in {0.1,0.2,0.4}", H, np.zeros(3), (0.1, 0.2, 0.4), None),
            ("G(.,y) about y", G, y, (0.05, 0.1, 0.2), y),
            ("G(.,y) outside y", G, np.zeros(3), (0.6, 0.75, 0.9), y)):
        rep = flux_constancy(A, A, 3, center, radii, 0, order=32, singular_point=sing)
        tol = max(10 * rep.quad_error, 1e-12 * max(1.0, float(np.max(np.abs(rep.values)))))
        res.add(f"flux constancy {label}", rep.spread <= tol,
                f"spread {rep.spread:.1e}, tolerance {tol:.1e}")


def _blowup(res, quick):
    from .bounded_solver import (continuation, diagnostics, energy_identity_constant,
                                 far_field_check, limit_constant)
    from .greens_ball import BallDomain
    from .radial_groundstate import ground_state
    n, p = 3, 4.0
    dom = BallDomain(n)
    prof = ground_state(n, p)
    m = prof.mass
    schedule = [0.05 * 2.0 ** -k for k in range(6)]
    sols = continuation(n, p, schedule, dom)
    printed = limit_constant(n, p, m, dom)
    derived = energy_identity_constant(n, p, m, dom)
    diag = diagnostics(sols, m, printed)
    res.add("lambda strictly increasing", diag.lambda_increasing, np.array2string(diag.lambda_seq, precision=4))
    res.add("S_eps decreasing", diag.S_decreasing, np.array2string(diag.S_eps_seq, precision=5))
    gapS = diag.S_eps_seq[-1] / m.S - 1
    res.add("S_eps within 5% of S at the last step", 0 <= gapS <= 0.05,
            f"S_eps {diag.S_eps_seq[-1]:.6f}, S {m.S:.6f}")
    ff = far_field_check(sols[-1], m, radii=(0.5,))
    vr = float(ff["v_ratio"][0])
    res.add("far-field v-ratio within 15% at |x| = 0.5", abs(vr - 1) <= 0.15, f"{vr:.5f}")
    lim = diag.limit_seq
    var = abs(lim[-1] / lim[-2] - 1)
    res.add("limit quantity varies < 20% over the last two steps", var < 0.2,
            f"{lim[-2]:.5f} -> {lim[-1]:.5f}")
    ratio = lim[-1] / printed
    res.add("limit quantity within factor 1.5 of S^{(1-pq)/(p(q+1))} A_U A_V H(0,0)",
            1 / 1.5 <= ratio <= 1.5,
            f"quantity {lim[-1]:.5f}, constant {printed:.5f}, ratio {ratio:.4f}; "
            f"energy-identity constant {derived:.5f} gives ratio {lim[-1] / derived:.4f}")
    res.values.update(limit_seq=lim.tolist(), limit_estimate=diag.limit_estimate,
                      printed_constant=printed, energy_identity_constant=derived,
                      v_ratio=vr, lambda_seq=diag.lambda_seq.tolist(), S_eps_seq=diag.S_eps_seq.tolist())


CRITERIA = {
    1: ("bubble oracle", 10.0, _bubble_oracle),
    2: ("Green's function machinery", 5.0, _green_machinery),
    3: ("G~ defining PDE", 120.0, _gtilde_pde),
    4: ("boundary growth on the ball", 600.0, _boundary_growth),
    5: ("half-space criterion at p = 1", 300.0, _halfspace_p1),
    6: ("criterion sweep", math.inf, _sweep),
    7: ("Pohozaev identity and flux constancy", 30.0, _pohozaev),
    8: ("blow-up trends", 1800.0, _blowup),
}


def run_criterion(number: int, quick: bool = False) -> CriterionResult:
    title, budget, fn = CRITERIA[number]
    res = CriterionResult(number, title, budget=budget)
    t0 = time.perf_counter()
    try:
        fn(res, quick)
    except Exception as exc:   # noqa: BLE001 - a crash is a failed criterion, not a suite abort
        res.add("completed without error", False, f"{type(exc).__name__}: {exc}")
    res.runtime = time.perf_counter() - t0
    return res


def run_all(quick: bool = False, only=None, echo=None) -> list:
    out = []
    for k in sorted(CRITERIA):
        if only and k not in only:
            continue
        r = run_criterion(k, quick)
        if echo:
            echo(format_line(r))
        out.append(r)
    return out
