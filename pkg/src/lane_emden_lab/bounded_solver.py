"""Radial positive solutions of the Lane-Emden system on a ball and blow-up diagnostics.

    -Δu = v^p,  -Δv = u^{q_eps}  in B(0, R),   u = v = 0 on the sphere,

with q_eps slightly below the critical exponent.  The radial two-point problem
is solved by scipy's collocation solver (damped Newton on a residual-adapted
mesh) and followed down an eps ladder by continuation.  An independent shooting
oracle uses the scaling u -> mu^a u(mu r), v -> mu^b v(mu r).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate, optimize

from .common import ConvergenceError, ValidationError, green_constant, q_epsilon, sphere_area
from .greens_ball import BallDomain, green_fn
from .radial_groundstate import MassConstants, ProfilePair

__all__ = [
    "SolverConfig",
    "SystemSolution",
    "BlowupDiagnostics",
    "solve_ball",
    "continuation",
    "shooting_oracle",
    "scalar_shooting_oracle",
    "diagnostics",
    "limit_constant",
    "energy_identity_constant",
    "rescale_check",
    "far_field_check",
]


@dataclass
class SolverConfig:
    tol: float = 1e-7           # collocation residual tolerance (relative; round-off floor is near 1e-8)
    max_nodes: int = 400_000
    initial_nodes: int = 400
    max_substeps: int = 12      # eps halvings allowed between two schedule points
    quad_points: int = 4000


@dataclass
class SystemSolution:
    dom: BallDomain
    n: int
    p: float
    q: float
    eps: float
    grid: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    lam: float
    lam_component: str          # which of u, v attains lambda
    x_max: np.ndarray
    S_eps: float
    residual: float
    sol: object = field(repr=False, default=None)
    normalized: tuple | None = field(repr=False, default=None)   # (s nodes, y, k) of the scaled problem

    def sample(self, r):
        """u, v, u', v' at radii r from the collocation interpolant."""
        r = np.asarray(r, dtype=float)
        y = self.sol(np.clip(r, 0.0, self.dom.radius))
        return y[0], y[2], y[1], y[3]

    @property
    def u_max(self) -> float:
        return float(self.u[0])

    @property
    def v_max(self) -> float:
        return float(self.v[0])


@dataclass
class BlowupDiagnostics:
    eps_schedule: np.ndarray
    q_seq: np.ndarray
    lambda_seq: np.ndarray
    S_eps_seq: np.ndarray
    N_eps: np.ndarray
    d_eps: np.ndarray
    limit_seq: np.ndarray
    limit_estimate: float
    limit_constant: float
    regime: str
    lambda_increasing: bool
    S_decreasing: bool
    lam_components: list
    x_max: list


def _rhs(n, p, q):
    """Normalized system on s in [0, 1]: u'' = -k |v|^{p-1} v, v'' = -k |u|^{q-1} u (plus (n-1)/s terms)."""
    def f(s, y, par):
        u, du, v, dv = y
        k = par[0]
        return np.vstack([du, -k * np.abs(v) ** (p - 1) * v, dv, -k * np.abs(u) ** (q - 1) * u])

    def jac(s, y, par):
        u, du, v, dv = y
        k = par[0]
        m = y.shape[1]
        J = np.zeros((4, 4, m))
        J[0, 1] = 1.0
        J[2, 3] = 1.0
        J[1, 2] = -k * p * np.abs(v) ** (p - 1)
        J[3, 0] = -k * q * np.abs(u) ** (q - 1)
        Jp = np.zeros((4, 1, m))
        Jp[1, 0] = -np.abs(v) ** (p - 1) * v
        Jp[3, 0] = -np.abs(u) ** (q - 1) * u
        return J, Jp
    return f, jac


def _singular(n):
    S = np.zeros((4, 4))
    S[1, 1] = -(n - 1)
    S[3, 3] = -(n - 1)
    return S


def _bc(ya, yb, par):
    return np.array([ya[1], ya[3], ya[0] - 1.0, yb[0], yb[2]])


def _initial_guess(n, p, q, s):
    """One-mode Galerkin guess u = phi, v = b phi, phi = cos(pi s / 2), and the parameter k.

    Projecting on phi gives lam = k kp b^p and lam b = k kq, with lam the Rayleigh
    quotient of phi and k_t = ∫phi^{t+1} / ∫phi^2 (radial weights).
    """
    w = 0.5 * math.pi
    t = np.linspace(0.0, 1.0, 2001)
    phi_t = np.cos(w * t)
    wt = t ** (n - 1)
    m2 = integrate.simpson(wt * phi_t ** 2, x=t)
    lam = integrate.simpson(wt * (w * np.sin(w * t)) ** 2, x=t) / m2
    kp = integrate.simpson(wt * phi_t ** (p + 1), x=t) / m2
    kq = integrate.simpson(wt * phi_t ** (q + 1), x=t) / m2
    b = (kq / kp) ** (1 / (p + 1))
    k = lam * b / kq
    phi, dphi = np.cos(w * s), -w * np.sin(w * s)
    return np.vstack([phi, dphi, b * phi, b * dphi]), k


def _graded_mesh(core, m):
    """Nodes on [0, 1]: uniform across the core [0, core], geometric beyond it."""
    core = min(core, 0.1)
    inner = np.linspace(0.0, core, m // 4, endpoint=False)
    outer = np.geomspace(core, 1.0, m - m // 4)
    return np.concatenate([inner, outer])


def _quotient(n, p, q, R, sample, npts):
    r = np.concatenate([[0.0], np.geomspace(1e-9 * R, R, npts)])
    u, v = sample(r)
    u = np.maximum(u, 0.0)
    v = np.maximum(v, 0.0)
    w = sphere_area(n) * r ** (n - 1)
    num = integrate.simpson(w * v ** (p + 1), x=r)
    den = integrate.simpson(w * u ** (q + 1), x=r)
    return num / den ** ((p + 1) / (p * (q + 1)))


class _Scaled:
    """Collocation interpolant of the normalized problem mapped back to B(0, R)."""

    def __init__(self, sol, k, n, p, q, R):
        self.sol = sol
        self.R = R
        mu = math.sqrt(k) / R
        self.su = mu ** (2 * (p + 1) / (p * q - 1))
        self.sv = mu ** (2 * (q + 1) / (p * q - 1))

    def __call__(self, r):
        y = self.sol(np.asarray(r, dtype=float) / self.R)
        return np.vstack([self.su * y[0], self.su * y[1] / self.R,
                          self.sv * y[2], self.sv * y[3] / self.R])


def _package(dom, n, p, q, eps, res, cfg):
    if np.any(res.y[0, :-1] <= 0) or np.any(res.y[2, :-1] <= 0):
        raise ConvergenceError("collocation converged to a non-positive solution")
    R = dom.radius
    k = float(res.p[0])
    scaled = _Scaled(res.sol, k, n, p, q, R)
    grid = R * res.x
    u, du, v, dv = scaled(grid)
    u[-1] = v[-1] = 0.0
    lu = u[0] ** ((q + 1) / n)
    lv = v[0] ** ((p + 1) / n)
    lam = max(lu, lv)

    def sample(r):
        y = scaled(r)
        return y[0], y[2]

    S_eps = _quotient(n, p, q, R, sample, cfg.quad_points)
    resid = float(np.max(res.rms_residuals)) if res.rms_residuals.size else 0.0
    out = SystemSolution(dom, n, p, q, eps, grid, u, v, du, dv, float(lam),
                         "v" if lv >= lu else "u", dom.c.copy(), float(S_eps), resid, scaled)
    out.normalized = (res.x, res.sol, k)
    return out


def solve_ball(n: int, p: float, eps: float, dom: BallDomain | None = None,
               cfg: SolverConfig | None = None, guess: SystemSolution | None = None) -> SystemSolution:
    """Positive radial solution at one eps; `guess` seeds Newton (continuation).

    The scaling symmetry fixes u(0) = 1 on the unit interval with the squared
    radius k as an unknown; the result is mapped back to B(0, R).
    """
    cfg = cfg or SolverConfig()
    dom = dom or BallDomain(n)
    if dom.n != n:
        raise ValidationError("domain dimension does not match n")
    if eps <= 0:
        raise ValidationError("eps must be positive (strictly subcritical)")
    q = q_epsilon(n, p, eps)
    if guess is None or getattr(guess, "normalized", None) is None:
        x = np.linspace(0.0, 1.0, cfg.initial_nodes)
        y, k = _initial_guess(n, p, q, x)
    else:
        gx, gsol, k = guess.normalized
        x = _graded_mesh(1.0 / math.sqrt(k), cfg.initial_nodes)
        y = gsol(x)
    f, jac = _rhs(n, p, q)
    with np.errstate(over="ignore", invalid="ignore"):
        res = integrate.solve_bvp(f, _bc, x, y, p=[k], S=_singular(n), fun_jac=jac, tol=cfg.tol,
                                  max_nodes=cfg.max_nodes)
    if not res.success:
        raise ConvergenceError(f"collocation failed at eps={eps:g}: {res.message}")
    return _package(dom, n, p, q, eps, res, cfg)


def continuation(n: int, p: float, eps_schedule, dom: BallDomain | None = None,
                 cfg: SolverConfig | None = None) -> list:
    """Solutions along a decreasing eps schedule, halving the step on Newton failure."""
    cfg = cfg or SolverConfig()
    dom = dom or BallDomain(n)
    eps_schedule = list(eps_schedule)
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise ValidationError("eps schedule must be strictly decreasing")
    out = []
    prev = solve_ball(n, p, eps_schedule[0], dom, cfg)
    out.append(prev)
    for target in eps_schedule[1:]:
        cur_eps = prev.eps
        step = cur_eps - target
        subs = 0
        while cur_eps > target:
            nxt = max(target, cur_eps - step)
            try:
                sol = solve_ball(n, p, nxt, dom, cfg, guess=prev)
            except ConvergenceError as exc:
                subs += 1
                if subs > cfg.max_substeps:
                    raise ConvergenceError(f"continuation stalled; last converged eps={prev.eps:g}",
                                           partial=out) from exc
                step *= 0.5
                continue
            prev, cur_eps = sol, nxt
        out.append(prev)
    return out


# -- shooting oracles ---------------------------------------------------------------

def _shoot(n, p, q, b, r_end=1e3):
    """Integrate from u(0) = 1, v(0) = b; return (first zero of u, first zero of v)."""
    r0 = 1e-6

    def f(r, y):
        u, du, v, dv = y
        return [du, -max(v, 0.0) ** p - (n - 1) / r * du, dv, -max(u, 0.0) ** q - (n - 1) / r * dv]

    y0 = [1 - b ** p * r0 ** 2 / (2 * n), -b ** p * r0 / n, b - r0 ** 2 / (2 * n), -r0 / n]
    ev_u = lambda r, y: y[0]
    ev_v = lambda r, y: y[2]
    ev_u.terminal = False
    ev_v.terminal = False
    stop = lambda r, y: min(y[0], y[2]) + 0.5
    stop.terminal = True
    sol = integrate.solve_ivp(f, (r0, r_end), y0, method="DOP853", rtol=1e-13, atol=1e-15,
                              events=(ev_u, ev_v, stop), dense_output=True)
    zu = sol.t_events[0][0] if sol.t_events[0].size else math.inf
    zv = sol.t_events[1][0] if sol.t_events[1].size else math.inf
    return zu, zv, sol


def shooting_oracle(n: int, p: float, q: float, R: float = 1.0):
    """u(0), v(0) of the positive radial Dirichlet solution on B(0, R), by shooting.

    Returns (u0, v0, profile(r) -> (u, v)).
    """
    def mismatch(logb):
        zu, zv, _ = _shoot(n, p, q, math.exp(logb))
        return math.log(zu) - math.log(zv)

    lo, hi = -1.0, 1.0
    while mismatch(lo) < 0:
        lo -= 1.0
    while mismatch(hi) > 0:
        hi += 1.0
    logb = optimize.brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15)
    b = math.exp(logb)
    zu, zv, sol = _shoot(n, p, q, b)
    mu = zu / R
    a_exp = 2 * (p + 1) / (p * q - 1)
    b_exp = 2 * (q + 1) / (p * q - 1)

    def profile(r):
        r = np.asarray(r, dtype=float)
        s = np.clip(mu * r, 1e-6, zu)
        y = sol.sol(s)
        return mu ** a_exp * y[0], mu ** b_exp * y[2]

    return mu ** a_exp, mu ** b_exp * b, profile


def scalar_shooting_oracle(n: int, p: float, R: float = 1.0):
    """Positive radial solution of -Δw = w^p on B(0, R) by shooting and rescaling."""
    r0 = 1e-6

    def f(r, y):
        return [y[1], -max(y[0], 0.0) ** p - (n - 1) / r * y[1]]

    ev = lambda r, y: y[0]
    ev.terminal = True
    ev.direction = -1
    sol = integrate.solve_ivp(f, (r0, 1e4), [1 - r0 ** 2 / (2 * n), -r0 / n], method="DOP853",
                              rtol=1e-13, atol=1e-15, events=ev, dense_output=True)
    if not sol.t_events[0].size:
        raise ConvergenceError("scalar shooting found no zero")
    z = sol.t_events[0][0]
    mu = z / R
    s = 2 / (p - 1)

    def w(r):
        return mu ** s * sol.sol(np.clip(mu * np.asarray(r, dtype=float), r0, z))[0]

    return w


# -- blow-up diagnostics -----------------------------------------------------------

def _regime(n, p):
    pc = n / (n - 2)
    if abs(p - pc) <= 1e-12:
        return "p_eq"
    return "p_gt" if p > pc else "p_lt"


def limit_quantity(sol: SystemSolution) -> float:
    n, p, eps = sol.n, sol.p, sol.eps
    m = sol.u_max
    reg = _regime(n, p)
    if reg == "p_gt":
        return eps * m ** (n / (p * (n - 2) - 2) + 1)
    if reg == "p_eq":
        return eps * m ** (n / (n - 2) + 1) / math.log(m)
    return eps * m ** (p + 1)


def limit_constant(n: int, p: float, masses: MassConstants, dom: BallDomain,
                   decay_a: float | None = None, htilde_center: float | None = None) -> float:
    """Constant of the blow-up limit for a solution concentrating at the ball center."""
    from .common import critical_q
    q = critical_q(n, p)
    x0 = dom.c
    H00 = dom.cn * dom.radius ** (2 - n)     # H(c, c) on a ball
    sfac = masses.S ** ((1 - p * q) / (p * (q + 1)))
    reg = _regime(n, p)
    if reg == "p_gt":
        return sfac * masses.A_U * masses.A_V * H00
    if reg == "p_eq":
        if decay_a is None:
            raise ValidationError("the p = n/(n-2) constant needs the decay constant a")
        return (p + 1) / (n - 2) * decay_a ** (n / (n - 2)) * sfac * masses.A_U * H00
    if htilde_center is None:
        raise ValidationError("the p < n/(n-2) constant needs H~(x0, x0)")
    return sfac * masses.A_U ** (p + 1) * abs(htilde_center)


def energy_identity_constant(n: int, p: float, masses: MassConstants, dom: BallDomain) -> float:
    """Limit of eps*|u|_inf^gamma (p > n/(n-2)) obtained from the Pohozaev identity on the ball.

    On B(c, R) the identity reads n eps int u^{q+1} = R int_sphere u_r v_r.  Inserting
    the far-field forms u ~ A_V lam^{-n/(p+1)} G, v ~ A_U lam^{-n/(q+1)} G and
    int U^{q+1} = S^{p(q+1)/(pq-1)} for the max-normalized profile gives
    (n-2)/n * A_U A_V H(c, c) / S^{p(q+1)/(pq-1)}.
    """
    from .common import critical_q
    if _regime(n, p) != "p_gt":
        raise ValidationError("the energy identity constant is derived for p > n/(n-2) only")
    q = critical_q(n, p)
    H00 = dom.cn * dom.radius ** (2 - n)
    energy = masses.S ** (p * (q + 1) / (p * q - 1))
    return (n - 2) / n * masses.A_U * masses.A_V * H00 / energy


def diagnostics(sols: list, masses: MassConstants | None = None, constant: float | None = None) -> BlowupDiagnostics:
    if not sols:
        raise ValidationError("no solutions")
    eps = np.array([s.eps for s in sols])
    if np.any(np.diff(eps) >= 0):
        raise ValidationError("solutions must follow a decreasing eps schedule")
    lam = np.array([s.lam for s in sols])
    S = np.array([s.S_eps for s in sols])
    d = np.array([float(s.dom.dist(s.x_max)) / 4 for s in sols])
    lim = np.array([limit_quantity(s) for s in sols])
    # Richardson step assuming an O(eps) error on a geometric ladder
    if lim.size >= 2:
        ratio = eps[-2] / eps[-1]
        est = (ratio * lim[-1] - lim[-2]) / (ratio - 1)
    else:
        est = float(lim[-1])
    return BlowupDiagnostics(eps, np.array([s.q for s in sols]), lam, S, lam * d, d, lim, float(est),
                             float("nan") if constant is None else float(constant),
                             _regime(sols[0].n, sols[0].p), bool(np.all(np.diff(lam) > 0)),
                             bool(np.all(np.diff(S) < 0)), [s.lam_component for s in sols],
                             [s.x_max for s in sols])


def rescale_check(sol: SystemSolution, profile: ProfilePair, core_radius: float = 5.0,
                  npts: int = 2000) -> dict:
    """Compare the lambda-rescaled solution with the normalized ground state."""
    n, p, q = sol.n, sol.p, sol.q
    if profile.exps.n != n or abs(profile.exps.p - p) > 1e-12:
        raise ValidationError("profile exponents do not match the solution")
    lam = sol.lam
    R = sol.dom.radius
    rho = np.linspace(0.0, lam * R * (1 - 1e-9), npts)
    u, v, _, _ = sol.sample(rho / lam)
    ut = lam ** (-n / (q + 1)) * u
    vt = lam ** (-n / (p + 1)) * v
    U = profile.U(rho)
    V = profile.V(rho)
    core = rho <= core_radius
    return {
        "u0": float(ut[0]),
        "v0": float(vt[0]),
        "max_normalized": float(max(ut[0], vt[0])),
        "sup_u_ratio": float(np.max(ut / U)),
        "sup_v_ratio": float(np.max(vt / V)),
        "c0_distance": float(max(np.max(np.abs(ut[core] - U[core])), np.max(np.abs(vt[core] - V[core])))),
        "core_radius": float(min(core_radius, lam * R)),
    }


def far_field_check(sol: SystemSolution, masses: MassConstants, radii=(0.5,),
                    gtilde_values=None) -> dict:
    """v lambda^{n/(q+1)} / (A_U G(x, x0)) and the matching u ratio at probe radii."""
    n, p, q = sol.n, sol.p, sol.q
    dom = sol.dom
    lam = sol.lam
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 10 / lam):
        raise ValidationError(f"probe radius below 10/lambda = {10 / lam:.3g}")
    if np.any(radii >= dom.radius):
        raise ValidationError("probe radii must lie inside the ball")
    e = np.zeros(n)
    e[0] = 1.0
    pts = dom.c + radii[:, None] * e
    G = green_fn(pts, dom.c, dom)
    u, v, _, _ = sol.sample(radii)
    v_ratio = v * lam ** (n / (q + 1)) / (masses.A_U * G)
    u_ratio = None
    if _regime(n, p) == "p_gt":
        u_ratio = u * lam ** (n / (p + 1)) / (masses.A_V * G)
    elif _regime(n, p) == "p_lt" and gtilde_values is not None:
        u_ratio = u * lam ** (n * p / (q + 1)) / (masses.A_U ** p * np.asarray(gtilde_values))
    flat = float(np.ptp(v_ratio) / np.mean(v_ratio)) if v_ratio.size > 1 else 0.0
    return {"radii": radii, "v_ratio": v_ratio, "u_ratio": u_ratio, "flatness": flat}
