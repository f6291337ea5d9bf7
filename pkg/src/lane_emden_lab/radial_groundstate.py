"""Entire-space radial ground states of the critical Lane-Emden system.

The radial system u'' + (n-1)u'/r = -v^p, v'' + (n-1)v'/r = -u^q with u(0)=1
is integrated in the logarithmic variable s = log r, where with w = r u' it reads

    u_s = w_u,   w_u' = -(n-2) w_u - r^2 v^p,

(and symmetrically for v).  The shooting parameter is v(0).  Mass integrals
are carried along as extra ODE components so they inherit the integrator's
accuracy instead of being re-integrated from samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .common import ConvergenceError, ValidationError, critical_q, q_epsilon, sphere_area

__all__ = [
    "ExponentPair",
    "ShootingConfig",
    "Trajectory",
    "DecayFit",
    "MassConstants",
    "ProfilePair",
    "critical_q",
    "q_epsilon",
    "critical_pair",
    "integrate_system",
    "shoot_groundstate",
    "fit_decay",
    "compute_mass",
    "bubble",
    "normalize_max",
    "ground_state",
]

UNDERSHOOT = "undershoot"   # v reaches zero first: v(0) too small
OVERSHOOT = "overshoot"     # u reaches zero first: v(0) too large
DECAY = "decay"


@dataclass(frozen=True)
class ExponentPair:
    n: int
    p: float
    q: float

    def __post_init__(self):
        if self.n < 3:
            raise ValidationError("dimension must be at least 3")
        if self.p <= 0 or self.q <= 0 or self.p * self.q <= 1:
            raise ValidationError("need p, q > 0 and pq > 1")

    @property
    def hyperbola_gap(self) -> float:
        """1/(p+1) + 1/(q+1) - (n-2)/n; zero on the critical hyperbola."""
        return 1.0 / (self.p + 1) + 1.0 / (self.q + 1) - (self.n - 2) / self.n

    @property
    def regime(self) -> str:
        pc = self.n / (self.n - 2)
        if abs(self.p - pc) <= 1e-12 * pc:
            return "p_eq"
        return "p_gt" if self.p > pc else "p_lt"


def critical_pair(n: int, p: float) -> ExponentPair:
    return ExponentPair(n, p, critical_q(n, p))


@dataclass
class ShootingConfig:
    r_start: float = 1e-3
    r_max: float = 1e3
    r_classify: float = 1e16      # classification runs continue to this radius
    rtol: float = 1e-12
    atol: float = 1e-40
    v0_range: tuple = (1e-6, 1e6)
    bisect_rtol: float = 1e-12
    grid_points: int = 1201
    match_rtol: float = 1e-5      # bracket trajectories must agree to this to be trusted
    fit_threshold: float = 1e-3
    method: str = "DOP853"


@dataclass
class Trajectory:
    """Output of one integration from the origin."""
    status: str
    r_end: float
    sol: object            # dense output in s = log r
    r_start: float
    v0: float
    exps: ExponentPair
    message: str = ""

    def state(self, r):
        """Columns u, w_u, v, w_v, and four mass accumulators at radii r >= r_start."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return self.sol(np.log(r))


@dataclass
class DecayFit:
    regime: str
    a: float
    b: float
    fit_window: tuple
    fit_residual: float
    a_spread: float = float("nan")   # relative variation of r^{n-2}V over the window
    b_spread: float = float("nan")
    coef_u: list | None = None      # limit plus correction coefficients of the fitted series
    coef_v: list | None = None


@dataclass
class MassConstants:
    A_U: float
    A_V: float
    S: float
    A_V_finite: bool = True


@dataclass
class ProfilePair:
    exps: ExponentPair
    grid: np.ndarray
    u_vals: np.ndarray
    v_vals: np.ndarray
    shoot_param: float
    tail: DecayFit | None = None
    mass: MassConstants | None = None
    r_reliable: float = float("nan")
    bisection_log: list = field(default_factory=list)
    # accumulated integrals |S^{n-1}|^{-1} * ∫_{B_R} f on the reliable range
    integrals: dict = field(default_factory=dict)
    _splines: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def _spl(self):
        if self._splines is None:
            self._splines = (_loglog_spline(self.grid, self.u_vals),
                             _loglog_spline(self.grid, self.v_vals))
        return self._splines

    def U(self, r):
        return _interp_loglog(self.grid, self.u_vals, r, self._spl()[0])

    def V(self, r):
        return _interp_loglog(self.grid, self.v_vals, r, self._spl()[1])


def _loglog_spline(grid, vals):
    return CubicSpline(np.log(grid[1:]), np.log(vals[1:]))


def _interp_loglog(grid, vals, r, spline=None):
    # linear on [0, grid[1]] where the profile is flat, cubic in log-log beyond
    r = np.asarray(r, dtype=float)
    out = np.interp(r, grid, vals)
    big = r > grid[1]
    if np.any(big):
        spline = spline or _loglog_spline(grid, vals)
        lr = np.log(np.where(big, np.minimum(r, grid[-1]), grid[1]))
        inside = np.exp(spline(lr))
        out = np.where(big & (r <= grid[-1]), inside, out)
    return out


def _series_start(exps: ExponentPair, v0: float, r0: float):
    n, p, q = exps.n, exps.p, exps.q
    a2 = -v0 ** p / (2 * n)
    b2 = -1.0 / (2 * n)
    a4 = -p * v0 ** (p - 1) * b2 / (4 * (n + 2))
    b4 = -q * a2 / (4 * (n + 2))
    u = 1 + a2 * r0 ** 2 + a4 * r0 ** 4
    v = v0 + b2 * r0 ** 2 + b4 * r0 ** 4
    wu = 2 * a2 * r0 ** 2 + 4 * a4 * r0 ** 4
    wv = 2 * b2 * r0 ** 2 + 4 * b4 * r0 ** 4
    vol = r0 ** n / n
    return np.array([u, wu, v, wv,
                     vol, vol * v0 ** p,           # ∫U^q, ∫V^p
                     vol * v0 ** (p + 1), vol])    # ∫V^{p+1}, ∫U^{q+1}


def integrate_system(exps: ExponentPair, v0: float, cfg: ShootingConfig | None = None,
                     r_stop: float | None = None) -> Trajectory:
    """Integrate the radial system from u(0)=1, v(0)=v0 until a sign change or r_stop."""
    cfg = cfg or ShootingConfig()
    if v0 <= 0:
        raise ValidationError("v0 must be positive")
    n, p, q = exps.n, exps.p, exps.q
    r_stop = cfg.r_max if r_stop is None else r_stop

    def rhs(s, y):
        r2 = math.exp(2 * s)
        rn = math.exp(n * s)
        u = max(y[0], 0.0)
        v = max(y[2], 0.0)
        up = u ** q
        vp = v ** p
        return [y[1], -(n - 2) * y[1] - r2 * vp,
                y[3], -(n - 2) * y[3] - r2 * up,
                rn * up, rn * vp, rn * vp * v, rn * up * u]

    def hit_u(s, y):
        return y[0]

    def hit_v(s, y):
        return y[2]

    hit_u.terminal = hit_v.terminal = True
    hit_u.direction = hit_v.direction = -1

    y0 = _series_start(exps, v0, cfg.r_start)
    res = solve_ivp(rhs, (math.log(cfg.r_start), math.log(r_stop)), y0, method=cfg.method,
                    rtol=cfg.rtol, atol=cfg.atol, events=(hit_u, hit_v), dense_output=True)
    if res.status == -1:
        raise ConvergenceError(f"integration failed at r={math.exp(res.t[-1]):.4g}: {res.message}",
                               partial=res)
    if len(res.t_events[0]) and (not len(res.t_events[1]) or res.t_events[0][0] <= res.t_events[1][0]):
        status = OVERSHOOT
    elif len(res.t_events[1]):
        status = UNDERSHOOT
    else:
        status = DECAY
    return Trajectory(status, math.exp(res.t[-1]), res.sol, cfg.r_start, v0, exps, res.message)


def _classify(exps, v0, cfg):
    return integrate_system(exps, v0, cfg, r_stop=cfg.r_classify).status


def shoot_groundstate(exps: ExponentPair, cfg: ShootingConfig | None = None,
                      v0_guess: float = 1.0) -> ProfilePair:
    """Bisect on v(0) between an undershoot and an overshoot, then build the profile."""
    cfg = cfg or ShootingConfig()
    if exps.hyperbola_gap < -1e-12:
        raise ValidationError("exponents lie above the critical hyperbola")
    lo_lim, hi_lim = cfg.v0_range
    log = []

    s = _classify(exps, v0_guess, cfg)
    log.append((v0_guess, s))
    lo = hi = None
    if s == UNDERSHOOT:
        lo = v0_guess
    elif s == OVERSHOOT:
        hi = v0_guess
    else:
        lo = hi = v0_guess
    step = 2.0
    while lo is None or hi is None:
        if lo is None:
            trial = hi / step
            if trial < lo_lim:
                raise ConvergenceError("no undershoot found inside v0_range")
        else:
            trial = lo * step
            if trial > hi_lim:
                raise ConvergenceError("no overshoot found inside v0_range")
        s = _classify(exps, trial, cfg)
        log.append((trial, s))
        if s == UNDERSHOOT:
            lo = trial
        elif s == OVERSHOOT:
            hi = trial
        else:
            lo = hi = trial
        step *= 2.0

    while hi - lo > cfg.bisect_rtol * 0.5 * (hi + lo):
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        s = _classify(exps, mid, cfg)
        log.append((mid, s))
        if s == UNDERSHOOT:
            lo = mid
        elif s == OVERSHOOT:
            hi = mid
        else:
            lo = hi = mid
            break
    v0 = 0.5 * (lo + hi)
    return _build_profile(exps, v0, lo, hi, cfg, log)


def _build_profile(exps, v0, lo, hi, cfg, log):
    n = exps.n
    traj = integrate_system(exps, v0, cfg, r_stop=cfg.r_max)
    r_ok = traj.r_end
    # where the bracketing trajectories still agree, the shot is trustworthy
    if hi > lo:
        t_lo = integrate_system(exps, lo, cfg, r_stop=cfg.r_max)
        t_hi = integrate_system(exps, hi, cfg, r_stop=cfg.r_max)
        r_end = min(t_lo.r_end, t_hi.r_end, traj.r_end)
        probe = np.geomspace(cfg.r_start, r_end, 2000)
        ylo, yhi = t_lo.state(probe), t_hi.state(probe)
        gap = np.maximum(np.abs(ylo[0] - yhi[0]) / np.abs(yhi[0]),
                         np.abs(ylo[2] - yhi[2]) / np.abs(yhi[2]))
        bad = np.nonzero(gap > cfg.match_rtol)[0]
        r_ok = probe[bad[0] - 1] if len(bad) and bad[0] > 0 else (probe[0] if len(bad) else r_end)
    r_ok = min(r_ok, traj.r_end)
    if r_ok < 20 * cfg.r_start:
        raise ConvergenceError("shooting unreliable already near the origin")

    grid = np.concatenate([[0.0], np.geomspace(cfg.r_start, cfg.r_max, cfg.grid_points - 1)])
    inside = grid[1:] <= r_ok
    st = traj.state(grid[1:][inside])
    u = np.empty_like(grid)
    v = np.empty_like(grid)
    u[0], v[0] = 1.0, v0
    u[1:][inside] = st[0]
    v[1:][inside] = st[2]

    end = traj.state([r_ok])[:, 0]
    integrals = {"Uq": end[4], "Vp": end[5], "Vp1": end[6], "Uq1": end[7], "R": r_ok,
                 "flux_V": -end[3] * r_ok ** (n - 2), "flux_U": -end[1] * r_ok ** (n - 2)}
    prof = ProfilePair(exps, grid, u, v, v0, r_reliable=r_ok, bisection_log=log,
                       integrals=integrals)
    if not np.all(inside):
        # continue past the last trusted radius with the fitted asymptotic series
        fit = fit_decay(_truncate(prof, r_ok), exps, window=(r_ok / 10, r_ok), cfg=cfg)
        rr = grid[1:][~inside]
        U_t, V_t = _tail_model(exps, fit, rr)
        u[1:][~inside] = U_t
        v[1:][~inside] = V_t
    prof.tail = fit_decay(prof, exps, cfg=cfg)
    prof.mass = compute_mass(prof, exps)
    return prof


def _truncate(prof, r_ok):
    keep = prof.grid <= r_ok
    return replace(prof, grid=prof.grid[keep], u_vals=prof.u_vals[keep], v_vals=prof.v_vals[keep])


def _decay_rates(exps):
    n, p = exps.n, exps.p
    reg = exps.regime
    gu = n - 2 if reg in ("p_gt", "p_eq") else p * (n - 2) - 2
    return reg, gu, n - 2


def _correction_powers(exps):
    """Leading relative correction exponents k in r^g W(r) = limit * (1 + c r^{-k} + ...)."""
    n, p, q = exps.n, exps.p, exps.q
    reg, gu, gv = _decay_rates(exps)
    kv = gu * q - n
    if reg == "p_gt":
        ku = (n - 2) * p - n
    else:
        ku = n - (n - 2) * p
    def dedupe(ks):
        out = []
        for k in sorted(ks):
            if k > 0 and all(abs(k - o) > 1e-3 for o in out):
                out.append(k)
        return out[:3]
    return dedupe([ku, kv, 2 * ku]), dedupe([kv, 2 * kv])


def _bases(exps):
    reg = exps.regime
    ku, kv = _correction_powers(exps)
    bv = [(lambda x, k=k: x ** -k) for k in kv]
    if reg == "p_eq":
        bu = [lambda x: 1 / np.log(x), lambda x: 1 / np.log(x) ** 2]
    else:
        bu = [(lambda x, k=k: x ** -k) for k in ku]
    return bu, bv


def _tail_model(exps, fit, r):
    """Asymptotic series for (U, V) using the fitted limit and correction coefficients."""
    reg, gu, gv = _decay_rates(exps)
    bu, bv = _bases(exps)
    cu = fit.coef_u if fit.coef_u is not None else [fit.b]
    cv = fit.coef_v if fit.coef_v is not None else [fit.a]
    yu = cu[0] + sum(c * f(r) for c, f in zip(cu[1:], bu))
    yv = cv[0] + sum(c * f(r) for c, f in zip(cv[1:], bv))
    U = yu * r ** (-gu)
    if reg == "p_eq":
        U = U * np.log(r)
    return U, yv * r ** (-gv)


def _limit_fit(r, y, basis):
    A = np.column_stack([np.ones_like(r)] + [f(r) for f in basis])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = np.max(np.abs(A @ coef - y)) / abs(coef[0])
    return coef, resid


def fit_decay(profile: ProfilePair, exps: ExponentPair, window=None,
              cfg: ShootingConfig | None = None) -> DecayFit:
    """Fit a = lim r^{n-2}V and the regime-dependent limit b of U.

    The limit is extracted by least squares against 1 plus the leading
    correction terms of each regime; fit_residual is the largest relative
    misfit of that model on the window.
    """
    cfg = cfg or ShootingConfig()
    n = exps.n
    rmax = profile.grid[-1]
    lo, hi = window if window is not None else (rmax / 10, rmax)
    mask = (profile.grid >= lo) & (profile.grid <= hi)
    if mask.sum() < 8:
        raise ValidationError("fit window holds too few grid points")
    r = profile.grid[mask]
    reg, gu, gv = _decay_rates(exps)
    yv = r ** gv * profile.v_vals[mask]
    yu = r ** gu * profile.u_vals[mask]
    if reg == "p_eq":
        yu = yu / np.log(r)
    basis_u, basis_v = _bases(exps)
    cv, ra = _limit_fit(r, yv, basis_v)
    cu, rb = _limit_fit(r, yu, basis_u)
    a, b = cv[0], cu[0]
    fit = DecayFit(reg, float(a), float(b), (float(lo), float(hi)), float(max(ra, rb)),
                   float(np.ptp(yv) / abs(a)), float(np.ptp(yu) / abs(b)),
                   [float(c) for c in cu], [float(c) for c in cv])
    if not (fit.a > 0 and fit.b > 0):
        raise ConvergenceError(f"nonpositive decay constants a={fit.a}, b={fit.b}")
    if fit.fit_residual > cfg.fit_threshold:
        raise ConvergenceError(f"decay fit residual {fit.fit_residual:.3g} above threshold; "
                               "window too small or wrong regime")
    return fit


def compute_mass(profile: ProfilePair, exps: ExponentPair) -> MassConstants:
    """A_U = ∫U^q, A_V = ∫V^p and the quotient S = ∫V^{p+1} / (∫U^{q+1})^{(p+1)/(p(q+1))}."""
    n, p, q = exps.n, exps.p, exps.q
    area = sphere_area(n)
    reg, gu, gv = _decay_rates(exps)
    I = profile.integrals
    R = I["R"]
    UR, VR = profile.U(R), profile.V(R)

    def tail(val, rate, power):
        k = rate * power - n
        if k <= 0:
            return math.inf
        return val ** power * R ** n / k

    A_U = area * (I["Uq"] + tail(UR, gu, q))
    pc = n / (n - 2)
    finite_v = exps.p > pc and reg == "p_gt"
    A_V = area * (I["Vp"] + tail(VR, gv, p)) if finite_v else math.inf
    num = area * (I["Vp1"] + tail(VR, gv, p + 1))
    den = area * (I["Uq1"] + tail(UR, gu, q + 1))
    S = num / den ** ((p + 1) / (p * (q + 1)))
    return MassConstants(float(A_U), float(A_V), float(S), finite_v)


def bubble(n: int, r):
    """Closed-form ground state (1 + r^2/(n(n-2)))^{-(n-2)/2} for p = q = (n+2)/(n-2)."""
    r = np.asarray(r, dtype=float)
    return (1 + r * r / (n * (n - 2))) ** (-(n - 2) / 2)


def normalize_max(profile: ProfilePair) -> ProfilePair:
    """Rescale along the critical dilation so that max(U(0), V(0)) = 1.

    U_mu(r) = mu^{n/(q+1)} U(mu r), V_mu(r) = mu^{n/(p+1)} V(mu r).
    """
    e = profile.exps
    n, p, q = e.n, e.p, e.q
    v0 = profile.shoot_param
    if v0 <= 1.0:
        return profile
    mu = v0 ** (-(p + 1) / n)
    su, sv = mu ** (n / (q + 1)), mu ** (n / (p + 1))
    grid = profile.grid / mu
    m = profile.mass
    scale_int = mu ** (-n)
    mass = None
    if m is not None:
        mass = MassConstants(m.A_U * su ** q * scale_int, m.A_V * sv ** p * scale_int
                             if m.A_V_finite else math.inf, m.S, m.A_V_finite)
    tail = None
    if profile.tail is not None:
        t = profile.tail
        reg, gu, gv = _decay_rates(e)
        # r^{g} U_mu(r) = mu^{-g} su (mu r)^g U(mu r)
        b = t.b * su * mu ** (-gu)
        tail = replace(t, a=t.a * sv * mu ** (-gv), b=b, coef_u=None, coef_v=None,
                       fit_window=(t.fit_window[0] / mu, t.fit_window[1] / mu))
    return replace(profile, grid=grid, u_vals=profile.u_vals * su, v_vals=profile.v_vals * sv,
                   shoot_param=v0 * sv, tail=tail, mass=mass)


def ground_state(n: int, p: float, q: float | None = None, cfg: ShootingConfig | None = None,
                 normalize: bool = True) -> ProfilePair:
    """Shoot, fit the decay law and compute the masses in one call.

    q defaults to the critical partner of p.  With normalize the profile is
    rescaled so that max(U(0), V(0)) = 1.
    """
    exps = critical_pair(n, p) if q is None else ExponentPair(n, p, q)
    prof = shoot_groundstate(exps, cfg)
    prof.tail = fit_decay(prof, exps, cfg=cfg)
    prof.mass = compute_mass(prof, exps)
    return normalize_max(prof) if normalize else prof
