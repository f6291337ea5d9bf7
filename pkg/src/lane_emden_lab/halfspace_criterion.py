"""Half-space integrals that decide the boundary growth condition for H~(x, x).

W0(z) = H~_0(z, e_n) is the half-space limit of the rescaled regular part.  It
solves -ΔW0 = f in R^n_+ with W0 = g on the boundary, and

    d/dx_n W0(e_n) = (n-2) c_n^{p+1} (F - Gv),

where F is the axial integral of the dipole kernel
[(1-z_n)/|z-e_n|^n - (1+z_n)/|z+e_n|^n] against the nonlinear bracket, and
Gv = -(coef / c_n^p) B collects the boundary contribution with

    B = ∫_{R^{n-1}} 2 (1+s^2)^{-(n-2)(p+1)/2} - 2n (1+s^2)^{-((n-2)p+n)/2} ds.

Both sides depend only on (|z'|, z_n), so every volume integral is reduced to
the (radial, axial) half-plane with weight |S^{n-2}| |z'|^{n-2}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate, special

from .common import ValidationError, green_constant, panel_rule, sphere_area
from .greens_ball import BallDomain
from .gtilde_field import AlphaConstants, SingularQuadConfig, alpha_constants, branch, htilde
from .quadrature import graded_breaks

__all__ = [
    "CriterionConfig",
    "CriterionReport",
    "W0Eval",
    "RHSEval",
    "halfplane_integral",
    "lhs_integral",
    "rhs_integral",
    "criterion",
    "w0_derivative",
    "w0_value",
    "htilde0_diagonal",
    "p1_scaling_check",
    "continuity_scan",
    "rescaled_convergence_probe",
]


@dataclass
class CriterionConfig:
    R_trunc: float = 400.0      # rays from the pole stop at this distance
    shell_eps: float = 1e-9     # innermost radius around the pole
    tol: float = 1e-6
    m: int = 10                 # Gauss nodes per panel (fine level m + dm)
    dm: int = 4
    theta_panels: int = 8
    ratio: float = 0.3
    tail_safety: float = 4.0    # relative uncertainty of the analytic tail is tail_safety / R_trunc

    def __post_init__(self):
        if not 0 < self.shell_eps < 1 < self.R_trunc:
            raise ValidationError("need 0 < shell_eps < 1 < R_trunc")


@dataclass
class CriterionReport:
    n: int
    p: float
    F: float
    Gv: float
    diff: float
    err: float
    verdict: str
    dW0: float                  # (n-2) c_n^{p+1} diff
    branch: str
    details: dict = field(default_factory=dict)


@dataclass
class W0Eval:
    dI1: float
    dI2: float
    total: float
    err: float


@dataclass
class RHSEval:
    first: float                # ∫ 2 (1+s^2)^{-(n-2)(p+1)/2}
    second: float               # ∫ 2n (1+s^2)^{-((n-2)p+n)/2}
    B: float
    coef: float                 # boundary coefficient of |y-e_n|^{2-(n-2)p}
    Gv: float
    err: float
    quad_check: float           # |closed form - 1-D quadrature|
    volume_form_divergent: bool
    divergence_exponent: float


def _check_np(n, p):
    if n < 5:
        raise ValidationError("the half-space criterion needs n >= 5")
    if not 1 <= p < n / (n - 2):
        raise ValidationError(f"p must lie in [1, n/(n-2)) = [1, {n / (n - 2):.6g})")


# -- half-plane quadrature -------------------------------------------------------------

def halfplane_integral(fun, n, pole, cfg: CriterionConfig, theta_specials=(), radial_specials=(),
                       r_max=None, r_min=None):
    """∫_{R^n_+ ∩ {r_min < |z - pole e_n| < r_max}} fun(rho, zn) dz for axisymmetric integrands.

    Polar coordinates about pole*e_n in the (rho, z_n) half-plane:
    rho = r sin t, z_n = pole + r cos t, dz = |S^{n-2}| r^{n-1} sin^{n-2} t dr dt.
    Returns (fine, |fine - coarse|).
    """
    a = float(pole)
    R = cfg.R_trunc if r_max is None else float(r_max)
    r0 = cfg.shell_eps * a if r_min is None else float(r_min)
    specials = [(0.0, 1e-3), (math.pi, 1e-3), (math.pi / 2, 1e-4)] + list(theta_specials)
    if R > a:
        specials.append((math.acos(-a / R), 1e-4))
    tb = graded_breaks(0.0, math.pi, specials, cfg.theta_panels, cfg.ratio)
    area = sphere_area(n - 1)
    out = []
    for m in (cfg.m, cfg.m + cfg.dm):
        t, wt = panel_rule(tb, m)
        total = 0.0
        for ti, wi in zip(t, wt):
            ct, st = math.cos(ti), math.sin(ti)
            L = R if ct >= 0 else min(R, a / -ct)
            if L <= r0:
                continue
            br = _radial_breaks(r0, L, a, hits_wall=(ct < 0 and a / -ct < R),
                                specials=radial_specials, ratio=cfg.ratio)
            r, wr = panel_rule(br, m)
            vals = fun(r * st, a + r * ct)
            total += wi * st ** (n - 2) * area * np.sum(wr * r ** (n - 1) * vals)
        out.append(total)
    return out[1], abs(out[1] - out[0])


def _radial_breaks(r0, L, a, hits_wall, specials, ratio):
    pts = [r0, L]
    # toward the pole
    h = min(a, L)
    while h > r0:
        pts.append(h)
        h *= ratio
    # geometric growth outward
    h = a
    while h < L:
        pts.append(h)
        h *= 2.0
    if hits_wall:
        h = 0.5 * min(a, L)
        while h > 1e-7 * a:
            if L - h > r0:
                pts.append(L - h)
            h *= ratio
    for c, small in specials:
        if r0 < c < L:
            pts.append(c)
            h = 0.5 * c
            while h > small:
                for s in (c - h, c + h):
                    if r0 < s < L:
                        pts.append(s)
                h *= ratio
    pts = np.unique(np.clip(pts, r0, L))
    return pts


# -- kernels in (rho, z_n) coordinates --------------------------------------------------

def _dists(rho, zn, a=1.0):
    d1 = np.sqrt(rho * rho + (zn - a) ** 2)
    d2 = np.sqrt(rho * rho + (zn + a) ** 2)
    return d1, d2


def _dipole(rho, zn, n):
    d1, d2 = _dists(rho, zn)
    return (1 - zn) / d1 ** n - (1 + zn) / d2 ** n


def _high_coef(n, p):
    m = n - (n - 2) * p
    return 2 * p * (n - 2) / (m + n - 2)


def _braces(rho, zn, n, p):
    """(|z-e|^{2-n} - |z+e|^{2-n})^p - |z-e|^{-(n-2)p} (+ high-branch corrections)."""
    d1, d2 = _dists(rho, zn)
    k = (n - 2) * p
    t = np.minimum((d1 / d2) ** (n - 2), 1.0)
    with np.errstate(divide="ignore"):
        lg = np.log1p(-t)
    if branch(n, p) == "low":
        return d1 ** (-k) * np.expm1(p * lg)
    dot = rho * rho + zn * zn - 1.0
    return (d1 ** (-k) * (np.expm1(p * lg) + p * t)
            - _high_coef(n, p) * dot / (d2 ** n * d1 ** ((n - 2) * (p - 1))))


def _far_coef(n, p):
    """braces ~ C |z|^{-(n-2)p} as |z| -> infinity."""
    if branch(n, p) == "low":
        return -1.0
    return p - 1.0 - _high_coef(n, p)


def _hemisphere_moment(n):
    """∫ over the upper unit hemisphere of w_n dS = |B^{n-1}|."""
    return sphere_area(n - 1) / (n - 1)


def lhs_integral(n: int, p: float, cfg: CriterionConfig | None = None, kernel: str = "dipole"):
    """F = ∫_{R^n_+} dipole(z) braces(z) dz; returns (value, err, details).

    kernel='reflected' swaps the roles of e_n and -e_n in the dipole factor, which
    flips its sign pointwise (used as a symmetry check of the grid).
    """
    cfg = cfg or CriterionConfig()
    _check_np(n, p)
    k = (n - 2) * p

    if kernel == "dipole":
        fun = lambda rho, zn: _dipole(rho, zn, n) * _braces(rho, zn, n, p)
        sgn = 1.0
    elif kernel == "reflected":
        def fun(rho, zn):
            d1, d2 = _dists(rho, zn)
            return ((1 + zn) / d2 ** n - (1 - zn) / d1 ** n) * _braces(rho, zn, n, p)
        sgn = -1.0
    else:
        raise ValidationError(f"unknown kernel {kernel!r}")
    val, qerr = halfplane_integral(fun, n, 1.0, cfg)
    R = cfg.R_trunc
    # dipole ~ -2 z_n |z|^{-n}, braces ~ C |z|^{-k}
    tail = sgn * -2.0 * _far_coef(n, p) * _hemisphere_moment(n) * R ** (1 - k) / (k - 1)
    tail_err = abs(tail) * cfg.tail_safety / R
    # excised shell r < shell_eps: extrapolate from the band [eps, 2 eps] using the
    # local order r^{-(n-2)(p-1)} of the angularly summed radial integrand
    r0 = cfg.shell_eps
    band, _ = halfplane_integral(fun, n, 1.0, cfg, r_min=r0, r_max=2 * r0)
    beta = (1.0 if branch(n, p) == "low" else 2.0) - (n - 2) * (p - 1)
    shell = abs(band) / (2 ** beta - 1)
    err = qerr + tail_err + shell
    return val + tail, err, {"quad_err": qerr, "tail": tail, "tail_err": tail_err, "shell": shell}


def _ball_moment(n, expo):
    """∫_{R^{n-1}} (1+|s|^2)^{-expo/2} ds in closed form."""
    if expo <= n - 1:
        raise ValidationError(f"boundary integral diverges: exponent {expo} <= n-1")
    return math.pi ** ((n - 1) / 2) * math.exp(special.gammaln((expo - n + 1) / 2)
                                                  - special.gammaln(expo / 2))


def _ball_moment_quad(n, expo):
    area = sphere_area(n - 1)
    f = lambda s: area * s ** (n - 2) * (1 + s * s) ** (-expo / 2)
    v1, _ = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13)
    v2, _ = integrate.quad(f, 1, np.inf, epsabs=0, epsrel=1e-13)
    return v1 + v2


def boundary_coefficient(n, p, ac: AlphaConstants):
    if branch(n, p) == "high":
        return ac.alpha1 - green_constant(n) * ac.alpha2
    return ac.alpha1


def rhs_integral(n: int, p: float, ac: AlphaConstants | None = None,
                 cfg: CriterionConfig | None = None, form: str = "boundary") -> RHSEval:
    """The boundary contribution Gv, normalized to compare directly with F.

    form='volume' requests the variant in which the second piece is written as
    a volume integral of |y - e_n|^{-((n-2)p+n)} over R^n_+; that integrand is not
    integrable at e_n and the request is rejected with the exponent.
    """
    _check_np(n, p)
    ac = ac or alpha_constants(n, p)
    k = (n - 2) * p
    vol_expo = k + n
    divergent = vol_expo >= n
    if form == "volume":
        raise ValidationError(f"volume integral of |y-e_n|^-{vol_expo:g} over R^{n}_+ diverges "
                              f"at e_n (needs exponent < {n})")
    if form != "boundary":
        raise ValidationError(f"unknown form {form!r}")
    e1, e2 = k + n - 2, k + n
    first = 2 * _ball_moment(n, e1)
    second = 2 * n * _ball_moment(n, e2)
    chk = abs(first - 2 * _ball_moment_quad(n, e1)) + abs(second - 2 * n * _ball_moment_quad(n, e2))
    B = first - second
    coef = boundary_coefficient(n, p, ac)
    cn = green_constant(n)
    Gv = -coef * B / cn ** p
    err = abs(Gv) * 1e-14 + chk * abs(coef) / cn ** p
    return RHSEval(first, second, B, coef, Gv, err, chk, divergent, vol_expo)


def criterion(n: int, p: float, cfg: CriterionConfig | None = None) -> CriterionReport:
    cfg = cfg or CriterionConfig()
    F, Ferr, det = lhs_integral(n, p, cfg)
    rhs = rhs_integral(n, p, cfg=cfg)
    diff = F - rhs.Gv
    err = Ferr + rhs.err
    verdict = "holds" if abs(diff) > 3 * err else "inconclusive"
    cn = green_constant(n)
    det = dict(det, B=rhs.B, coef=rhs.coef)
    return CriterionReport(n, p, F, rhs.Gv, diff, err, verdict, (n - 2) * cn ** (p + 1) * diff,
                           branch(n, p), det)


# -- W0 and its derivative ----------------------------------------------------------------

def _source(rho, zn, n, p, ac):
    """f = -ΔW0 in R^n_+ (pole at e_n), written with the Green constant."""
    cn = green_constant(n)
    k = (n - 2) * p
    d1, d2 = _dists(rho, zn)
    t = np.minimum((d1 / d2) ** (n - 2), 1.0)
    with np.errstate(divide="ignore"):
        lg = np.log1p(-t)
    f = -cn ** p * d1 ** (-k) * np.expm1(p * lg)
    if branch(n, p) == "high":
        m = n - k
        H = cn * d2 ** (2 - n)
        # grad_z H(z, e_n) . (z - e_n) with H the reflected fundamental solution
        gdot = (2 - n) * cn * (rho * rho + (zn + 1) * (zn - 1)) / d2 ** n
        f = f + ac.alpha2 * m * d1 ** (m - 2) * ((m + n - 2) * H + 2 * gdot)
    return f


def _green0_dxn(a, rho, zn, n):
    """∂/∂x_n of the half-space Green function G0(x, z) at x = a e_n."""
    cn = green_constant(n)
    d1, d2 = _dists(rho, zn, a)
    return -(n - 2) * cn * ((a - zn) / d1 ** n - (a + zn) / d2 ** n)


def _green0(a, rho, zn, n):
    cn = green_constant(n)
    d1, d2 = _dists(rho, zn, a)
    return cn * (d1 ** (2 - n) - d2 ** (2 - n))


def w0_derivative(n: int, p: float, cfg: CriterionConfig | None = None) -> W0Eval:
    """d/dx_n W0 at e_n from the Green/Poisson representation of W0."""
    cfg = cfg or CriterionConfig()
    _check_np(n, p)
    ac = alpha_constants(n, p)
    k = (n - 2) * p
    cn = green_constant(n)
    fun = lambda rho, zn: _green0_dxn(1.0, rho, zn, n) * _source(rho, zn, n, p, ac)
    v, qerr = halfplane_integral(fun, n, 1.0, cfg)
    # far field: ∂G0 ~ 2(n-2)c_n z_n |z|^{-n}, f ~ -c_n^p C |z|^{-k}
    R = cfg.R_trunc
    tail = -2 * (n - 2) * cn ** (p + 1) * _far_coef(n, p) * _hemisphere_moment(n) * R ** (1 - k) / (k - 1)
    dI1 = v + tail
    e1 = qerr + abs(tail) * cfg.tail_safety / R
    # Poisson part: ∂/∂x_n of (n-2)c_n 2x_n/|x-y|^n at e_n, against coef |y-e_n|^{2-k}
    coef = boundary_coefficient(n, p, ac)
    area = sphere_area(n - 1)
    dker = lambda s: (n - 2) * cn * (2 * (1 + s * s) ** (-n / 2) - 2 * n * (1 + s * s) ** (-(n + 2) / 2))
    f2 = lambda s: area * s ** (n - 2) * dker(s) * coef * (1 + s * s) ** ((2 - k) / 2)
    a1, r1 = integrate.quad(f2, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
    a2, r2 = integrate.quad(f2, 1, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    dI2 = a1 + a2
    return W0Eval(float(dI1), float(dI2), float(dI1 + dI2), float(e1 + r1 + r2))


def w0_value(a: float, n: int, p: float, cfg: CriterionConfig | None = None):
    """W0(a e_n) = H~_0(a e_n, e_n); returns (value, err)."""
    cfg = cfg or CriterionConfig()
    _check_np(n, p)
    if a <= 0:
        raise ValidationError("the probe must lie in the open half-space")
    ac = alpha_constants(n, p)
    k = (n - 2) * p
    cn = green_constant(n)
    fun = lambda rho, zn: _green0(a, rho, zn, n) * _source(rho, zn, n, p, ac)
    ts, rs = [], []
    if abs(a - 1) > 1e-14:
        ts = [(0.0 if a < 1 else math.pi, 1e-4)]
        rs = [(abs(a - 1), 1e-7 * abs(a - 1))]
    v, qerr = halfplane_integral(fun, n, a, cfg, theta_specials=ts, radial_specials=rs)
    # G0(a e_n, z) ~ 2(n-2) c_n a z_n |z|^{-n};  f ~ -c_n^p C |z|^{-k}
    R = cfg.R_trunc
    tail = (-2 * (n - 2) * cn ** (p + 1) * a * _far_coef(n, p) * _hemisphere_moment(n)
            * R ** (1 - k) / (k - 1))
    coef = boundary_coefficient(n, p, ac)
    area = sphere_area(n - 1)
    f2 = lambda s: (area * s ** (n - 2) * 2 * a / sphere_area(n) * (s * s + a * a) ** (-n / 2)
                    * coef * (1 + s * s) ** ((2 - k) / 2))
    b1, r1 = integrate.quad(f2, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
    b2, r2 = integrate.quad(f2, 1, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    val = v + tail + b1 + b2
    return float(val), float(qerr + abs(tail) * cfg.tail_safety / R + r1 + r2)


def htilde0_diagonal(n: int, t: float = 1.0, cfg: CriterionConfig | None = None):
    """H~_0(t e_n, t e_n) for p = 1, by the Green/Poisson representation.

    The source at p = 1 is c_n |z + t e_n|^{2-n} and the boundary data is
    a1 |y - t e_n|^{4-n}.  Returns (value, err, volume part, boundary part).
    """
    cfg = cfg or CriterionConfig()
    _check_np(n, 1.0)
    cn = green_constant(n)
    a1 = alpha_constants(n, 1.0).alpha1

    def fun(rho, zn):
        _, d2 = _dists(rho, zn, t)
        return _green0(t, rho, zn, n) * cn * d2 ** (2 - n)

    v, qerr = halfplane_integral(fun, n, t, cfg)
    R = cfg.R_trunc
    # integrand ~ 2(n-2) c_n^2 t z_n |z|^{2-2n}
    tail = 2 * (n - 2) * cn ** 2 * t * _hemisphere_moment(n) * R ** (3 - n) / (n - 3)
    vol = v + tail
    bnd = 2 * (n - 2) * cn * a1 * t ** (4 - n) * _ball_moment(n, 2 * n - 4)
    err = qerr + abs(tail) * cfg.tail_safety / R
    return vol + bnd, err, vol, bnd


def p1_scaling_check(n: int, cfg: CriterionConfig | None = None, t_values=(0.5, 1.0, 2.0)) -> dict:
    """Compare d/dx_n W0(e_n) with (4-n)/2 H~_0(e_n, e_n) at p = 1."""
    cfg = cfg or CriterionConfig()
    _check_np(n, 1.0)
    h, herr, vol, bnd = htilde0_diagonal(n, 1.0, cfg)
    factor = (4 - n) / 2
    w = w0_derivative(n, 1.0, cfg)
    scaled = []
    for t in t_values:
        ht, _, _, _ = htilde0_diagonal(n, t, cfg)
        scaled.append(ht * t ** (n - 4))
    scaled = np.array(scaled)
    ratio = w.total / (factor * h)
    return {
        "n": n,
        "factor": factor,
        "htilde0": h,
        "htilde0_err": herr,
        "volume_part": vol,
        "boundary_part": bnd,
        "scaling_route": factor * h,
        "w0_route": w.total,
        "w0_err": w.err,
        "ratio": ratio,
        "agree_2pct": abs(ratio - 1) <= 0.02,
        "t_values": list(t_values),
        "scaled": scaled.tolist(),
        "scaling_spread": float(np.ptp(scaled) / abs(np.mean(scaled))),
    }


def continuity_scan(n: int, p_grid, cfg: CriterionConfig | None = None) -> dict:
    """F and Gv on a p grid, difference quotients and the sign-persistence interval from p = 1."""
    cfg = cfg or CriterionConfig()
    p_grid = np.asarray(sorted(p_grid), dtype=float)
    if p_grid.size == 0 or p_grid[0] < 1 or p_grid[-1] >= (n - 1) / (n - 2):
        raise ValidationError("p_grid must lie in [1, (n-1)/(n-2))")
    rows = [criterion(n, float(p), cfg) for p in p_grid]
    F = np.array([r.F for r in rows])
    Gv = np.array([r.Gv for r in rows])
    dp = np.diff(p_grid)
    qF = np.abs(np.diff(F)) / dp if dp.size else np.array([])
    qG = np.abs(np.diff(Gv)) / dp if dp.size else np.array([])
    interval = None
    if abs(p_grid[0] - 1) < 1e-12 and rows[0].verdict == "holds":
        s0 = np.sign(rows[0].diff)
        end = p_grid[0]
        for r in rows:
            if r.verdict != "holds" or np.sign(r.diff) != s0:
                break
            end = r.p
        interval = (1.0, float(end))
    return {
        "n": n,
        "rows": rows,
        "F": F,
        "Gv": Gv,
        "finite": bool(np.all(np.isfinite(F)) and np.all(np.isfinite(Gv))),
        "max_quotient_F": float(qF.max()) if qF.size else 0.0,
        "max_quotient_G": float(qG.max()) if qG.size else 0.0,
        "interval": interval,
    }


def rescaled_convergence_probe(kappa_grid, n: int, p: float, dom: BallDomain | None = None,
                               offsets=(-0.2, -0.1, 0.0, 0.1, 0.2), hs_cfg: CriterionConfig | None = None,
                               ball_cfg: SingularQuadConfig | None = None) -> dict:
    """sup over an axial patch of |W_kappa - W0|, W_kappa(z) = H~(kappa z, kappa e_n) kappa^{(n-2)p-2}.

    The ball is tangent to {x_n = 0} at the origin, so kappa e_n approaches the
    boundary along the inner normal.  The patch is the segment (1 + s) e_n.
    """
    _check_np(n, p)
    k = (n - 2) * p
    en = np.zeros(n)
    en[-1] = 1.0
    dom = dom or BallDomain(n, center=en, radius=1.0)
    if abs(np.linalg.norm(dom.c) - dom.radius) > 1e-12 or abs(np.dot(dom.c, en) - dom.radius) > 1e-12:
        raise ValidationError("the ball must be tangent to {x_n = 0} at the origin")
    ac = alpha_constants(n, p)
    hs_cfg = hs_cfg or CriterionConfig()
    w0 = [w0_value(1 + s, n, p, hs_cfg) for s in offsets]
    w0v = np.array([w[0] for w in w0])
    w0e = np.array([w[1] for w in w0])
    dists, errs, table = [], [], []
    for kap in kappa_grid:
        vals, qerrs = [], []
        for s in offsets:
            h = htilde(kap * (1 + s) * en, kap * en, dom, p, ac, ball_cfg)
            vals.append(h.value * kap ** (k - 2))
            qerrs.append(h.quad_error * kap ** (k - 2))
        vals = np.array(vals)
        dev = np.abs(vals - w0v)
        dists.append(float(dev.max()))
        errs.append(float(np.max(qerrs) + w0e.max()))
        table.append(vals)
    dists = np.array(dists)
    errs = np.array(errs)
    monotone = bool(np.all(np.diff(dists) < 0))
    noisy = bool(np.any(errs > 0.1 * dists))
    return {
        "kappa": list(kappa_grid),
        "offsets": list(offsets),
        "w0": w0v,
        "w_kappa": np.array(table),
        "distance": dists,
        "err": errs,
        "decreasing": monotone,
        "inconclusive": noisy,
    }
