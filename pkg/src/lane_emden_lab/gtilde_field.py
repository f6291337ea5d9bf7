"""The iterated Green potential G~(x, y) = ∫ G(x, z) G(z, y)^p dz on a ball and its regular part H~.

H~ is the potential minus its explicit singular part,

    low branch  (p < (n-1)/(n-2)):  H~ = a1 |x-y|^{2-(n-2)p} - G~
    high branch (p >= (n-1)/(n-2)): H~ = a1 |x-y|^{2-(n-2)p} - a2 H(x,y) |x-y|^{n-(n-2)p} - G~

Away from the diagonal G~ is computed by direct quadrature.  Near the diagonal
H~ is computed from its own boundary value problem, -Δ_x H~ = f_y in the ball
with H~ = g_y on the sphere, i.e.

    H~(x, y) = ∫ G(x, z) f_y(z) dz + ∫ K(x, w) g_y(w) dS(w),

whose integrands are at most weakly singular, so no cancellation between
large terms is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .common import ConvergenceError, ValidationError
from .greens_ball import (BallDomain, green_fn, green_grad, regular_part, regular_part_grad,
                          poisson_kernel, poisson_kernel_grad)
from .quadrature import QuadConfig, ball_polar_integral, make_frame, smooth_cutoff, sphere_integral

__all__ = [
    "AlphaConstants",
    "GtildeEval",
    "HtildeEval",
    "SingularQuadConfig",
    "branch",
    "alpha_constants",
    "source_density",
    "boundary_data",
    "singular_part",
    "gtilde",
    "htilde",
    "htilde_direct",
    "gtilde_from_htilde",
    "boundary_growth_scan",
    "GrowthReport",
]


@dataclass
class SingularQuadConfig(QuadConfig):
    tol: float = 1e-6           # absolute error target for reported values


@dataclass
class AlphaConstants:
    alpha1: float
    alpha2: float
    n: int
    p: float
    convention: str = "pde_consistent"
    alpha1_literal: float = float("nan")
    alpha2_literal: float = float("nan")
    sign_discrepancy: bool = False


@dataclass
class GtildeEval:
    value: float
    grad_x: np.ndarray | None
    quad_error: float


@dataclass
class HtildeEval:
    value: float
    grad_x: np.ndarray | None
    branch: str
    quad_error: float
    grad_error: float = float("nan")


def branch(n: int, p: float) -> str:
    return "low" if p < (n - 1) / (n - 2) else "high"


def alpha_constants(n: int, p: float, convention: str = "pde_consistent") -> AlphaConstants:
    """Coefficients of the explicit singular part of G~.

    pde_consistent: a1 solves -Δ(a1|x|^{2-(n-2)p}) = c_n^p |x|^{-(n-2)p}, i.e.
    a1 [(n-2)p-2][n-(n-2)p] = c_n^p, and a2 cancels the next singular term
    p c_n^{p-1} H |x|^{-(n-2)(p-1)} of -Δ H~.  The 'literal' convention carries
    the printed denominators [(n-2)p-2][(n-2)p-n] and [(n-2)p-n][(n-2)p-2n+2].
    """
    if n < 3:
        raise ValidationError("dimension must be at least 3")
    if not 1 <= p < n / (n - 2):
        raise ValidationError(f"need 1 <= p < n/(n-2) = {n / (n - 2):.6g}")
    k = (n - 2) * p
    if abs(k - 2) < 1e-12:
        raise ValidationError("(n-2)p = 2: the singular part is logarithmic (degenerate case)")
    cn = 1.0 / ((n - 2) * 2 * math.pi ** (n / 2) / math.gamma(n / 2))
    m = n - k
    a1 = cn ** p / ((k - 2) * m)
    a2 = -p * cn ** (p - 1) / (m * (m + n - 2))
    a1_lit = cn ** p / ((k - 2) * (k - n))
    a2_lit = p * cn ** (p - 1) / ((k - n) * (k - 2 * n + 2))
    disc = (np.sign(a1) != np.sign(a1_lit)) or (np.sign(a2) != np.sign(a2_lit))
    if convention == "pde_consistent":
        return AlphaConstants(a1, a2, n, p, convention, a1_lit, a2_lit, bool(disc))
    if convention == "literal":
        return AlphaConstants(a1_lit, a2_lit, n, p, "literal", a1_lit, a2_lit, bool(disc))
    raise ValidationError(f"unknown convention {convention!r}")


def _pair_dist(x, y):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return diff, np.sqrt(np.sum(diff * diff, axis=-1))


def _power_gap(cn, rho, Hv, p, n):
    """c_n^p rho^{-(n-2)p} - (c_n rho^{2-n} - H)^p without cancellation near rho = 0."""
    t = Hv * rho ** (n - 2) / cn
    lead = cn ** p * rho ** (-(n - 2) * p)
    with np.errstate(invalid="ignore"):
        out = -lead * np.expm1(p * np.log1p(-np.minimum(t, 1.0)))
    return np.where(t < 1.0, out, lead)


def source_density(z, y, dom: BallDomain, p: float, ac: AlphaConstants):
    """f_y(z) = -Δ_z H~(z, y) for z in the ball."""
    n, cn = dom.n, dom.cn
    diff, rho = _pair_dist(z, y)
    Hv = regular_part(z, y, dom)
    f = _power_gap(cn, rho, Hv, p, n)
    if branch(n, p) == "high":
        m = n - (n - 2) * p
        gH = regular_part_grad(z, y, dom)
        f = f + ac.alpha2 * m * rho ** (m - 2) * ((m + n - 2) * Hv
                                                   + 2 * np.sum(gH * diff, axis=-1))
    return f


def boundary_data(w, y, dom: BallDomain, p: float, ac: AlphaConstants):
    """H~(w, y) for w on the sphere, where G~ = 0 and H = c_n|w-y|^{2-n}."""
    n = dom.n
    _, rho = _pair_dist(w, y)
    coef = ac.alpha1 - (dom.cn * ac.alpha2 if branch(n, p) == "high" else 0.0)
    return coef * rho ** (2 - (n - 2) * p)


def singular_part(x, y, dom: BallDomain, p: float, ac: AlphaConstants, grad=False):
    """S(x, y) with G~ = S - H~; optionally with ∇_x S."""
    n = dom.n
    diff, rho = _pair_dist(x, y)
    k = (n - 2) * p
    val = ac.alpha1 * rho ** (2 - k)
    g = ac.alpha1 * (2 - k) * rho ** (-k) * diff
    if branch(n, p) == "high":
        m = n - k
        Hv = regular_part(x, y, dom)
        val = val - ac.alpha2 * Hv * rho ** m
        g = g - ac.alpha2 * (regular_part_grad(x, y, dom) * rho ** m
                             + Hv * m * rho ** (m - 2) * diff)
    return (val, g) if grad else val


# -- volume integrals with one or two point singularities --------------------------------

def _theta_specials(dom, origin, e1, target=None, width=None):
    out = []
    d = float(dom.dist(origin))
    if d < 0.5 * dom.radius:
        out.append((math.pi / 2, 0.2 * math.sqrt(d / dom.radius) * 0.5))
        out.append((0.0, 0.2 * d / dom.radius))
    if target is not None:
        v = np.asarray(target) - origin
        L = np.linalg.norm(v)
        if L > 0:
            th = math.acos(np.clip(np.dot(v, e1) / L, -1, 1))
            out.append((th, 0.2 * width / L))
    return out


def _two_point_volume(dom, x, y, kernel, cfg, vector=False):
    """∫_B kernel(Z) dz where kernel is singular at x (order 2-n or 1-n) and possibly at y."""
    x = np.asarray(x, dtype=float)
    n = dom.n
    c = dom.c
    R = dom.radius
    err = 0.0
    same = y is None or np.linalg.norm(np.asarray(y) - x) <= 1e-13 * R
    if same:
        axis = x - c if np.linalg.norm(x - c) > 1e-14 * R else np.eye(n)[0]
        fr = make_frame(n, axis)
        val, e = ball_polar_integral(lambda Z, r, w: kernel(Z), x, c, R, fr, cfg,
                                     theta_specials=_theta_specials(dom, x, fr.e1))
        return val, float(np.max(np.abs(e)))

    y = np.asarray(y, dtype=float)
    sep = np.linalg.norm(y - x)
    dy = float(dom.dist(y))
    delta = 0.5 * min(sep, dy)

    def chi(Z):
        s = np.sqrt(np.sum((Z - y) ** 2, axis=-1)) / delta
        return smooth_cutoff(2.0 * s - 1.0)

    if np.linalg.norm(x - c) > 1e-14 * R:
        fr = make_frame(n, x - c, y - x)
    else:
        fr = make_frame(n, y - x)
    ts = _theta_specials(dom, x, fr.e1, y, delta)
    ps = []
    if not fr.axisymmetric:
        vy = y - x
        sin_t = np.linalg.norm(vy - np.dot(vy, fr.e1) * fr.e1) / sep
        ps = [(0.0, 0.2 * delta / (sep * max(sin_t, 1e-3)))]
    L_y = _ray_len(x, (y - x) / sep, c, R)
    rs = [(sep / L_y, 0.2 * delta / L_y)]

    def outer(Z, r, w):
        k = kernel(Z)
        wgt = 1.0 - chi(Z)
        return k * (wgt[..., None] if vector else wgt)

    # the y singularity is cut out, so along rays from x the integrand is r^{2-n} times smooth
    ocfg = replace(cfg, radial_smallest=max(cfg.radial_smallest, 1e-2))
    v1, e1 = ball_polar_integral(outer, x, c, R, fr, ocfg, theta_specials=ts, phi_specials=ps,
                                 radial_specials=rs)
    fr2 = make_frame(n, x - y, c - y)

    def inner(Z, r, w):
        k = kernel(Z)
        wgt = chi(Z)
        return k * (wgt[..., None] if vector else wgt)

    v2, e2 = ball_polar_integral(inner, y, c, R, fr2, cfg, max_length=delta)
    err = float(np.max(np.abs(e1)) + np.max(np.abs(e2)))
    return v1 + v2, err


def _ray_len(origin, w, c, R):
    oc = origin - c
    b = np.dot(w, oc)
    return -b + math.sqrt(max(b * b - (np.dot(oc, oc) - R * R), 0.0))


def _poisson_part(dom, x, y, gfun, cfg, grad=False):
    n, c, R = dom.n, dom.c, dom.radius
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.linalg.norm(x - c) > 1e-14 * R:
        fr = make_frame(n, x - c, y - c)
    elif np.linalg.norm(y - c) > 1e-14 * R:
        fr = make_frame(n, y - c)
    else:
        fr = make_frame(n, np.eye(n)[0])
    ts = []
    dx = float(dom.dist(x))
    dy = float(dom.dist(y))
    ts.append((0.0, 0.2 * dx / R))
    if np.linalg.norm(y - c) > 1e-14 * R:
        th = math.acos(np.clip(np.dot(y - c, fr.e1) / np.linalg.norm(y - c), -1, 1))
        ts.append((th, 0.2 * dy / R))
    ps = [(0.0, 0.2 * dy / R)] if not fr.axisymmetric else []
    if grad:
        f = lambda W: poisson_kernel_grad(x, W, dom) * gfun(W)[:, None]
    else:
        f = lambda W: poisson_kernel(x, W, dom) * gfun(W)
    val, e = sphere_integral(f, c, R, fr, cfg, theta_specials=ts, phi_specials=ps)
    return val, float(np.max(np.abs(e)))


def _check(dom, *pts):
    for q in pts:
        if dom.dist(q) <= 0:
            raise ValidationError("points must lie strictly inside the ball")


def gtilde(x, y, dom: BallDomain, p: float, cfg: SingularQuadConfig | None = None,
           with_grad: bool = False, strict: bool = False) -> GtildeEval:
    """Direct quadrature of ∫_B G(x,z) G(z,y)^p dz (and of its x-gradient)."""
    cfg = cfg or SingularQuadConfig()
    n = dom.n
    if not 1 <= p < n / (n - 2):
        raise ValidationError("need 1 <= p < n/(n-2) for an integrable product")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check(dom, x, y)
    if np.linalg.norm(x - y) <= 1e-13 * dom.radius:
        raise ValidationError("x = y: use htilde for the diagonal")

    def kern(Z):
        g = np.maximum(green_fn(Z, y, dom), 0.0) ** p
        return green_fn(x, Z, dom) * g

    val, err = _two_point_volume(dom, x, y, kern, cfg)
    grad = None
    if with_grad:
        def kern_g(Z):
            g = np.maximum(green_fn(Z, y, dom), 0.0) ** p
            return green_grad(x, Z, dom) * g[..., None]
        grad, gerr = _two_point_volume(dom, x, y, kern_g, cfg, vector=True)
        err = max(err, gerr)
    if strict and err > cfg.tol:
        raise ConvergenceError(f"G~ quadrature error {err:.3g} above tol {cfg.tol:.3g}",
                               partial=GtildeEval(float(val), grad, err))
    return GtildeEval(float(val), grad, float(err))


def htilde(x, y, dom: BallDomain, p: float, ac: AlphaConstants | None = None,
           cfg: SingularQuadConfig | None = None, with_grad: bool = False) -> HtildeEval:
    """H~(x, y) from its boundary value problem; valid on and off the diagonal."""
    cfg = cfg or SingularQuadConfig()
    n = dom.n
    ac = ac or alpha_constants(n, p)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check(dom, x, y)
    br = branch(n, p)

    f = lambda Z: green_fn(x, Z, dom) * source_density(Z, y, dom, p, ac)
    vol, e1 = _two_point_volume(dom, x, y, f, cfg)
    gfun = lambda W: boundary_data(W, y, dom, p, ac)
    bnd, e2 = _poisson_part(dom, x, y, gfun, cfg)
    grad = None
    gerr = float("nan")
    if with_grad:
        fg = lambda Z: green_grad(x, Z, dom) * source_density(Z, y, dom, p, ac)[..., None]
        gv, ge1 = _two_point_volume(dom, x, y, fg, cfg, vector=True)
        gb, ge2 = _poisson_part(dom, x, y, gfun, cfg, grad=True)
        grad = gv + gb
        gerr = ge1 + ge2
    return HtildeEval(float(vol + bnd), grad, br, float(e1 + e2), gerr)


def htilde_direct(x, y, dom, p, ac=None, cfg=None) -> HtildeEval:
    """H~ = S - G~ with G~ by direct quadrature (off-diagonal cross-check)."""
    ac = ac or alpha_constants(dom.n, p)
    g = gtilde(x, y, dom, p, cfg)
    return HtildeEval(float(singular_part(x, y, dom, p, ac)) - g.value, None,
                      branch(dom.n, p), g.quad_error)


def gtilde_from_htilde(x, y, dom, p, ac=None, cfg=None) -> GtildeEval:
    """G~ = S - H~ through the boundary value route."""
    ac = ac or alpha_constants(dom.n, p)
    h = htilde(x, y, dom, p, ac, cfg)
    return GtildeEval(float(singular_part(x, y, dom, p, ac)) - h.value, None, h.quad_error)


@dataclass
class GrowthReport:
    n: int
    p: float
    d: np.ndarray
    direct: np.ndarray        # n_x . ∇_x H~(x, y)|_{y=x}
    diagonal: np.ndarray      # 1/2 d/ds H~(x(s), x(s)) along the outward normal
    errors: np.ndarray
    slope_direct: float
    slope_diagonal: float
    expected_slope: float
    route_gap: np.ndarray     # |direct/diagonal - 1|
    reliable: bool
    rows: list = field(default_factory=list)

    @property
    def positive(self) -> bool:
        return bool(np.all(self.direct > 0))


def _slope(d, vals):
    A = np.column_stack([np.ones_like(d), np.log(d)])
    coef, *_ = np.linalg.lstsq(A, np.log(np.abs(vals)), rcond=None)
    return float(coef[1])


def boundary_growth_scan(dom: BallDomain, p: float, d_grid, cfg: SingularQuadConfig | None = None,
                         direction=None, fd_rel: float = 0.02, slope_tol: float = 0.1) -> GrowthReport:
    """Normal derivative of x -> H~(x, x) behaviour as x approaches the boundary along a ray."""
    cfg = cfg or SingularQuadConfig()
    n = dom.n
    ac = alpha_constants(n, p)
    d_grid = np.asarray(sorted(d_grid, reverse=True), dtype=float)
    if np.any(d_grid <= 0) or np.any(d_grid >= dom.radius / 4 + 1e-15):
        raise ValidationError("d_grid must lie in (0, radius/4)")
    e = np.zeros(n)
    e[0] = 1.0
    if direction is not None:
        e = np.asarray(direction, dtype=float)
        e = e / np.linalg.norm(e)
    direct, diag, errs, rows = [], [], [], []
    for d in d_grid:
        x = dom.c + (dom.radius - d) * e
        h = htilde(x, x, dom, p, ac, cfg, with_grad=True)
        dn = float(np.dot(h.grad_x, e))
        step = fd_rel * d
        xp = dom.c + (dom.radius - d + step) * e
        xm = dom.c + (dom.radius - d - step) * e
        hp = htilde(xp, xp, dom, p, ac, cfg)
        hm = htilde(xm, xm, dom, p, ac, cfg)
        dg = 0.5 * (hp.value - hm.value) / (2 * step)
        err = h.grad_error + (hp.quad_error + hm.quad_error) / (4 * step)
        direct.append(dn)
        diag.append(dg)
        errs.append(err)
        rows.append({"d": float(d), "value": h.value, "derivative": dn, "diagonal": dg,
                     "error": err})
    direct, diag, errs = map(np.array, (direct, diag, errs))
    s1, s2 = _slope(d_grid, direct), _slope(d_grid, diag)
    for r in rows:
        r["slope"] = s1
    reliable = bool(np.all(errs < 0.01 * np.abs(direct)))
    return GrowthReport(n, p, d_grid, direct, diag, errs, s1, s2, 1 - (n - 2) * p,
                        np.abs(direct / diag - 1), reliable, rows)
