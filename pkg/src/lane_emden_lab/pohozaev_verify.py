"""Local Pohozaev identity and Green flux checks on spheres.

For -Δu = v^p, -Δv = u^q on a neighbourhood of a ball D and an axis j,

    L_j = -∮(∂_ν u ∂_j v + ∂_ν v ∂_j u) + ∮(∇u·∇v) ν_j
    R_j = ∮ v^{p+1}/(p+1) ν_j + ∮ u^{q+1}/(q+1) ν_j

agree.  The surface integrals use a tensor rule on S^{n-1}: Gauss-Gegenbauer
nodes in the cosines of the polar angles and the trapezoid rule in the
azimuth, exact for polynomials of degree < 2*order in each angular variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import interpolate, special

from .common import ValidationError

__all__ = [
    "SurfaceQuadrature",
    "sphere_rule",
    "default_order",
    "PohozaevResult",
    "pohozaev_residual",
    "pohozaev_convergence",
    "FluxReport",
    "flux_constancy",
    "bubble_sampler",
    "radial_sampler",
]

# sampler(points (N, n)) -> (values (N,), gradients (N, n))
Sampler = Callable[[np.ndarray], tuple]


@dataclass
class SurfaceQuadrature:
    center: np.ndarray
    radius: float
    nodes: np.ndarray      # points on the sphere, shape (N, n)
    normals: np.ndarray    # outward unit normals
    weights: np.ndarray    # surface weights, sum = |S^{n-1}| radius^{n-1}
    order: int

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _unit_sphere(n: int, order: int):
    """Directions and weights of the product rule on S^{n-1}."""
    m_az = 2 * order
    phi = 2 * np.pi * np.arange(m_az) / m_az
    dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    w = np.full(m_az, 2 * np.pi / m_az)
    # add one polar angle at a time: S^{k-1} -> S^k with weight sin^{k-1}
    for k in range(2, n):
        t, wt = special.roots_jacobi(order, (k - 2) / 2, (k - 2) / 2)
        s = np.sqrt(1 - t ** 2)
        new = np.concatenate([np.repeat(t, len(w))[:, None],
                              np.kron(s[:, None], dirs)], axis=1)
        w = np.kron(wt, w)
        dirs = new
    return dirs, w


def default_order(n: int) -> int:
    # node count grows like order^(n-1); keep round-off of low moments near 1e-13
    return {2: 32, 3: 16, 4: 12, 5: 9}.get(n, 6)


def sphere_rule(n: int, center, radius: float, order: int | None = None) -> SurfaceQuadrature:
    if n < 2:
        raise ValidationError("sphere rules need n >= 2")
    if radius <= 0:
        raise ValidationError("radius must be positive")
    if order is None:
        order = default_order(n)
    if order < 1:
        raise ValidationError("order must be >= 1")
    c = np.asarray(center, dtype=float)
    if c.shape != (n,):
        raise ValidationError(f"center must have {n} components")
    dirs, w = _unit_sphere(n, order)
    return SurfaceQuadrature(c, float(radius), c + radius * dirs, dirs,
                             w * radius ** (n - 1), order)


@dataclass
class PohozaevResult:
    L: float
    R: float
    residual: float
    scale: float          # size of the individual surface terms

    @property
    def relative(self) -> float:
        return abs(self.residual) / self.scale if self.scale > 0 else abs(self.residual)


def _eval(f: Sampler, pts, n):
    try:
        val, grad = f(pts)
    except Exception as exc:   # noqa: BLE001 - sampler failures are reported uniformly
        raise ValidationError(f"sampler failed on the sphere: {exc}") from exc
    val = np.asarray(val, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if val.shape != (len(pts),) or grad.shape != (len(pts), n):
        raise ValidationError("sampler returned arrays of the wrong shape")
    if not (np.all(np.isfinite(val)) and np.all(np.isfinite(grad))):
        raise ValidationError("sampler returned non-finite values on the sphere")
    return val, grad


def _spow(x, e):
    return np.sign(x) * np.abs(x) ** e


def pohozaev_residual(u: Sampler, v: Sampler, quad: SurfaceQuadrature, j: int,
                      p: float, q: float) -> PohozaevResult:
    n = quad.n
    if not 0 <= j < n:
        raise ValidationError(f"axis index must lie in [0, {n})")
    uu, gu = _eval(u, quad.nodes, n)
    vv, gv = _eval(v, quad.nodes, n)
    nu = quad.normals
    dnu_u = np.einsum("ij,ij->i", gu, nu)
    dnu_v = np.einsum("ij,ij->i", gv, nu)
    flux = -(dnu_u * gv[:, j] + dnu_v * gu[:, j])
    cross = np.einsum("ij,ij->i", gu, gv) * nu[:, j]
    pot = (_spow(vv, p + 1) / (p + 1) + _spow(uu, q + 1) / (q + 1)) * nu[:, j]
    L = quad.integrate(flux + cross)
    R = quad.integrate(pot)
    scale = max(quad.integrate(np.abs(flux)), quad.integrate(np.abs(cross)),
                quad.integrate(np.abs(pot)))
    return PohozaevResult(L, R, L - R, scale)


def pohozaev_convergence(u: Sampler, v: Sampler, n: int, center, radius: float, j: int,
                         p: float, q: float, orders=(4, 8, 16, 32)) -> list:
    """(order, node count, |residual|) along a sequence of rules."""
    out = []
    for m in orders:
        quad = sphere_rule(n, center, radius, m)
        res = pohozaev_residual(u, v, quad, j, p, q)
        out.append((m, len(quad.weights), abs(res.residual)))
    return out


@dataclass
class FluxReport:
    radii: np.ndarray
    values: np.ndarray
    spread: float
    quad_error: float     # largest change when the rule order is doubled


def flux_constancy(A: Sampler, B: Sampler, n: int, center, r_list, j: int,
                   order: int = 24, singular_point=None) -> FluxReport:
    """I(r) = ∮ ∂_νA ∂_jB + ∂_νB ∂_jA - (∇A·∇B) ν_j over spheres about center.

    The symmetric flux is divergence free whenever A and B are harmonic between
    the spheres, so I(r) does not depend on r.  With a singular point the radii
    must not straddle it.
    """
    radii = np.asarray(r_list, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0):
        raise ValidationError("r_list must contain positive radii")
    c = np.asarray(center, dtype=float)
    if singular_point is not None:
        dist = float(np.linalg.norm(np.asarray(singular_point, float) - c))
        if np.any(np.abs(radii - dist) < 1e-9):
            raise ValidationError("a sphere passes through the singular point")
        if radii.min() < dist < radii.max():
            raise ValidationError("the radii straddle the singular point")

    def one(r, m):
        quad = sphere_rule(n, c, r, m)
        _, ga = _eval(A, quad.nodes, n)
        _, gb = _eval(B, quad.nodes, n)
        nu = quad.normals
        da = np.einsum("ij,ij->i", ga, nu)
        db = np.einsum("ij,ij->i", gb, nu)
        f = da * gb[:, j] + db * ga[:, j] - np.einsum("ij,ij->i", ga, gb) * nu[:, j]
        return quad.integrate(f)

    vals = np.array([one(r, order) for r in radii])
    fine = np.array([one(r, 2 * order) for r in radii])
    spread = float(vals.max() - vals.min())
    return FluxReport(radii, vals, spread, float(np.max(np.abs(fine - vals))))


def bubble_sampler(n: int):
    """Exact pair u = v = (1 + r^2/(n(n-2)))^{-(n-2)/2}, solving -Δu = u^{(n+2)/(n-2)}."""
    k = n * (n - 2)

    def f(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        base = 1 + np.sum(x * x, axis=1) / k
        val = base ** (-(n - 2) / 2)
        grad = -(n - 2) / k * base[:, None] ** (-n / 2) * x
        return val, grad

    return f, f


def radial_sampler(grid, u, du, v, dv, n: int, p: float, q: float, center=None):
    """Samplers for a radial solution pair known by node values and derivatives.

    Values use cubic Hermite interpolation with the node derivatives; the
    derivatives are interpolated the same way with second derivatives taken
    from the equations, so the gradient keeps the accuracy of the collocation.
    """
    r = np.asarray(grid, dtype=float)
    u, du, v, dv = (np.asarray(a, dtype=float) for a in (u, du, v, dv))
    with np.errstate(divide="ignore", invalid="ignore"):
        d2u = -_spow(v, p) - (n - 1) * np.where(r > 0, du / r, 0.0)
        d2v = -_spow(u, q) - (n - 1) * np.where(r > 0, dv / r, 0.0)
    # at the origin u'' = -v^p / n by l'Hopital
    d2u[r == 0] = -_spow(v[r == 0], p) / n
    d2v[r == 0] = -_spow(u[r == 0], q) / n
    su = interpolate.CubicHermiteSpline(r, u, du)
    sdu = interpolate.CubicHermiteSpline(r, du, d2u)
    sv = interpolate.CubicHermiteSpline(r, v, dv)
    sdv = interpolate.CubicHermiteSpline(r, dv, d2v)
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    rmax = r[-1]

    def make(sval, sder):
        def f(x):
            x = np.atleast_2d(np.asarray(x, dtype=float)) - c
            rho = np.linalg.norm(x, axis=1)
            if np.any(rho > rmax * (1 + 1e-12)):
                raise ValidationError("point outside the solution domain")
            safe = np.where(rho > 0, rho, 1.0)
            grad = (sder(rho) / safe)[:, None] * x
            return sval(rho), grad
        return f

    return make(su, sdu), make(sv, sdv)
