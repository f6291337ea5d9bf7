"""Green's function of -Δ with Dirichlet data on a ball, its regular part and Robin function.

For a ball B(c, R) and x' = x - c, y' = y - c the image construction gives

    G(x, y) = c_n |x - y|^{2-n} - H(x, y),
    H(x, y) = c_n (|x'|^2 |y'|^2 / R^2 - 2 x'.y' + R^2)^{(2-n)/2},

which is smooth and symmetric on the open ball (no division by |y'|).
Array functions broadcast over leading axes; the last axis holds coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .common import ValidationError, green_constant, sphere_area

__all__ = [
    "BallDomain",
    "GreensEval",
    "BoundaryFrame",
    "greens",
    "robin",
    "reflected_point",
    "kelvin_image",
    "regular_part",
    "regular_part_grad",
    "green_fn",
    "green_grad",
    "poisson_kernel",
    "poisson_kernel_grad",
    "verify_boundary_asymptotics",
    "robin_lower_bound_check",
    "poisson_bound_report",
    "difference_bound_report",
    "fd_laplacian",
]


@dataclass(frozen=True)
class BallDomain:
    n: int
    center: tuple = None
    radius: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValidationError("dimension must be at least 3")
        if not self.radius > 0:
            raise ValidationError("radius must be positive")
        c = (0.0,) * self.n if self.center is None else tuple(float(t) for t in self.center)
        if len(c) != self.n:
            raise ValidationError("center has the wrong dimension")
        object.__setattr__(self, "center", c)

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center)

    @property
    def cn(self) -> float:
        return green_constant(self.n)

    def dist(self, x):
        """Distance to the boundary (negative outside)."""
        return self.radius - np.linalg.norm(np.asarray(x, dtype=float) - self.c, axis=-1)

    def contains(self, x, strict=True):
        d = self.dist(x)
        return d > 0 if strict else d >= 0

    def point_on_ray(self, d, direction=None):
        e = np.zeros(self.n)
        e[0] = 1.0
        if direction is not None:
            e = np.asarray(direction, dtype=float)
            e = e / np.linalg.norm(e)
        return self.c + (self.radius - d) * e


@dataclass
class GreensEval:
    G: float
    grad_x_G: np.ndarray
    H: float
    grad_x_H: np.ndarray
    c_n: float


@dataclass
class BoundaryFrame:
    d: float
    n_x: np.ndarray
    x_star: np.ndarray


def _q(x, y, dom):
    xs = np.asarray(x, dtype=float) - dom.c
    ys = np.asarray(y, dtype=float) - dom.c
    R2 = dom.radius ** 2
    x2 = np.sum(xs * xs, axis=-1)
    y2 = np.sum(ys * ys, axis=-1)
    xy = np.sum(xs * ys, axis=-1)
    return x2 * y2 / R2 - 2 * xy + R2, xs, ys, y2


def regular_part(x, y, dom: BallDomain):
    Q, *_ = _q(x, y, dom)
    return dom.cn * Q ** ((2 - dom.n) / 2)


def regular_part_grad(x, y, dom: BallDomain):
    """∇_x H(x, y)."""
    Q, xs, ys, y2 = _q(x, y, dom)
    n = dom.n
    fac = (2 - n) * dom.cn * Q ** (-n / 2)
    return fac[..., None] * (y2[..., None] * xs / dom.radius ** 2 - ys)


def green_fn(x, y, dom: BallDomain):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    return dom.cn * r ** (2 - dom.n) - regular_part(x, y, dom)


def green_grad(x, y, dom: BallDomain):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    sing = (2 - dom.n) * dom.cn * diff / r[..., None] ** dom.n
    return sing - regular_part_grad(x, y, dom)


def _check_inside(dom, *pts):
    for p in pts:
        if np.any(dom.dist(p) <= 0):
            raise ValidationError("point not strictly inside the ball")


def greens(x, y, dom: BallDomain) -> GreensEval:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_inside(dom, x, y)
    if np.allclose(x, y, rtol=0, atol=1e-15):
        raise ValidationError("x = y is the singular point of G")
    H = float(regular_part(x, y, dom))
    gH = regular_part_grad(x, y, dom)
    return GreensEval(float(green_fn(x, y, dom)), green_grad(x, y, dom), H, gH, dom.cn)


def robin(x, dom: BallDomain):
    """H(x, x) and ∇_1 H(x, x) := ∇_x H(x, y)|_{y=x}."""
    x = np.asarray(x, dtype=float)
    _check_inside(dom, x)
    return float(regular_part(x, x, dom)), regular_part_grad(x, x, dom)


def reflected_point(x, dom: BallDomain) -> BoundaryFrame:
    """Distance to the boundary, outward direction and x* = x + 2 d n_x."""
    x = np.asarray(x, dtype=float)
    _check_inside(dom, x)
    off = x - dom.c
    rho = np.linalg.norm(off)
    if rho < 1e-14 * dom.radius:
        raise ValidationError("the center has no unique nearest boundary direction")
    nx = off / rho
    d = dom.radius - rho
    return BoundaryFrame(float(d), nx, x + 2 * d * nx)


def kelvin_image(y, dom: BallDomain):
    off = np.asarray(y, dtype=float) - dom.c
    return dom.c + dom.radius ** 2 * off / np.dot(off, off)


def poisson_kernel(x, w, dom: BallDomain):
    """K(x, w) = (R^2 - |x-c|^2) / (R |S^{n-1}| |x - w|^n) for w on the sphere."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    xs = x - dom.c
    num = dom.radius ** 2 - np.sum(xs * xs, axis=-1)
    r = np.sqrt(np.sum((x - w) ** 2, axis=-1))
    return num / (dom.radius * sphere_area(dom.n) * r ** dom.n)


def poisson_kernel_grad(x, w, dom: BallDomain):
    """∇_x K(x, w)."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    xs = x - dom.c
    num = dom.radius ** 2 - np.sum(xs * xs, axis=-1)
    diff = x - w
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    k = 1.0 / (dom.radius * sphere_area(dom.n))
    return k * (-2 * xs / r[..., None] ** dom.n
                - dom.n * num[..., None] * diff / r[..., None] ** (dom.n + 2))


def fd_laplacian(f, x, h):
    """Central (2n+1)-point Laplacian of a scalar function at x."""
    x = np.asarray(x, dtype=float)
    f0 = f(x)
    tot = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        tot += f(x + e) - 2 * f0 + f(x - e)
    return tot / h ** 2


@dataclass
class AsymptoticsReport:
    d: np.ndarray
    ratio_H: np.ndarray          # H(x,x) / (c_n |x - x*|^{2-n})
    ratio_grad: np.ndarray       # n_x.∇_1H(x,x) / ((n-2) c_n (2d)^{1-n})
    bound_H: np.ndarray          # |H - c_n|x-x*|^{2-n}| / (d / |x-x*|^{n-2})
    bound_grad: np.ndarray       # |∇_1H + (n-2)c_n(x-x*)/|x-x*|^n| / (1 / |x-x*|^{n-2})
    rows: list = field(default_factory=list)

    def converges(self, tol=0.02, d_max=0.01):
        m = self.d <= d_max
        return bool(np.all(np.abs(self.ratio_H[m] - 1) <= tol)
                    and np.all(np.abs(self.ratio_grad[m] - 1) <= tol))


def verify_boundary_asymptotics(dom: BallDomain, d_grid, direction=None) -> AsymptoticsReport:
    """Compare the Robin function and its gradient with the reflected-point asymptotics."""
    d_grid = np.asarray(d_grid, dtype=float)
    if np.any(d_grid <= 0) or np.any(d_grid >= dom.radius / 4 + 1e-15):
        raise ValidationError("d_grid must lie in (0, radius/4]")
    n, cn = dom.n, dom.cn
    rH, rG, bH, bG, rows = [], [], [], [], []
    for d in d_grid:
        x = dom.point_on_ray(d, direction)
        fr = reflected_point(x, dom)
        Hxx, g1 = robin(x, dom)
        dist = np.linalg.norm(x - fr.x_star)
        lead_H = cn * dist ** (2 - n)
        lead_g = -(n - 2) * cn * (x - fr.x_star) / dist ** n
        rH.append(Hxx / lead_H)
        rG.append(np.dot(fr.n_x, g1) / ((n - 2) * cn * (2 * d) ** (1 - n)))
        bH.append(abs(Hxx - lead_H) / (d / dist ** (n - 2)))
        # eq. for the gradient with y = x: d(y)/(d(x)|x-y*|^{n-2}) = |x-x*|^{2-n}
        bG.append(np.linalg.norm(g1 - lead_g) * dist ** (n - 2))
        rows.append({"d": float(d), "ratio_H": rH[-1], "ratio_grad": rG[-1],
                     "bound_H": bH[-1], "bound_grad": bG[-1]})
    return AsymptoticsReport(d_grid, np.array(rH), np.array(rG), np.array(bH), np.array(bG), rows)


def robin_lower_bound_check(dom: BallDomain, d_grid, coefficient=None, direction=None):
    """Ratios n_x.∇_1H(x,x) / (coefficient * d^{1-n}) along a ray.

    The default coefficient is (n-2) c_n / 2.  Returns (ratios, all >= 1).
    """
    n, cn = dom.n, dom.cn
    k = (n - 2) * cn / 2 if coefficient is None else coefficient
    out = []
    for d in np.asarray(d_grid, dtype=float):
        x = dom.point_on_ray(d, direction)
        fr = reflected_point(x, dom)
        _, g1 = robin(x, dom)
        out.append(np.dot(fr.n_x, g1) / (k * d ** (1 - n)))
    out = np.array(out)
    return out, bool(np.all(out >= 1.0))


def poisson_bound_report(dom: BallDomain, n_x=40, n_w=400, seed=0):
    """sup over a sample grid of K(x,w) |x-w|^n / d(x) (bounded by 2/(R|S^{n-1}|) on a ball)."""
    rng = np.random.default_rng(seed)
    n = dom.n
    dirs = rng.normal(size=(n_x, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dvals = dom.radius * np.geomspace(1e-4, 0.999, n_x)
    xs = dom.c + (dom.radius - dvals)[:, None] * dirs
    ws = rng.normal(size=(n_w, n))
    ws = dom.c + dom.radius * ws / np.linalg.norm(ws, axis=1, keepdims=True)
    X, W = xs[:, None, :], ws[None, :, :]
    K = poisson_kernel(X, W, dom)
    ratio = K * np.linalg.norm(X - W, axis=-1) ** n / dom.dist(X)
    return float(ratio.max())


def difference_bound_report(dom: BallDomain, d_grid, n_x=64, seed=0):
    """Fitted constant C in |H(x,y) - c_n|x-y*|^{2-n}| <= C d(y)/|x-y*|^{n-2}.

    y runs along a ray at the given distances; x samples the ball.
    """
    rng = np.random.default_rng(seed)
    n = dom.n
    pts = rng.normal(size=(n_x, n))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts *= dom.radius * rng.uniform(0, 1, size=(n_x, 1)) ** (1 / n)
    xs = dom.c + pts
    worst = 0.0
    for d in np.asarray(d_grid, dtype=float):
        y = dom.point_on_ray(d)
        fr = reflected_point(y, dom)
        dist = np.linalg.norm(xs - fr.x_star, axis=-1)
        D = regular_part(xs, y, dom) - dom.cn * dist ** (2 - n)
        worst = max(worst, float(np.max(np.abs(D) * dist ** (n - 2) / d)))
    return worst
