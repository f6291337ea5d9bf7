"""Graded product Gauss rules for point-singular integrals over a ball and its sphere.

Volume integrals are written in polar coordinates about the singular point o,
z = o + r w, so the r^{n-1} Jacobian absorbs a |z-o|^{2-n} kernel.  Special
points (ball center, a second singular point) are assumed to lie in the plane
o + span(e1, e2); the integrand is then invariant under rotations fixing that
plane and the sphere S^{n-1} reduces to two angles

    w = cos(t) e1 + sin(t) (cos(f) e2 + sin(f) e3),   dS = |S^{n-3}| sin^{n-2}t sin^{n-3}f dt df,

or to one angle when all special points are on the e1 axis.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .common import panel_rule, sphere_area

__all__ = ["QuadConfig", "Frame", "make_frame", "graded_breaks", "ball_polar_integral",
           "sphere_integral", "smooth_cutoff"]


@dataclass
class QuadConfig:
    m: int = 8                  # Gauss nodes per panel, fine level is m + dm
    dm: int = 4
    ratio: float = 0.35         # geometric grading ratio
    radial_smallest: float = 1e-7   # finest radial panel, relative to the ray length
    theta_panels: int = 8
    phi_panels: int = 6
    chunk: int = 400_000        # max quadrature points evaluated at once


@dataclass
class Frame:
    e1: np.ndarray
    e2: np.ndarray | None
    e3: np.ndarray | None

    @property
    def axisymmetric(self) -> bool:
        return self.e2 is None


def _unit(v):
    return v / np.linalg.norm(v)


def make_frame(n: int, axis, other=None, tol=1e-12) -> Frame:
    """Frame with e1 along `axis`; e2 toward the component of `other` orthogonal to e1."""
    e1 = _unit(np.asarray(axis, dtype=float))
    if other is None:
        return Frame(e1, None, None)
    o = np.asarray(other, dtype=float)
    perp = o - np.dot(o, e1) * e1
    if np.linalg.norm(perp) <= tol * max(1.0, np.linalg.norm(o)):
        return Frame(e1, None, None)
    e2 = _unit(perp)
    return Frame(e1, e2, _orthogonal(e1, e2))


def _orthogonal(*vecs):
    """A unit vector orthogonal to the given orthonormal vectors."""
    n = vecs[0].size
    basis = np.eye(n)
    cand = basis[np.argmin(sum(np.abs(basis @ v) for v in vecs))]
    for v in vecs:
        cand = cand - np.dot(cand, v) * v
    return _unit(cand)


def graded_breaks(a, b, specials=(), base=4, ratio=0.35):
    """Uniform panels on [a, b] refined geometrically toward special points.

    specials: iterable of (point, smallest_panel_size).
    """
    pts = list(np.linspace(a, b, base + 1))
    for c, small in specials:
        if not (a - 1e-15 <= c <= b + 1e-15):
            continue
        small = max(small, 1e-15 * max(1.0, abs(b - a)))
        for side in (-1, 1):
            h = (b - a) / base
            while h > small:
                h *= ratio
                t = c + side * h
                if a < t < b:
                    pts.append(t)
        pts.append(min(max(c, a), b))
    pts = np.unique(np.asarray(pts))
    keep = np.concatenate([[True], np.diff(pts) > 1e-15 * max(1.0, b - a)])
    return pts[keep]


def smooth_cutoff(s):
    """C-infinity step: 1 for s <= 0, 0 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s < 1, np.exp(-1.0 / np.maximum(1 - s, 1e-300)), 0.0)
        b = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    return a / (a + b)


def _angular_rule(frame: Frame, n, theta_breaks, phi_breaks, m):
    t, wt = panel_rule(theta_breaks, m)
    if frame.axisymmetric:
        wt = wt * np.sin(t) ** (n - 2) * sphere_area(n - 1)
        perp = _orthogonal(frame.e1)
        dirs = np.cos(t)[:, None] * frame.e1 + np.sin(t)[:, None] * perp
        return dirs, wt
    f, wf = panel_rule(phi_breaks, m)
    T, F = np.meshgrid(t, f, indexing="ij")
    W = (wt[:, None] * wf[None, :] * np.sin(T) ** (n - 2) * np.sin(F) ** (n - 3)
         * sphere_area(n - 2))
    st = np.sin(T)
    dirs = (np.cos(T)[..., None] * frame.e1 + (st * np.cos(F))[..., None] * frame.e2
            + (st * np.sin(F))[..., None] * frame.e3)
    return dirs.reshape(-1, n), W.ravel()


def _ray_length(origin, dirs, center, radius):
    oc = origin - center
    b = dirs @ oc
    c = np.dot(oc, oc) - radius ** 2
    return -b + np.sqrt(np.maximum(b * b - c, 0.0))


def _evaluate(integrand, origin, dirs, wang, lengths, rel_nodes, rel_w, n, chunk):
    nr = rel_nodes.size
    per = max(1, chunk // nr)
    total = None
    for s in range(0, dirs.shape[0], per):
        d = dirs[s:s + per]
        L = lengths[s:s + per]
        r = L[:, None] * rel_nodes[None, :]
        Z = origin + r[..., None] * d[:, None, :]
        wr = L[:, None] * rel_w[None, :] * r ** (n - 1) * wang[s:s + per, None]
        vals = integrand(Z, r, d)
        part = np.tensordot(wr, vals, axes=([0, 1], [0, 1])) if vals.ndim > 2 else np.sum(wr * vals)
        total = part if total is None else total + part
    return total


def ball_polar_integral(integrand, origin, center, radius, frame: Frame, cfg: QuadConfig,
                        theta_specials=(), phi_specials=(), radial_specials=(),
                        max_length=None):
    """∫ integrand(z) dz over the ball (or over B(origin, max_length) when given).

    integrand(Z, r, w) receives points Z[..., n], radii r and directions w.
    Returns (fine value, |fine - coarse|).
    """
    origin = np.asarray(origin, dtype=float)
    n = origin.size
    tb = graded_breaks(0.0, math.pi, theta_specials, cfg.theta_panels, cfg.ratio)
    pb = graded_breaks(0.0, math.pi, phi_specials, cfg.phi_panels, cfg.ratio)
    rb = graded_breaks(0.0, 1.0, [(0.0, cfg.radial_smallest), (1.0, 1e-3)] + list(radial_specials),
                       2, cfg.ratio)
    out = []
    for m in (cfg.m, cfg.m + cfg.dm):
        dirs, wang = _angular_rule(frame, n, tb, pb, m)
        if max_length is None:
            L = _ray_length(origin, dirs, np.asarray(center, dtype=float), radius)
        else:
            L = np.full(dirs.shape[0], float(max_length))
        rn, rw = panel_rule(rb, m)
        out.append(_evaluate(integrand, origin, dirs, wang, L, rn, rw, n, cfg.chunk))
    return out[1], np.abs(out[1] - out[0])


def sphere_integral(integrand, center, radius, frame: Frame, cfg: QuadConfig,
                    theta_specials=(), phi_specials=()):
    """∫_{∂B(center, radius)} integrand(w) dS(w); returns (fine, |fine - coarse|)."""
    center = np.asarray(center, dtype=float)
    n = center.size
    tb = graded_breaks(0.0, math.pi, theta_specials, cfg.theta_panels, cfg.ratio)
    pb = graded_breaks(0.0, math.pi, phi_specials, cfg.phi_panels, cfg.ratio)
    out = []
    for m in (cfg.m, cfg.m + cfg.dm):
        dirs, wang = _angular_rule(frame, n, tb, pb, m)
        W = center + radius * dirs
        vals = integrand(W)
        w = wang * radius ** (n - 1)
        out.append(np.tensordot(w, vals, axes=(0, 0)) if vals.ndim > 1 else np.sum(w * vals))
    return out[1], np.abs(out[1] - out[0])
