"""Shared constants and small quadrature helpers."""

from __future__ import annotations

from functools import lru_cache
import math

import numpy as np


class ValidationError(ValueError):
    """Bad user input (maps to CLI exit status 2)."""


class ConvergenceError(RuntimeError):
    """A numerical method failed to reach its tolerance (CLI exit status 1)."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def sphere_area(n: int) -> float:
    """Surface measure |S^{n-1}| of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def green_constant(n: int) -> float:
    """c_n = 1/((n-2)|S^{n-1}|), so that c_n|x|^{2-n} is the fundamental solution of -Δ."""
    if n < 3:
        raise ValidationError("dimension must be at least 3")
    return 1.0 / ((n - 2) * sphere_area(n))


def critical_q(n: int, p: float) -> float:
    """Exponent q on the critical hyperbola 1/(p+1) + 1/(q+1) = (n-2)/n."""
    return q_epsilon(n, p, 0.0, _allow_below_p=True)


def q_epsilon(n: int, p: float, eps: float, _allow_below_p: bool = False) -> float:
    """Exponent q_eps with 1/(p+1) + 1/(q_eps+1) = (n-2)/n + eps."""
    if n < 3:
        raise ValidationError("dimension must be at least 3")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    inv = (n - 2) / n + eps - 1.0 / (p + 1.0)
    if inv <= 0:
        raise ValidationError(f"p={p} gives 1/(q+1) <= 0 in dimension {n}")
    q = 1.0 / inv - 1.0
    if q <= 0:
        raise ValidationError(f"q={q} is not positive")
    if eps > 0 and not _allow_below_p and q < p * (1 - 1e-12):
        raise ValidationError(f"eps={eps} too large: q_eps={q:.6g} < p={p}")
    return q


@lru_cache(maxsize=64)
def gauss_legendre(m: int):
    return np.polynomial.legendre.leggauss(m)


def panel_rule(breaks, m: int):
    """Composite Gauss-Legendre rule with m nodes on each interval of `breaks`."""
    b = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(m)
    lo, hi = b[:-1, None], b[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def geometric_breaks(a: float, b: float, smallest: float, ratio: float = 0.5):
    """Breakpoints on [a, b] graded geometrically toward a, finest panel about `smallest`."""
    length = b - a
    if length <= 0:
        raise ValueError("empty interval")
    pts = [length]
    while pts[-1] * ratio > smallest:
        pts.append(pts[-1] * ratio)
    pts.append(0.0)
    return a + np.array(pts[::-1])


def two_sided_breaks(a: float, b: float, c: float, smallest: float, ratio: float = 0.5):
    """Breakpoints on [a, b] graded geometrically toward an interior point c."""
    if c <= a:
        return geometric_breaks(a, b, smallest, ratio)
    if c >= b:
        return b - geometric_breaks(0.0, b - a, smallest, ratio)[::-1]
    left = c - geometric_breaks(0.0, c - a, smallest, ratio)[::-1]
    right = c + geometric_breaks(0.0, b - c, smallest, ratio)
    return np.concatenate([left, right[1:]])
