"""Adaptive composite Gauss-Legendre quadrature for vector integrands."""

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureError

STATS = {"panels": 0}


@lru_cache(maxsize=None)
def _nodes(n):
    return leggauss(n)


def _panel(f, a, b, n):
    x, w = _nodes(n)
    t = 0.5 * (b - a) * x + 0.5 * (b + a)
    return 0.5 * (b - a) * (f(t) @ w)


def adaptive_gl(f, a, b, n=20, tol=1e-13, panels=1, max_depth=30):
    """Integrate f over [a, b] with n-point panels split until n and 2n agree.

    f maps a 1-D array of nodes to an array (..., len(nodes)).  A panel is
    accepted when its error estimate is below tol times the magnitude of the
    whole integral (at least 1), so panels with negligible contributions next
    to integrable endpoint singularities are not refined forever.
    """
    edges = np.linspace(a, b, panels + 1)
    whole = sum(_panel(f, edges[i], edges[i + 1], 2 * n) for i in range(panels))
    scale = max(1.0, float(np.max(np.abs(whole))))
    stack = [(edges[i], edges[i + 1], 0) for i in range(panels)]
    total = 0
    count = 0
    while stack:
        lo, hi, depth = stack.pop()
        coarse = _panel(f, lo, hi, n)
        fine = _panel(f, lo, hi, 2 * n)
        err = np.max(np.abs(fine - coarse))
        if err <= tol * scale:
            total = total + fine
            count += 1
        elif depth >= max_depth:
            raise QuadratureError(f"panel [{lo}, {hi}] failed to converge (err {err:.2e})")
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    STATS["panels"] = count
    return total


def endpoint_smoothed(f_of_point, a, b, n=20, tol=1e-13):
    """Integral of f(L) dL over the straight segment a -> b.

    The substitution L = a cos^2(pi v/2) + b sin^2(pi v/2) flattens inverse
    square-root singularities at both ends.
    """
    def g(v):
        s = np.sin(0.5 * np.pi * v) ** 2
        c = np.cos(0.5 * np.pi * v) ** 2
        ds = 0.5 * np.pi * np.sin(np.pi * v)
        return f_of_point(a * c + b * s) * ((b - a) * ds)
    return adaptive_gl(g, 0.0, 1.0, n, tol, panels=2)
