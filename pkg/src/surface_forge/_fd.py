"""Finite-difference stencils on uniform grids.

Centered stencils in the interior, one-sided stencils of the same formal
order near the boundary.  Weights come from a small Vandermonde solve so any
(derivative, order) pair is available.
"""

from functools import lru_cache
from math import factorial

import numpy as np

from .errors import GridTooSmallError

DEFAULT_ORDER = 4


@lru_cache(maxsize=None)
def fd_weights(offsets, deriv):
    """Weights w with sum_j w_j f(x + o_j h) ~ h^deriv f^(deriv)(x)."""
    o = np.asarray(offsets, dtype=float)
    n = len(o)
    A = o[None, :] ** np.arange(n)[:, None]
    b = np.zeros(n)
    b[deriv] = factorial(deriv)
    return tuple(np.linalg.solve(A, b))


def _stencil_width(deriv, order, centered):
    if centered:
        return order + 1 + 2 * ((deriv - 1) // 2)
    return order + deriv


def diff(f, h, axis=0, deriv=1, order=DEFAULT_ORDER):
    """Derivative of order `deriv` along `axis` with formal accuracy `order`."""
    f = np.asarray(f)
    axis = axis % f.ndim
    n = f.shape[axis]
    half = _stencil_width(deriv, order, True) // 2
    width = _stencil_width(deriv, order, False)
    if n < width:
        raise GridTooSmallError(f"need at least {width} nodes along axis {axis}, got {n}")
    g = np.moveaxis(f, axis, 0)
    out = np.empty(g.shape, dtype=np.result_type(g.dtype, float))
    wc = fd_weights(tuple(range(-half, half + 1)), deriv)
    inner = np.zeros_like(out[half:n - half])
    for k, w in enumerate(wc):
        inner = inner + w * g[k:n - 2 * half + k]
    out[half:n - half] = inner
    for i in list(range(half)) + list(range(n - half, n)):
        start = min(max(i - width // 2, 0), n - width)
        offs = tuple(range(start - i, start - i + width))
        w = np.asarray(fd_weights(offs, deriv))
        out[i] = np.tensordot(w, g[start:start + width], axes=(0, 0))
    return np.moveaxis(out, 0, axis) / h ** deriv


def dx(f, h, order=DEFAULT_ORDER):
    return diff(f, h, axis=0, order=order)


def dy(f, h, order=DEFAULT_ORDER):
    return diff(f, h, axis=1, order=order)


def dz(f, hx, hy, order=DEFAULT_ORDER):
    return 0.5 * (diff(f, hx, 0, 1, order) - 1j * diff(f, hy, 1, 1, order))


def dzbar(f, hx, hy, order=DEFAULT_ORDER):
    return 0.5 * (diff(f, hx, 0, 1, order) + 1j * diff(f, hy, 1, 1, order))


def dzdzbar(f, hx, hy, order=DEFAULT_ORDER):
    return 0.25 * (diff(f, hx, 0, 2, order) + diff(f, hy, 1, 2, order))


def interior(a, margin):
    """Slice off `margin` nodes on each side of the two grid axes."""
    if margin <= 0:
        return a
    return a[margin:-margin, margin:-margin]
