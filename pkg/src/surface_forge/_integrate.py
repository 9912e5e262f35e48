"""Line integration of closed 1-forms on a rectangular grid."""

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import PathDependenceError


def _cumint_from(f, h, i0, axis):
    """Integral of f along `axis` starting at index i0 (value 0 there)."""
    g = np.moveaxis(np.asarray(f), axis, 0)
    out = np.zeros(g.shape, dtype=g.dtype)
    if g.shape[0] - i0 >= 2:
        out[i0:] = cumulative_simpson(g[i0:], dx=h, axis=0, initial=0)
    if i0 >= 1:
        left = cumulative_simpson(g[i0::-1], dx=h, axis=0, initial=0)
        out[:i0 + 1] = -left[::-1]
    return np.moveaxis(out, 0, axis)


def integrate_gradient(fx, fy, hx, hy, base, path="xy"):
    """Integrate dF = fx dx + fy dy with F(base) = 0.

    path 'xy' runs along the base row first and then up every column;
    'yx' does the opposite.  Extra trailing dimensions are carried along.
    """
    i0, j0 = base
    if path == "xy":
        line = _cumint_from(fx[:, j0], hx, i0, 0)
        return line[:, None] + _cumint_from(fy, hy, j0, 1)
    line = _cumint_from(fy[i0, :], hy, j0, 0)
    return line[None, :] + _cumint_from(fx, hx, i0, 0)


def integrate_closed(fx, fy, hx, hy, base, tol=None):
    """Canonical x-first integral plus the path defect against y-first."""
    F = integrate_gradient(fx, fy, hx, hy, base, "xy")
    G = integrate_gradient(fx, fy, hx, hy, base, "yx")
    defect = float(np.max(np.abs(F - G))) if F.size else 0.0
    if tol is not None and defect > tol:
        raise PathDependenceError(f"path defect {defect:.3e} exceeds {tol:.3e}", defect)
    return F, defect
