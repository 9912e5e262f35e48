"""Spinor (Dirac) data to conformal immersions.

A spinor pair (s1, s2) solving

    d_z conj(s2) = p s1,    -d_zbar s1 = p conj(s2)

with real potential p defines closed forms

    d(F1 + i F2) = s1^2 dz - conj(s2)^2 dzbar
    dF3          = s1 s2 dz + conj(s1 s2) dzbar

and an immersion with metric (|s1|^2 + |s2|^2)^2 |dz|^2 and mean curvature
H = 2 p e^{-u/2}.
"""

from dataclasses import dataclass

import numpy as np

from . import _fd
from ._integrate import integrate_closed
from .errors import ZeroSpinorError
from .quatgeo import ComplexGrid, SurfaceGrid, conjugate_vector, from_matrix


@dataclass
class SpinorPair:
    s1: np.ndarray
    s2: np.ndarray
    grid: ComplexGrid

    @classmethod
    def from_functions(cls, f1, f2, grid):
        z = grid.z
        return cls(np.broadcast_to(f1(z), z.shape).astype(complex),
                   np.broadcast_to(f2(z), z.shape).astype(complex), grid)


@dataclass
class DiracResidual:
    first: np.ndarray
    second: np.ndarray
    max: float


def dirac_residual(sp, p, order=_fd.DEFAULT_ORDER, margin=None):
    """Both components of the Dirac system and their interior max-norm."""
    g = sp.grid
    margin = order // 2 if margin is None else margin
    p = np.broadcast_to(np.asarray(p, float), g.shape)
    r1 = _fd.dz(np.conj(sp.s2), g.hx, g.hy, order) - p * sp.s1
    r2 = -_fd.dzbar(sp.s1, g.hx, g.hy, order) - p * np.conj(sp.s2)
    m = np.maximum(np.abs(r1), np.abs(r2))
    return DiracResidual(r1, r2, float(np.max(_fd.interior(m, margin))))


def spinor_tangents(s1, s2):
    """Exact F_x, F_y of the Weierstrass forms, shape (..., 3)."""
    a = s1 * s1
    b = np.conj(s2) ** 2
    c = s1 * s2
    fx = a - b
    fy = 1j * (a + b)
    Fx = np.stack([fx.real, fx.imag, 2 * c.real], -1)
    Fy = np.stack([fy.real, fy.imag, -2 * c.imag], -1)
    return Fx, Fy


def frame_matrix(s1, s2):
    return np.stack([np.stack([s1, -s2], -1), np.stack([np.conj(s2), np.conj(s1)], -1)], -2)


def frame_from_spinors(sp, tol=1e-14):
    """Quaternion frame [[s1, -s2], [conj s2, conj s1]] with det = e^{u/2}."""
    d = np.abs(sp.s1) ** 2 + np.abs(sp.s2) ** 2
    bad = np.argwhere(d <= tol)
    if len(bad):
        raise ZeroSpinorError(f"spinor pair vanishes at node {tuple(bad[0])}")
    return from_matrix(frame_matrix(sp.s1, sp.s2))


def weierstrass_integrate(sp, tol=1e-6, base=None):
    """Integrate the Weierstrass forms; F vanishes at the base node.

    The x-first path is canonical; the y-first path gives the closedness
    check and raises PathDependenceError if the two differ by more than tol.
    """
    g = sp.grid
    frame = frame_from_spinors(sp)
    Fx, Fy = spinor_tangents(sp.s1, sp.s2)
    base = g.center if base is None else base
    F, defect = integrate_closed(Fx, Fy, g.hx, g.hy, base, tol)
    Phi = frame_matrix(sp.s1, sp.s2)
    N = conjugate_vector(Phi, np.broadcast_to([0.0, 0.0, 1.0], Fx.shape))
    return SurfaceGrid(F=F, grid=g, N=N, Phi=frame, Fx=Fx, Fy=Fy,
                       meta={"path_defect": defect, "base": base})


def metric_from_spinors(sp):
    """e^u = (|s1|^2 + |s2|^2)^2."""
    return (np.abs(sp.s1) ** 2 + np.abs(sp.s2) ** 2) ** 2


def mean_curvature_from_potential(p, u):
    return 2 * np.asarray(p) * np.exp(-0.5 * np.asarray(u))
