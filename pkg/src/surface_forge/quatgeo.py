"""Quaternions, fundamental forms and Gauss-Codazzi residuals on grids.

Quaternions are real arrays with a trailing axis of length 4 holding
(q0, q1, q2, q3), the coefficients of 1, i, j, k.  Imaginary quaternions
(vectors in R^3) use a trailing axis of length 3.  The matrix image uses
i = -i*sigma1, j = -i*sigma2, k = -i*sigma3, so that

    q  <->  [[q0 - i q3, -i q1 - q2], [-i q1 + q2, q0 + i q3]]

and det = |q|^2.  Grids are indexed [ix, iy] with axis 0 along x.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _fd
from .errors import DegenerateMetricError, DegenerateNodeError, GridTooSmallError

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
BASIS = np.concatenate([np.eye(2, dtype=complex)[None], -1j * SIGMA])

UMBILIC_REL = 1e-9


# --- algebra ---------------------------------------------------------------

def qmul(a, b):
    """Hamilton product of quaternion arrays (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(q):
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def qinv(q):
    return qconj(q) / qnorm2(q)[..., None]


def as_quaternion(X):
    """Embed R^3 vectors as imaginary quaternions."""
    X = np.asarray(X, dtype=float)
    return np.concatenate([np.zeros(X.shape[:-1] + (1,)), X], axis=-1)


def to_matrix(q):
    """2x2 complex matrix image of a quaternion array."""
    q = np.asarray(q)
    return np.tensordot(q, BASIS, axes=(-1, 0))


def matrix_coefficients(m):
    """Complex coefficients c with m = sum c_k BASIS[k] (any 2x2 matrix)."""
    m = np.asarray(m, dtype=complex)
    c0 = 0.5 * np.trace(m, axis1=-2, axis2=-1)
    ca = [0.5j * np.trace(m @ s, axis1=-2, axis2=-1) for s in SIGMA]
    return np.stack([c0] + ca, axis=-1)


def from_matrix(m):
    """Quaternion whose matrix image is m (m assumed quaternionic)."""
    return matrix_coefficients(m).real


def vec_to_matrix(X):
    return to_matrix(as_quaternion(X))


def matrix_to_vec(m):
    return from_matrix(m)[..., 1:]


def scalar_product(X, Y):
    """<X, Y> = -1/2 tr(XY) for vectors given as (..., 3) arrays."""
    P = vec_to_matrix(X) @ vec_to_matrix(Y)
    return -0.5 * np.trace(P, axis1=-2, axis2=-1).real


def conjugate_vector(Phi, X):
    """Phi^{-1} X Phi for 2x2 frames Phi and vectors X; returns (..., 3)."""
    Phi = np.asarray(Phi, dtype=complex)
    return matrix_to_vec(np.linalg.solve(Phi, vec_to_matrix(X) @ Phi))


# --- grids and containers ----------------------------------------------------

@dataclass(frozen=True)
class ComplexGrid:
    """Rectangular lattice z = z0 + ix*hx + i*iy*hy."""

    z0: complex
    hx: float
    hy: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise GridTooSmallError(f"empty grid {self.nx}x{self.ny}")
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("grid spacings must be positive")

    @classmethod
    def centered(cls, nx, ny, h, center=0j, hy=None):
        hy = h if hy is None else hy
        z0 = complex(center) - 0.5 * (nx - 1) * h - 0.5j * (ny - 1) * hy
        return cls(z0, float(h), float(hy), int(nx), int(ny))

    @property
    def x(self):
        xs = self.z0.real + self.hx * np.arange(self.nx)
        return np.repeat(xs[:, None], self.ny, axis=1)

    @property
    def y(self):
        ys = self.z0.imag + self.hy * np.arange(self.ny)
        return np.repeat(ys[None, :], self.nx, axis=0)

    @property
    def z(self):
        return self.x + 1j * self.y

    @property
    def center(self):
        return (self.nx // 2, self.ny // 2)

    @property
    def shape(self):
        return (self.nx, self.ny)

    def to_dict(self):
        return {"z0": [self.z0.real, self.z0.imag], "hx": self.hx, "hy": self.hy,
                "nx": self.nx, "ny": self.ny}


@dataclass
class FundamentalData:
    """Sampled (u, Q, H): metric e^u |dz|^2, Hopf coefficient, mean curvature."""

    u: np.ndarray
    Q: np.ndarray
    H: np.ndarray
    grid: ComplexGrid


@dataclass
class SurfaceGrid:
    """Sampled immersion with normal and optional frame and tangents.

    F, N, Fx, Fy are (nx, ny, 3).  Phi, if present, is the quaternion frame
    (nx, ny, 4).  Fx and Fy, when supplied, are exact tangent fields used by
    the estimators in place of differencing F.
    """

    F: np.ndarray
    grid: ComplexGrid
    N: Optional[np.ndarray] = None
    Phi: Optional[np.ndarray] = None
    Fx: Optional[np.ndarray] = None
    Fy: Optional[np.ndarray] = None
    Z1: Optional[complex] = None
    Z2: Optional[complex] = None
    meta: dict = field(default_factory=dict)

    def tangents(self, order=_fd.DEFAULT_ORDER):
        if self.Fx is not None and self.Fy is not None:
            return self.Fx, self.Fy
        g = self.grid
        return _fd.diff(self.F, g.hx, 0, 1, order), _fd.diff(self.F, g.hy, 1, 1, order)

    def normal(self, order=_fd.DEFAULT_ORDER):
        if self.N is not None:
            return self.N
        Fx, Fy = self.tangents(order)
        n = np.cross(Fx, Fy)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)


# --- fundamental forms and curvature -----------------------------------------

def fundamental_forms(u, Q, H):
    """First and second fundamental forms as (..., 2, 2) real arrays."""
    u, Q, H = np.broadcast_arrays(np.asarray(u, float), np.asarray(Q, complex),
                                  np.asarray(H, float))
    eu = np.exp(u)
    I = eu[..., None, None] * np.eye(2)
    a, b = 2 * Q.real, -2 * Q.imag
    II = np.stack([np.stack([a + H * eu, b], -1), np.stack([b, -a + H * eu], -1)], -2)
    return I, II


def curvatures(I, II):
    """Principal curvatures k1 >= k2, mean H and Gauss K from the two forms."""
    I = np.asarray(I, float)
    II = np.asarray(II, float)
    detI = np.linalg.det(I)
    if np.any(detI <= 0):
        raise DegenerateMetricError("first fundamental form is not positive definite")
    S = II @ np.linalg.inv(I)
    H = 0.5 * np.trace(S, axis1=-2, axis2=-1)
    K = np.linalg.det(S)
    disc = np.sqrt(np.maximum(H * H - K, 0.0))
    return H + disc, H - disc, H, K


def gauss_curvature(u, Q, H):
    return H * H - 4 * np.abs(Q) ** 2 * np.exp(-2 * u)


@dataclass
class GaussCodazziResidual:
    gauss: np.ndarray
    codazzi: np.ndarray
    gauss_max: float
    codazzi_max: float


def gauss_codazzi_residual(fd, order=_fd.DEFAULT_ORDER, margin=None):
    """Gauss and Codazzi residual fields and their interior max-norms.

    gauss   = u_zz + 1/2 H^2 e^u - 2|Q|^2 e^-u
    codazzi = Q_zbar - 1/2 H_z e^u
    """
    g = fd.grid
    margin = order // 2 if margin is None else margin
    need = 2 * margin + 3
    if g.nx < max(need, order + 2) or g.ny < max(need, order + 2):
        raise GridTooSmallError(f"grid {g.nx}x{g.ny} too small for residuals")
    u, Q, H = fd.u, fd.Q, fd.H
    eu = np.exp(u)
    gauss = _fd.dzdzbar(u, g.hx, g.hy, order) + 0.5 * H * H * eu - 2 * np.abs(Q) ** 2 / eu
    codazzi = _fd.dzbar(Q, g.hx, g.hy, order) - 0.5 * _fd.dz(H, g.hx, g.hy, order) * eu
    gm = float(np.max(np.abs(_fd.interior(gauss, margin))))
    cm = float(np.max(np.abs(_fd.interior(codazzi, margin))))
    return GaussCodazziResidual(gauss, codazzi, gm, cm)


def estimate_fundamental_data(s, order=_fd.DEFAULT_ORDER, tol=1e-12):
    """Recover (u, Q, H) from a sampled surface by finite differences."""
    g = s.grid
    Fx, Fy = s.tangents(order)
    eu = 0.5 * (np.sum(Fx * Fx, -1) + np.sum(Fy * Fy, -1))
    bad = np.argwhere(eu < tol)
    if len(bad):
        raise DegenerateNodeError(f"metric vanishes at node {tuple(bad[0])}", tuple(bad[0]))
    N = s.normal(order)
    Fxx = _fd.diff(Fx, g.hx, 0, 1, order)
    Fyy = _fd.diff(Fy, g.hy, 1, 1, order)
    Fxy = 0.5 * (_fd.diff(Fx, g.hy, 1, 1, order) + _fd.diff(Fy, g.hx, 0, 1, order))
    Q = 0.25 * (np.sum((Fxx - Fyy) * N, -1) - 2j * np.sum(Fxy * N, -1))
    H = 0.5 * np.sum((Fxx + Fyy) * N, -1) / eu
    return FundamentalData(np.log(eu), Q, H, g)


def surface_residuals(s, order=_fd.DEFAULT_ORDER, margin=None):
    """Max-norms of the SurfaceGrid invariants on interior nodes."""
    margin = order // 2 if margin is None else margin
    Fx, Fy = s.tangents(order)
    N = s.normal(order)
    conf = 0.25 * np.abs(np.sum(Fx * Fx, -1) - np.sum(Fy * Fy, -1) - 2j * np.sum(Fx * Fy, -1))
    tang = 0.5 * np.abs(np.sum(Fx * N, -1) - 1j * np.sum(Fy * N, -1))
    unit = np.abs(np.linalg.norm(N, axis=-1) - 1)
    cut = lambda a: float(np.max(_fd.interior(a, margin)))
    return {"conformality": cut(conf), "normal_tangency": cut(tang), "normal_unit": cut(unit)}


def isothermic_residual(Q):
    return float(np.max(np.abs(np.imag(Q))))


def umbilic_mask(Q, rel=UMBILIC_REL):
    a = np.abs(Q)
    return a < rel * np.max(a) if np.max(a) > 0 else np.ones(a.shape, bool)
