"""Bonnet pairs from isothermic surfaces, the pair Lax system and its Sym formula.

Surfaces in R^4 are quaternion grids (..., 4).  A Bonnet pair F1, F2 is
built from an isothermic R in Im H (or T in the unit sphere S^3) via

    dF1 = 1/2 (1 - R) dR* (1 + R),   dF2 = 1/2 (1 + R) dR* (1 - R),

where dR* = -R_x^-1 dx + R_y^-1 dy is the dual isothermic surface.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _fd
from ._integrate import integrate_closed
from .errors import (BonnetPairError, ClosednessError, ImaginaryLeakError, NonImmersionError,
                     NormalizationError)
from .frameflow import FramePotentials, integrate_frame
from .quatgeo import ComplexGrid, SurfaceGrid, from_matrix, qinv, qmul, qnorm2

IMMERSION_GUARD = 1e-8
MASK_REL = 1e-6
ONE = np.array([1.0, 0.0, 0.0, 0.0])


@dataclass
class QuatSurface:
    """Quaternion-valued surface on a chart; exact tangents optional."""

    f: np.ndarray
    grid: ComplexGrid
    fx: Optional[np.ndarray] = None
    fy: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def tangents(self, order=_fd.DEFAULT_ORDER):
        if self.fx is not None and self.fy is not None:
            return self.fx, self.fy
        g = self.grid
        return _fd.diff(self.f, g.hx, 0, 1, order), _fd.diff(self.f, g.hy, 1, 1, order)


def quat_surface_from_function(fn, grid, dfn=None):
    """Sample f(x, y) (and optionally its tangents dfn(x, y) -> (fx, fy))."""
    x, y = grid.z.real, grid.z.imag
    fx = fy = None
    if dfn is not None:
        fx, fy = (np.asarray(a, float) for a in dfn(x, y))
    return QuatSurface(np.asarray(fn(x, y), float), grid, fx, fy)


def _check_immersion(fx, fy):
    n = np.minimum(qnorm2(fx), qnorm2(fy))
    bad = np.argwhere(n <= IMMERSION_GUARD ** 2)
    if len(bad):
        raise NonImmersionError(f"tangent not invertible at node {tuple(bad[0])}")


@dataclass
class IsothermicResidual4:
    normal_part: float
    conformality: float
    orthogonality: float

    @property
    def total(self):
        return self.normal_part + self.conformality + self.orthogonality


def isothermic_residual4(s, order=_fd.DEFAULT_ORDER, margin=None):
    """Component of f_xy normal to span{f_x, f_y} plus the conformality defects."""
    g = s.grid
    margin = order // 2 if margin is None else margin
    fx, fy = s.tangents(order)
    _check_immersion(fx, fy)
    fxy = 0.5 * (_fd.diff(fx, g.hy, 1, 1, order) + _fd.diff(fy, g.hx, 0, 1, order))
    e1 = fx / np.sqrt(qnorm2(fx))[..., None]
    v = fy - np.sum(fy * e1, -1, keepdims=True) * e1
    e2 = v / np.sqrt(qnorm2(v))[..., None]
    normal = fxy - np.sum(fxy * e1, -1, keepdims=True) * e1 - np.sum(fxy * e2, -1, keepdims=True) * e2
    cut = lambda a: float(np.max(_fd.interior(a, margin)))
    return IsothermicResidual4(cut(np.sqrt(qnorm2(normal))),
                               cut(np.abs(qnorm2(fx) - qnorm2(fy))),
                               cut(np.abs(np.sum(fx * fy, -1))))


def dual_surface(s, tol=1e-8, base=None, order=_fd.DEFAULT_ORDER):
    """Dual isothermic surface f* with df* = -f_x^-1 dx + f_y^-1 dy, f*(base) = 0."""
    g = s.grid
    fx, fy = s.tangents(order)
    _check_immersion(fx, fy)
    gx, gy = -qinv(fx), qinv(fy)
    base = g.center if base is None else tuple(base)
    try:
        f, defect = integrate_closed(gx, gy, g.hx, g.hy, base, tol)
    except Exception as e:
        raise ClosednessError(f"dual form not closed: {e}") from None
    curl = _fd.diff(gx, g.hy, 1, 1, order) - _fd.diff(gy, g.hx, 0, 1, order)
    closed = float(np.max(np.abs(_fd.interior(curl, order // 2))))
    return QuatSurface(f, g, gx, gy, {"path_defect": defect, "closedness": closed, "base": base})


def stereographic_T(R, guard=1e-8):
    """T = (1 + R)(1 - R)^-1 for imaginary quaternions R (as (..., 3) or (..., 4))."""
    R = np.asarray(R, float)
    if R.shape[-1] == 3:
        R = np.concatenate([np.zeros(R.shape[:-1] + (1,)), R], -1)
    d = ONE - R
    if np.any(qnorm2(d) <= guard):
        raise NonImmersionError("1 - R not invertible")
    return qmul(ONE + R, qinv(d))


def stereographic_dT(R, dR):
    """dT = 2 (1 - R)^-1 dR (1 - R)^-1."""
    inv = qinv(ONE - np.asarray(R, float))
    return 2 * qmul(qmul(inv, dR), inv)


def _pair_tangents(kind, f, fx, fy):
    sx, sy = -qinv(fx), qinv(fy)
    if kind == "R":
        a, b = ONE - f, ONE + f
        return (0.5 * qmul(qmul(a, sx), b), 0.5 * qmul(qmul(a, sy), b),
                0.5 * qmul(qmul(b, sx), a), 0.5 * qmul(qmul(b, sy), a))
    return qmul(sx, f), qmul(sy, f), qmul(f, sx), qmul(f, sy)


def bonnet_pair_from_isothermic(s, kind="R", tol=1e-8, base=None, order=_fd.DEFAULT_ORDER):
    """Bonnet mates (F1, F2) from an isothermic R in Im H or T in S^3."""
    if kind not in ("R", "T"):
        raise BonnetPairError(f"unknown input kind {kind!r}")
    g = s.grid
    fx, fy = s.tangents(order)
    _check_immersion(fx, fy)
    f = np.asarray(s.f, float)
    if kind == "R" and np.max(np.abs(f[..., 0])) > tol:
        raise ImaginaryLeakError("R must be imaginary")
    if kind == "T" and np.max(np.abs(qnorm2(f) - 1)) > tol:
        raise NormalizationError("T must lie in the unit sphere")
    base = g.center if base is None else tuple(base)
    out = []
    tangents = _pair_tangents(kind, f, fx, fy)
    for X, Y in (tangents[:2], tangents[2:]):
        leak = float(max(np.max(np.abs(X[..., 0])), np.max(np.abs(Y[..., 0]))))
        scale = float(max(np.max(np.abs(X)), np.max(np.abs(Y))))
        if leak > tol * max(1.0, scale):
            raise ImaginaryLeakError(f"real part of dF is {leak:.3e}")
        try:
            F, defect = integrate_closed(X[..., 1:], Y[..., 1:], g.hx, g.hy, base, tol)
        except Exception as e:
            raise ClosednessError(f"pair form not closed: {e}") from None
        out.append(SurfaceGrid(F=F, grid=g, Fx=X[..., 1:], Fy=Y[..., 1:],
                               meta={"path_defect": defect, "real_leak": leak, "base": base}))
    return tuple(out)


# --- Hopf differentials -----------------------------------------------------------

@dataclass
class HopfDecomposition:
    h: np.ndarray
    alpha: np.ndarray
    mask: np.ndarray
    max_imag: float


def decompose_hopf(Q1, Q2, cutoff=MASK_REL, tol=1e-8):
    """h = Q2 - Q1 and real alpha with Q1 = h(i alpha - 1)/2, Q2 = h(i alpha + 1)/2."""
    Q1, Q2 = np.asarray(Q1, complex), np.asarray(Q2, complex)
    h = Q2 - Q1
    top = np.max(np.abs(h))
    if top == 0:
        raise BonnetPairError("Q1 = Q2: the surfaces are congruent")
    mask = np.abs(h) < cutoff * top
    safe = np.where(mask, 1.0, h)
    alpha = np.where(mask, np.nan, -1j * (Q1 + Q2) / safe)
    imag = float(np.nanmax(np.abs(alpha.imag)))
    if imag > tol * max(1.0, float(np.nanmax(np.abs(alpha.real)))):
        raise ImaginaryLeakError(f"alpha has imaginary part {imag:.3e}")
    return HopfDecomposition(h, alpha.real, mask, imag)


def holomorphy_residual(h, grid, order=_fd.DEFAULT_ORDER, margin=None):
    margin = order // 2 if margin is None else margin
    r = _fd.dzbar(np.asarray(h, complex), grid.hx, grid.hy, order)
    return float(np.max(np.abs(_fd.interior(r, margin))))


# --- pair Lax system and Sym formula ---------------------------------------------------

def pair_lax_UV(u, uz, H, Q, lam):
    """4x4 potentials of the mates with Q1 = Q, Q2 = conj(Q) at loop parameter lam."""
    u, uz, H, Q = np.broadcast_arrays(*(np.asarray(a) for a in (u, uz, H, Q)))
    ep, em = np.exp(0.5 * u), np.exp(-0.5 * u)
    U = np.zeros(u.shape + (4, 4), complex)
    V = np.zeros(u.shape + (4, 4), complex)
    for k, Qk in enumerate((Q, np.conj(Q))):
        o = 2 * k
        U[..., o, o], U[..., o, o + 1] = uz / 4, -Qk * em
        U[..., o + 1, o], U[..., o + 1, o + 1] = 0.5 * H * ep, -uz / 4
        V[..., o, o], V[..., o, o + 1] = -np.conj(uz) / 4, -0.5 * H * ep
        V[..., o + 1, o], V[..., o + 1, o + 1] = np.conj(Qk) * em, np.conj(uz) / 4
    U[..., 1, 2] = V[..., 0, 3] = -1j * lam * ep
    U[..., 2, 1] = V[..., 3, 0] = -1j * lam * em
    return U, V


def _check_h(Q, tol):
    d = float(np.max(np.abs(np.conj(Q) - Q + 1j)))
    if d > tol:
        raise NormalizationError(f"Hopf differentials not normalized to h = -i (defect {d:.3e})")


@dataclass
class PairFrame4:
    """Pair frame at lam = 0 with its first two lam-derivatives."""

    Phi: np.ndarray
    Phi_l: np.ndarray
    Phi_ll: np.ndarray
    grid: ComplexGrid
    method: str
    meta: dict = field(default_factory=dict)


def _initial(lam):
    P = np.eye(4, dtype=complex)
    P[2:, :2] = lam * np.eye(2)
    return P


def _frame_at(u, uz, H, Q, lam, grid, base, tol):
    U, V = pair_lax_UV(u, uz, H, Q, lam)
    return integrate_frame(FramePotentials(grid, U, V, lam=lam), _initial(lam), base, tol=tol)


def pair_frame(fd, method="exact", delta=1e-3, order=_fd.DEFAULT_ORDER, tol=1e-6, base=None):
    """Normalized solution of the pair Lax system built from the data of mate F1.

    The base value is [[1, 0], [lam, 1]] in 2x2 blocks, which makes T = Phi2^-1 Phi1.
    method='exact' carries (Phi, Phi_l, Phi_ll) through the block-triangular
    system; method='fd' uses central lam-differences with Richardson extrapolation.
    """
    g = fd.grid
    _check_h(fd.Q, tol)
    base = g.center if base is None else tuple(base)
    uz = _fd.dz(fd.u, g.hx, g.hy, order)
    if method == "exact":
        U0, V0 = pair_lax_UV(fd.u, uz, fd.H, fd.Q, 0.0)
        U1, V1 = pair_lax_UV(fd.u, uz, fd.H, fd.Q, 1.0)
        Ul, Vl = U1 - U0, V1 - V0

        def block(A, Al):
            Z = np.zeros_like(A)
            return np.concatenate([np.concatenate([A, Z, Z], -1), np.concatenate([Al, A, Z], -1),
                                   np.concatenate([Z, 2 * Al, A], -1)], -2)
        P0 = np.zeros((12, 4), complex)
        P0[:4] = np.eye(4)
        P0[4:8] = _initial(1.0) - np.eye(4)
        ff = integrate_frame(FramePotentials(g, block(U0, Ul), block(V0, Vl)), P0, base, tol=tol)
        P = ff.Phi
        return PairFrame4(P[..., :4, :], P[..., 4:8, :], P[..., 8:, :], g, method,
                          {"path_defect": ff.path_defect})
    if method != "fd":
        raise BonnetPairError(f"unknown method {method!r}")
    at = lambda l: _frame_at(fd.u, uz, fd.H, fd.Q, l, g, base, tol).Phi
    P0 = at(0.0)
    d1 = {}
    d2 = {}
    for d in (delta, delta / 2):
        p, m = at(d), at(-d)
        d1[d] = (p - m) / (2 * d)
        d2[d] = (p - 2 * P0 + m) / (d * d)
    h2 = delta / 2
    Pl = (4 * d1[h2] - d1[delta]) / 3
    Pll = (4 * d2[h2] - d2[delta]) / 3
    return PairFrame4(P0, Pl, Pll, g, method,
                      {"delta": delta, "richardson_l": float(np.max(np.abs(d1[h2] - d1[delta]))),
                       "richardson_ll": float(np.max(np.abs(d2[h2] - d2[delta])))})


@dataclass
class SymPair:
    F1: SurfaceGrid
    F2: SurfaceGrid
    S: np.ndarray
    T: np.ndarray
    structure: float


def sym_pair_immersion(pf, tol=1e-6):
    """Mates F1, F2 (and S, T) from the lam-derivatives of a normalized pair frame."""
    A = np.linalg.solve(pf.Phi, pf.Phi_l)
    B = np.linalg.solve(pf.Phi, pf.Phi_ll)
    structure = float(max(np.max(np.abs(A[..., :2, :2])), np.max(np.abs(A[..., 2:, 2:]))))
    S, T = from_matrix(A[..., :2, 2:]), from_matrix(A[..., 2:, :2])
    dev = float(np.max(np.abs(qnorm2(T) - 1)))
    if dev > tol:
        raise NormalizationError(f"|T| deviates from 1 by {dev:.3e}")
    M2 = A @ A - 0.5 * B
    F1 = from_matrix(0.5 * B[..., :2, :2])
    F2 = from_matrix(M2[..., 2:, 2:])
    leak = float(max(np.max(np.abs(F1[..., 0])), np.max(np.abs(F2[..., 0]))))
    if leak > tol:
        raise ImaginaryLeakError(f"Sym pair immersion has real part {leak:.3e}")
    meta = {"method": pf.method, "real_leak": leak, "T_defect": dev}
    return SymPair(SurfaceGrid(F=F1[..., 1:], grid=pf.grid, meta=dict(meta)),
                   SurfaceGrid(F=F2[..., 1:], grid=pf.grid, meta=dict(meta)), S, T, structure)


def rigid_distance(A, B):
    """Max distance between point sets after the best rotation and translation."""
    from scipy.spatial.transform import Rotation
    a = A.reshape(-1, 3) - A.reshape(-1, 3).mean(0)
    b = B.reshape(-1, 3) - B.reshape(-1, 3).mean(0)
    rot, _ = Rotation.align_vectors(a, b)
    return float(np.max(np.linalg.norm(a - rot.apply(b), axis=-1)))


def cylinder_fixture(grid):
    """R = cos x i + sin x j + y k with exact tangents."""
    x, y = grid.z.real, grid.z.imag
    z, one = np.zeros_like(x), np.ones_like(x)
    R = np.stack([z, np.cos(x), np.sin(x), y], -1)
    Rx = np.stack([z, -np.sin(x), np.cos(x), z], -1)
    Ry = np.stack([z, z, z, one], -1)
    return QuatSurface(R, grid, Rx, Ry, {"fixture": "cylinder"})
