"""Moving-frame integration, the CMC associated family and the Sym formula.

Frames solve Phi_z = U Phi, Phi_zbar = V Phi.  Along grid lines this is
Phi_x = (U + V) Phi and Phi_y = i (U - V) Phi, integrated with RK4 from the
base node (grid center by default).
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _fd
from .errors import CompatibilityError, NonUnitNormalError, VanishingCoefficientError
from ._integrate import integrate_closed
from .quatgeo import SIGMA, ComplexGrid, SurfaceGrid, from_matrix, matrix_to_vec

SUBSTEP_NORM = 10.0
_K = np.array([[-1j, 0], [0, 1j]])


# --- potentials --------------------------------------------------------------

def uv_matrices(u, uz, Q, H):
    """U, V of the conformal frame with det Phi = e^{u/2}."""
    u, uz, Q, H = np.broadcast_arrays(*(np.asarray(a) for a in (u, uz, Q, H)))
    e = np.exp(0.5 * u)
    zero = np.zeros(u.shape, complex)
    U = np.stack([np.stack([uz / 2, -Q / e], -1), np.stack([0.5 * H * e, zero], -1)], -2)
    V = np.stack([np.stack([zero, -0.5 * H * e], -1),
                  np.stack([np.conj(Q) / e, np.conj(uz) / 2], -1)], -2)
    return U, V


def cmc_matrices(u, uz, Q, lam, dt=False):
    """U0, V0 of the H = 1 family at loop parameter lam.

    With dt=True returns the derivatives with respect to t, lam = e^{it}.
    """
    u, uz, Q = np.broadcast_arrays(*(np.asarray(a) for a in (u, uz, Q)))
    e = np.exp(0.5 * u)
    zero = np.zeros(u.shape, complex)
    if not dt:
        U = np.stack([np.stack([uz / 4, 1j * lam * Q / e], -1),
                      np.stack([0.5j * lam * e, -uz / 4], -1)], -2)
        V = np.stack([np.stack([-np.conj(uz) / 4, 0.5j / lam * e], -1),
                      np.stack([1j / lam * np.conj(Q) / e, np.conj(uz) / 4], -1)], -2)
        return U, V
    U = np.stack([np.stack([zero, -lam * Q / e], -1), np.stack([-0.5 * lam * e, zero], -1)], -2)
    V = np.stack([np.stack([zero, 0.5 / lam * e], -1),
                  np.stack([np.conj(Q) / e / lam, zero], -1)], -2)
    return U, V


@dataclass
class FramePotentials:
    """Lax potentials on a grid, either sampled or as a function of z.

    `U`, `V` are (nx, ny, n, n) arrays, or `fn(z)` returns the pair for any
    array of complex points (used for exact midpoint values in RK4).
    """

    grid: ComplexGrid
    U: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None
    fn: Optional[Callable] = None
    lam: Optional[complex] = None

    def __post_init__(self):
        if self.fn is None and (self.U is None or self.V is None):
            raise ValueError("need sampled U, V or a function of z")
        if self.U is None:
            self.U, self.V = self.fn(self.grid.z)

    @property
    def size(self):
        return self.U.shape[-1]


def build_UV(fd, order=_fd.DEFAULT_ORDER):
    """Potentials of the conformal frame from sampled (u, Q, H)."""
    g = fd.grid
    uz = _fd.dz(fd.u, g.hx, g.hy, order)
    U, V = uv_matrices(fd.u, uz, fd.Q, fd.H)
    return FramePotentials(g, U, V)


def build_UV_cmc(u, Q, lam, grid, order=_fd.DEFAULT_ORDER):
    """CMC family potentials from sampled u, Q at loop parameter lam."""
    uz = _fd.dz(u, grid.hx, grid.hy, order)
    U, V = cmc_matrices(u, uz, Q, lam)
    return FramePotentials(grid, U, V, lam=lam)


def cmc_potentials(u_fn, uz_fn, Q_fn, lam, grid, exact_t=False):
    """CMC potentials from callables of z.

    With exact_t=True the system is augmented to carry Phi_t alongside Phi:
    [[U, 0], [U_t, U]] acting on the stacked (Phi; Phi_t).
    """
    def fn(z):
        u, uz, Q = u_fn(z), uz_fn(z), Q_fn(z)
        U, V = cmc_matrices(u, uz, Q, lam)
        if not exact_t:
            return U, V
        Ut, Vt = cmc_matrices(u, uz, Q, lam, dt=True)
        return _block_lower(U, Ut), _block_lower(V, Vt)
    return FramePotentials(grid, fn=fn, lam=lam)


def _block_lower(A, B):
    Z = np.zeros_like(A)
    return np.concatenate([np.concatenate([A, Z], -1), np.concatenate([B, A], -1)], -2)


def zero_curvature_residual(fp, order=_fd.DEFAULT_ORDER, margin=None):
    """max |U_zbar - V_z + [U, V]| on interior nodes."""
    g = fp.grid
    margin = order // 2 if margin is None else margin
    U, V = fp.U, fp.V
    r = _fd.dzbar(U, g.hx, g.hy, order) - _fd.dz(V, g.hx, g.hy, order) + U @ V - V @ U
    return float(np.max(np.abs(_fd.interior(r, margin))))


# --- integration -------------------------------------------------------------

def _lagrange4(line, s):
    """Cubic interpolation of samples line[k] at fractional index s."""
    n = line.shape[0]
    k = int(np.clip(np.floor(s) - 1, 0, n - 4))
    t = s - k
    w = [(-(t - 1) * (t - 2) * (t - 3)) / 6, (t * (t - 2) * (t - 3)) / 2,
         (-t * (t - 1) * (t - 3)) / 2, (t * (t - 1) * (t - 2)) / 6]
    return sum(wi * line[k + i] for i, wi in enumerate(w))


def _line_generator(fp, axis, index):
    """Generator A(s) for Phi along `axis`; index selects the row/col or None for all."""
    g = fp.grid
    if fp.fn is not None:
        def gen(s):
            if axis == 0:
                z = g.z0 + s * g.hx + 1j * g.hy * (np.arange(g.ny) if index is None else index)
            else:
                z = g.z0 + (np.arange(g.nx) if index is None else index) * g.hx + 1j * s * g.hy
            U, V = fp.fn(np.asarray(z))
            return U + V if axis == 0 else 1j * (U - V)
        return gen
    A = fp.U + fp.V if axis == 0 else 1j * (fp.U - fp.V)
    line = np.moveaxis(A, axis, 0)
    if index is not None:
        line = line[:, index]
    n = line.shape[0]

    def gen(s):
        if float(s).is_integer():
            return line[int(s)]
        if n < 4:
            i = int(np.floor(s))
            return line[i] + (s - i) * (line[min(i + 1, n - 1)] - line[i])
        return _lagrange4(line, s)
    return gen


def _rk4_step(gen, P, s, d, h):
    a0, a1 = gen(s), gen(s + d)
    big = max(np.max(np.abs(a0)), np.max(np.abs(a1))) * a0.shape[-1] > SUBSTEP_NORM
    m = 4 if big else 1
    dt = d * h / m
    for k in range(m):
        s0 = s + d * k / m
        A0, Am, A1 = gen(s0), gen(s0 + 0.5 * d / m), gen(s0 + d / m)
        k1 = A0 @ P
        k2 = Am @ (P + 0.5 * dt * k1)
        k3 = Am @ (P + 0.5 * dt * k2)
        k4 = A1 @ (P + dt * k3)
        P = P + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return P


def _integrate_line(gen, P0, i0, n, h):
    out = np.empty((n,) + P0.shape, complex)
    out[i0] = P0
    for d in (1, -1):
        P, i = P0, i0
        while 0 <= i + d < n:
            P = _rk4_step(gen, P, i, d, h)
            i += d
            out[i] = P
    return out


def _integrate_path(fp, Phi0, base, first):
    g = fp.grid
    i0, j0 = base
    if first == "x":
        row = _integrate_line(_line_generator(fp, 0, j0), Phi0, i0, g.nx, g.hx)
        cols = _integrate_line(_line_generator(fp, 1, None), row, j0, g.ny, g.hy)
        return np.swapaxes(cols, 0, 1)
    col = _integrate_line(_line_generator(fp, 1, i0), Phi0, j0, g.ny, g.hy)
    return _integrate_line(_line_generator(fp, 0, None), col, i0, g.nx, g.hx)


@dataclass
class FrameField:
    Phi: np.ndarray
    grid: ComplexGrid
    base: tuple
    path_defect: float
    lam: Optional[complex] = None


def integrate_frame(fp, Phi0=None, base=None, tol=1e-8, check=True):
    """Integrate the Lax system from Phi0 at the base node.

    The x-then-y path is returned; with check=True the y-then-x path is also
    computed and CompatibilityError is raised when the two differ by more
    than 100*tol.
    """
    g = fp.grid
    base = g.center if base is None else tuple(base)
    n = fp.size
    Phi0 = np.eye(n, dtype=complex) if Phi0 is None else np.asarray(Phi0, complex)
    Phi = _integrate_path(fp, Phi0, base, "x")
    defect = 0.0
    if check:
        other = _integrate_path(fp, Phi0, base, "y")
        defect = float(np.max(np.abs(Phi - other)))
        if defect > 100 * tol:
            raise CompatibilityError(f"frame path defect {defect:.3e}", defect)
    return FrameField(Phi, g, base, defect, fp.lam)


# --- associated family and Sym formula -----------------------------------------

def associated_family(Q, t):
    return np.exp(2j * t) * np.asarray(Q)


def cmc_frame(u_fn, uz_fn, Q_fn, t, grid, base=None, tol=1e-8, check=True):
    """SU(2) frame and its exact t-derivative at lam = e^{it}."""
    fp = cmc_potentials(u_fn, uz_fn, Q_fn, np.exp(1j * t), grid, exact_t=True)
    P0 = np.concatenate([np.eye(2), np.zeros((2, 2))]).astype(complex)
    ff = integrate_frame(fp, P0, base, tol, check)
    return ff.Phi[..., :2, :], ff.Phi[..., 2:, :], ff


def central_t_derivative(phi_of_t, t0, delta=1e-3):
    """Phi(t0) and a 4th-order central difference of Phi in t."""
    p1, m1 = phi_of_t(t0 + delta), phi_of_t(t0 - delta)
    p2, m2 = phi_of_t(t0 + 2 * delta), phi_of_t(t0 - 2 * delta)
    d = (8 * (p1 - m1) - (p2 - m2)) / (12 * delta)
    return phi_of_t(t0), d


def sym_immersion(Phi, Phi_t, grid, tol=1e-8):
    """F = -Phi^-1 Phi_t + (i/2) Phi^-1 sigma3 Phi,  N = -i Phi^-1 sigma3 Phi."""
    Phi = np.asarray(Phi, complex)
    s3 = SIGMA[2]
    Pi_s3P = np.linalg.solve(Phi, s3 @ Phi)
    Fm = -np.linalg.solve(Phi, Phi_t) + 0.5j * Pi_s3P
    N = matrix_to_vec(-1j * Pi_s3P)
    err = float(np.max(np.abs(np.linalg.norm(N, axis=-1) - 1)))
    if err > tol:
        raise NonUnitNormalError(f"normal deviates from unit length by {err:.3e}")
    return SurfaceGrid(F=matrix_to_vec(Fm), grid=grid, N=N, Phi=from_matrix(Phi),
                       meta={"normal_unit_error": err})


def vacuum_frame(z, t):
    """Closed-form frame for u = 0, Q = 1/2: exp(i Re(lam z) sigma1), and d/dt."""
    lam = np.exp(1j * t)
    a = np.real(lam * z)
    at = np.real(1j * lam * z)
    I2, s1 = np.eye(2), SIGMA[0]
    c, s = np.cos(a)[..., None, None], np.sin(a)[..., None, None]
    Phi = c * I2 + 1j * s * s1
    Phi_t = (-s * I2 + 1j * c * s1) * at[..., None, None]
    return Phi, Phi_t


def tangent_from_frame(Phi, u):
    """F_z = -i e^{u/2} Phi^-1 [[0, 0], [1, 0]] Phi for SU(2) frames Phi."""
    E = np.array([[0, 0], [1, 0]], complex)
    return -1j * np.exp(0.5 * np.asarray(u))[..., None, None] * np.linalg.solve(Phi, E @ Phi)


def frame_surface(Phi, u, grid, base=None, tol=1e-8):
    """Immersion of a conformal frame with det Phi = e^{u/2}.

    Tangents are F_x = F_z - F_z^*, F_y = i (F_z + F_z^*) with
    F_z = -i e^{u/2} Phi^-1 E Phi; F is their Simpson integral from `base`.
    """
    Fz = tangent_from_frame(Phi, u)
    Fzh = np.conj(np.swapaxes(Fz, -1, -2))
    Fx = matrix_to_vec(Fz - Fzh).real
    Fy = matrix_to_vec(1j * (Fz + Fzh)).real
    N = matrix_to_vec(np.linalg.solve(Phi, _K @ Phi)).real
    base = grid.center if base is None else tuple(base)
    F, defect = integrate_closed(Fx, Fy, grid.hx, grid.hy, base, tol)
    return SurfaceGrid(F=F, grid=grid, N=N, Phi=from_matrix(Phi / np.sqrt(np.linalg.det(Phi).real)[..., None, None]),
                       Fx=Fx, Fy=Fy, meta={"path_defect": defect, "base": base})


# --- gauge -------------------------------------------------------------------

def lambda_linear_part(phi1, phi2, lam1, lam2, grid, order=_fd.DEFAULT_ORDER):
    """A in phi_z phi^-1 = A lam + B from frames at two loop parameters."""
    X = [_fd.dz(p, grid.hx, grid.hy, order) @ np.linalg.inv(p) for p in (phi1, phi2)]
    return (X[0] - X[1]) / (lam1 - lam2)


def gauge_normalize(phi, A21, tol=1e-12):
    """exp((i/2) alpha sigma3) phi with alpha = arg A21 - pi/2.

    The offset pi/2 puts A21 on the positive imaginary axis, matching the
    (i/2) e^{u/2} entry of the CMC potential.
    """
    A21 = np.asarray(A21)
    if np.any(np.abs(A21) < tol):
        raise VanishingCoefficientError("A21 vanishes on the chart")
    alpha = np.angle(A21) - 0.5 * np.pi
    g = np.zeros(A21.shape + (2, 2), complex)
    g[..., 0, 0] = np.exp(0.5j * alpha)
    g[..., 1, 1] = np.exp(-0.5j * alpha)
    return g @ phi
