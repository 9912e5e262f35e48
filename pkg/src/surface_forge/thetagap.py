"""Finite-gap CMC data from a hyperelliptic spectral curve.

The curve is  M^2 = L * prod_i (L - L_i)(L - 1/conj(L_i))  with |L_i| < 1.
Cuts are the radial segments [L_i, 1/conj(L_i)] plus one ray from 0 to
infinity at an angle away from every arg L_i.  On the slit plane the branch

    M(L) = sqrt_ray(L) * prod_i (L - L_i) sqrt((L - 1/conj L_i) / (L - L_i))

is single valued ("sheet +").  a_i circles cut i counterclockwise; b_i runs
from L_i to 0 on sheet + and back on sheet -, oriented so that Re B is
negative definite.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._quad import adaptive_gl, endpoint_smoothed
from .errors import (PathInconsistencyError, QuadratureError, SingularSystemError,
                     ThetaConvergenceError, ThetaDivisorError)

DEFAULT_TOL = 1e-12
QUAD_ORDER = 20
LATTICE_CAP = 2_000_000
RAY_LENGTH = 1e8


def sqrt_ray(L, angle):
    """Square root with its cut on the ray arg L = angle; sqrt(1) = 1 if 1 is off the cut."""
    rot = np.exp(-1j * (angle + np.pi))
    return np.exp(0.5j * (angle + np.pi)) * np.sqrt(np.asarray(L) * rot)


def _seg_dist(p, a, b):
    """Distance from points p to the segment [a, b]."""
    d = b - a
    t = np.clip(np.real((p - a) * np.conj(d)) / abs(d) ** 2, 0, 1)
    return np.abs(p - (a + t * d))


def _seg_seg_dist(a, b, c, d, n=400):
    s = np.linspace(0, 1, n)
    return float(min(np.min(_seg_dist(a + (b - a) * s, c, d)), np.min(_seg_dist(c + (d - c) * s, a, b))))


# --- the curve ---------------------------------------------------------------

@dataclass(frozen=True)
class HyperellipticCurve:
    branch: tuple

    def __post_init__(self):
        b = tuple(complex(x) for x in np.atleast_1d(self.branch))
        object.__setattr__(self, "branch", b)
        if len(b) < 1:
            raise ValueError("genus must be at least 1")
        arr = np.array(b)
        if np.any(np.abs(arr) >= 1) or np.any(np.abs(arr) == 0):
            raise ValueError("branch values must satisfy 0 < |L_i| < 1")
        ang = np.angle(arr)
        for i in range(len(b)):
            for j in range(i):
                if abs(b[i] - b[j]) < 1e-12:
                    raise ValueError("coincident branch points")
                da = abs(np.angle(np.exp(1j * (ang[i] - ang[j]))))
                if da < 1e-9:
                    raise ValueError("branch values on a common ray give overlapping cuts")

    @property
    def genus(self):
        return len(self.branch)

    @property
    def inner(self):
        return np.array(self.branch)

    @property
    def outer(self):
        return 1 / np.conj(self.inner)

    @property
    def cut_angle(self):
        """Direction of the 0-infinity cut: middle of the widest angular gap."""
        a = np.sort(np.mod(np.angle(self.inner), 2 * np.pi))
        gaps = np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))
        k = int(np.argmax(gaps))
        return float(np.angle(np.exp(1j * (a[k] + 0.5 * gaps[k]))))

    def branch_points(self):
        return np.concatenate([[0j], self.inner, self.outer])

    def min_branch_distance(self):
        p = self.branch_points()
        d = np.abs(p[:, None] - p[None, :])
        np.fill_diagonal(d, np.inf)
        return float(np.min(d))

    def sqrt_L(self, L):
        return sqrt_ray(L, self.cut_angle)

    def pair_product(self, L):
        """prod_i (L - L_i) sqrt((L - 1/conj L_i)/(L - L_i)), ~ L^g at infinity."""
        L = np.asarray(L, complex)
        out = np.ones(L.shape, complex)
        for a, b in zip(self.inner, self.outer):
            out = out * (L - a) * np.sqrt((L - b) / (L - a))
        return out

    def M(self, L):
        return self.sqrt_L(L) * self.pair_product(L)

    def one_minus_R(self, L):
        """1 - pair_product(L)/L^g, accurate for large |L|."""
        L = np.asarray(L, complex)
        e = np.concatenate([self.inner, self.outer])
        big = np.abs(L) > 4 * np.max(np.abs(e))
        out = np.empty(L.shape, complex)
        if np.any(big):
            x = np.asarray(e)[:, None] / L[big][None, :]
            r = np.sqrt(1 - x)
            one_minus = x / (1 + r)
            acc, prod = one_minus[0], r[0]
            for k in range(1, len(e)):
                acc = acc + prod * one_minus[k]
                prod = prod * r[k]
            out[big] = acc
        if np.any(~big):
            Ls = L[~big]
            out[~big] = 1 - self.pair_product(Ls) / Ls ** self.genus
        return out

    def obstacles(self, skip):
        """Cut segments other than cut `skip`, plus the 0-infinity ray."""
        segs = [(self.inner[j], self.outer[j]) for j in range(self.genus) if j != skip]
        segs.append((0j, RAY_LENGTH * np.exp(1j * self.cut_angle)))
        return segs

    def to_dict(self):
        return {"genus": self.genus, "branch_points": [[b.real, b.imag] for b in self.branch]}


# --- contours ----------------------------------------------------------------

@dataclass
class Ellipse:
    center: complex
    a: float
    b: float
    direction: complex

    def point(self, s):
        return self.direction * (self.center + self.a * np.cos(s) + 1j * self.b * np.sin(s))

    def tangent(self, s):
        return self.direction * (-self.a * np.sin(s) + 1j * self.b * np.cos(s))


def a_contour(curve, i):
    """Counterclockwise ellipse around cut i, clear of all other cuts."""
    a_pt, b_pt = curve.inner[i], curve.outer[i]
    obs = curve.obstacles(i)
    gap = min(_seg_seg_dist(a_pt, b_pt, c, d) for c, d in obs)
    safety = 1e-3 * curve.min_branch_distance()
    delta = 0.5 * gap
    if delta < safety:
        raise QuadratureError(f"cut {i} is within {gap:.2e} of another cut")
    direction = a_pt / abs(a_pt)
    xi_in, xi_out = abs(a_pt) - delta, abs(b_pt) + delta
    center = 0.5 * (xi_in + xi_out)
    semi = 0.5 * (xi_out - xi_in)
    s = np.linspace(0, 2 * np.pi, 4001)
    b = semi
    while b >= delta:
        e = Ellipse(center, semi, b, direction)
        pts = e.point(s)
        clear = min(np.min(_seg_dist(pts, c, d)) for c, d in obs)
        if clear > 0.5 * delta:
            break
        b *= 0.5
    else:
        e = Ellipse(center, semi, delta, direction)
    pts = e.point(s)
    near = np.min(np.abs(pts[:, None] - curve.branch_points()[None, :]))
    if near < safety:
        raise QuadratureError(f"a-contour {i} passes within {near:.2e} of a branch point")
    return e


def contour_integral(curve, contour, powers, n=QUAD_ORDER, tol=1e-13, tau=False):
    """Integrals of L^k dL / M over a closed contour for each k in `powers`.

    With tau=True the contour is replaced by its image under L -> 1/conj(L).
    """
    powers = np.asarray(powers)

    def f(s):
        L, dL = contour.point(s), contour.tangent(s)
        if tau:
            dL = -np.conj(dL) / np.conj(L) ** 2
            L = 1 / np.conj(L)
        return (L[None, :] ** powers[:, None]) / curve.M(L)[None, :] * dL[None, :]
    return adaptive_gl(f, 0.0, 2 * np.pi, n, tol, panels=16)


def segment_integral(curve, a, b, powers, n=QUAD_ORDER, tol=1e-13):
    powers = np.asarray(powers)
    return endpoint_smoothed(lambda L: (L[None, :] ** powers[:, None]) / curve.M(L)[None, :],
                             a, b, n, tol)


def polyline_integral(curve, pts, powers, n=QUAD_ORDER, tol=1e-13):
    return sum(segment_integral(curve, pts[k], pts[k + 1], powers, n, tol)
               for k in range(len(pts) - 1))


# --- periods -----------------------------------------------------------------

@dataclass
class PeriodData:
    """B = (int_{b_n} omega_m), normalized differentials omega_m = sum_k C[m,k] L^k dL/M."""

    curve: HyperellipticCurve
    B: np.ndarray
    C: np.ndarray
    A_raw: np.ndarray
    Bv_raw: np.ndarray
    b_sign: np.ndarray
    b_shift: np.ndarray
    a_residual: float
    symmetry_error: float
    order: int

    @property
    def genus(self):
        return self.curve.genus


def compute_periods(curve, n=QUAD_ORDER, tol=1e-13):
    g = curve.genus
    powers = np.arange(-1, g + 1)
    A = np.array([contour_integral(curve, a_contour(curve, i), powers, n, tol) for i in range(g)])
    Bv = np.array([2 * segment_integral(curve, curve.inner[i], 0j, powers[1:], n, tol)
                   for i in range(g)])
    Ak = A[:, 1:g + 1]
    if np.linalg.cond(Ak) > 1e12:
        raise SingularSystemError("a-period matrix is numerically singular")
    C = 2j * np.pi * np.linalg.inv(Ak.T)
    B = C @ Bv[:, :g].T
    sign = np.where(np.real(np.diag(B)) > 0, -1.0, 1.0)
    B = B * sign[None, :]
    Bv = Bv * sign[:, None]
    # b-cycles sharing the branch point 0 may intersect; re-anchoring b_n by
    # integer multiples of a_m removes the 2 pi i mismatch above the diagonal
    shift = np.zeros((g, g))
    for m in range(g):
        for k in range(m + 1, g):
            shift[m, k] = np.round(((B[m, k] - B[k, m]) / (2j * np.pi)).real)
    B = B - 2j * np.pi * shift
    sym = float(np.max(np.abs(B - B.T)))
    if sym > 1e-8 * max(1.0, float(np.max(np.abs(B)))):
        raise QuadratureError(f"period matrix not symmetric (error {sym:.2e})")
    B = 0.5 * (B + B.T)
    if np.max(np.linalg.eigvalsh(B.real)) >= 0:
        raise QuadratureError("Re B is not negative definite")
    resid = float(np.max(np.abs(C @ Ak.T - 2j * np.pi * np.eye(g))))
    return PeriodData(curve, B, C, A, Bv, sign, shift, resid, sym, n)


def tau_a_periods(pd, n=QUAD_ORDER):
    """Periods of the normalized differentials over the tau-images of the a-cycles."""
    curve, g = pd.curve, pd.genus
    raw = np.array([contour_integral(curve, a_contour(curve, i), np.arange(g), n, tau=True)
                    for i in range(g)])
    return pd.C @ raw.T


# --- second-kind differentials -----------------------------------------------

@dataclass
class SecondKind:
    """Omega_inf = (L^g/2 + sum c_k L^k) dL/M and Omega_0 = (d0/L + sum e_k L^k) dL/M."""

    c_inf: np.ndarray
    d0: complex
    e0: np.ndarray
    U: np.ndarray
    a_residual_inf: float
    a_residual_0: float

    def omega_inf_coeff(self, curve, L):
        L = np.asarray(L, complex)
        g = curve.genus
        poly = 0.5 * L ** g + sum(c * L ** k for k, c in enumerate(self.c_inf))
        return poly / curve.M(L)

    def omega_0_coeff(self, curve, L):
        L = np.asarray(L, complex)
        poly = self.d0 / L + sum(c * L ** k for k, c in enumerate(self.e0))
        return poly / curve.M(L)


def second_kind_differentials(pd):
    curve, g = pd.curve, pd.genus
    A = pd.A_raw
    Ak = A[:, 1:g + 1]
    try:
        c = -0.5 * np.linalg.solve(Ak, A[:, g + 1])
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    m0 = np.prod(-curve.inner * np.sqrt(curve.outer / curve.inner))
    d0 = -0.5 * m0
    e = -d0 * np.linalg.solve(Ak, A[:, 0])
    U = 0.5 * pd.Bv_raw[:, g] + pd.Bv_raw[:, :g] @ c
    r_inf = float(np.max(np.abs(0.5 * A[:, g + 1] + Ak @ c)))
    r_0 = float(np.max(np.abs(d0 * A[:, 0] + Ak @ e)))
    return SecondKind(c, d0, e, U, r_inf, r_0)


def b_period_inf_alt(pd, sk, bend=0.35, n=QUAD_ORDER):
    """U recomputed along bent b-paths L_i -> (L_i/2)(1 + i*bend) -> 0."""
    curve, g = pd.curve, pd.genus
    out = []
    for i in range(g):
        Li = curve.inner[i]
        mid = 0.5 * Li * (1 + 1j * bend)
        v = 2 * polyline_integral(curve, [Li, mid, 0j], np.arange(g + 1), n) * pd.b_sign[i]
        out.append(0.5 * v[g] + v[:g] @ sk.c_inf)
    return np.array(out)


# --- theta function ----------------------------------------------------------

@dataclass
class ThetaTruncation:
    radius: int
    tail_bound: float


def _tail_bound(mu, g, R):
    m = np.arange(R + 1, R + 200)
    counts = (2 * m + 1.0) ** g - (2 * m - 1.0) ** g
    return float(np.sum(counts * np.exp(-0.5 * mu * np.maximum(m - 0.5, 0) ** 2)))


def truncation_radius(B, tol=DEFAULT_TOL, margin=0):
    """Smallest box radius whose tail bound (relative to the dominant term) is < tol."""
    B = np.atleast_2d(B)
    g = B.shape[0]
    mu = -np.max(np.linalg.eigvalsh(0.5 * (B.real + B.real.T)))
    if mu <= 0:
        raise ThetaConvergenceError("Re B is not negative definite")
    R = 1
    while _tail_bound(mu, g, R) >= tol:
        R += 1
        if (2 * R + 1) ** g > LATTICE_CAP:
            raise ThetaConvergenceError(f"lattice cap reached at radius {R}")
    R += margin
    return ThetaTruncation(R, _tail_bound(mu, g, R))


def _lattice(g, R):
    r = np.arange(-R, R + 1)
    return np.stack(np.meshgrid(*([r] * g), indexing="ij"), -1).reshape(-1, g)


def theta(u, B, tol=DEFAULT_TOL, radius=None, grad=False):
    """Riemann theta  sum_k exp(1/2 (Bk, k) + (u, k))  for u of shape (..., g).

    The lattice box is centered on the dominant term of each point.  With
    grad=True the gradient with respect to u is returned as well.
    """
    B = np.atleast_2d(np.asarray(B, complex))
    g = B.shape[0]
    u = np.asarray(u, complex)
    if g == 1 and (u.ndim == 0 or u.shape[-1] != 1):
        u = u[..., None]
    shape = u.shape[:-1]
    uf = u.reshape(-1, g)
    R = truncation_radius(B, tol).radius if radius is None else int(radius)
    ReB = 0.5 * (B.real + B.real.T)
    kstar = -np.linalg.solve(ReB, uf.real.T).T
    centers = np.round(kstar).astype(int)
    box = _lattice(g, R)
    val = np.empty(len(uf), complex)
    gr = np.empty((len(uf), g), complex)
    uniq, inv = np.unique(centers, axis=0, return_inverse=True)
    inv = np.ravel(inv)
    for ci, c in enumerate(uniq):
        idx = np.nonzero(inv == ci)[0]
        k = box + c
        quad = 0.5 * np.einsum("ki,ij,kj->k", k, B, k)
        ex = quad[None, :] + uf[idx] @ k.T
        shift = np.max(ex.real, axis=1, keepdims=True)
        w = np.exp(ex - shift)
        scale = np.exp(shift[:, 0])
        val[idx] = w.sum(1) * scale
        if grad:
            gr[idx] = (w @ k) * scale[:, None]
    val = val.reshape(shape)
    if grad:
        return val, gr.reshape(shape + (g,))
    return val


# --- spectral data -----------------------------------------------------------

@dataclass
class SpectralData:
    curve: HyperellipticCurve
    periods: PeriodData
    second: SecondKind
    D: np.ndarray
    tol: float = DEFAULT_TOL
    radius: Optional[int] = None
    meta: dict = field(default_factory=dict)

    @property
    def genus(self):
        return self.curve.genus

    @property
    def B(self):
        return self.periods.B

    @property
    def U(self):
        return self.second.U

    @property
    def Delta(self):
        return np.full(self.genus, 1j * np.pi)

    def theta(self, u, grad=False):
        return theta(u, self.B, self.tol, self.radius, grad)


def spectral_data(branch, D=None, n=QUAD_ORDER, tol=DEFAULT_TOL, radius=None):
    curve = HyperellipticCurve(tuple(np.atleast_1d(branch)))
    D = np.zeros(curve.genus, complex) if D is None else np.asarray(D, complex).reshape(-1)
    if D.shape != (curve.genus,):
        raise ValueError("D must have one entry per handle")
    if np.max(np.abs(D.real)) > 1e-12:
        raise ValueError("D must be purely imaginary")
    pd = compute_periods(curve, n)
    sk = second_kind_differentials(pd)
    return SpectralData(curve, pd, sk, D, tol, radius)


def spectral_data_from_json(obj, n=QUAD_ORDER):
    """Build SpectralData from {genus, branch_points, D, P0, truncation, sheet?}."""
    bp = np.array([complex(*p) for p in obj["branch_points"]])
    if "genus" in obj and int(obj["genus"]) != len(bp):
        raise ValueError("genus does not match the number of branch points")
    D = obj.get("D")
    if D is not None:
        D = np.array([complex(*d) if isinstance(d, (list, tuple)) else 1j * float(d) for d in D])
    radius = obj.get("truncation")
    sd = spectral_data(bp, D, n, radius=None if radius is None else int(radius))
    if "P0" in obj:
        sd.meta["P0"] = complex(*obj["P0"])
    sd.meta["sheet"] = int(obj.get("sheet", 1))
    return sd


def _W(z, sd):
    z = np.asarray(z, complex)
    return 1j * np.real(np.multiply.outer(z, sd.U)) + sd.D


def _divisor_check(tw, twd, tol=1e-10):
    if np.any(np.abs(tw) < tol * np.abs(twd)):
        raise ThetaDivisorError("evaluation point is too close to the theta divisor")


def sinh_gordon_u(z, sd, return_imag=False):
    """u = 2 log(theta(W + Delta)/theta(W)),  W = i Re(U z) + D."""
    W = _W(z, sd)
    tw, twd = sd.theta(W), sd.theta(W + sd.Delta)
    _divisor_check(tw, twd)
    v = 2 * np.log(twd / tw)
    if return_imag:
        return v.real, float(np.max(np.abs(v.imag)))
    return v.real


def sinh_gordon_uz(z, sd):
    """Exact u_z of the theta formula (W_z = i U / 2)."""
    W = _W(z, sd)
    tw, gw = sd.theta(W, grad=True)
    td, gd = sd.theta(W + sd.Delta, grad=True)
    _divisor_check(tw, td)
    return 2 * ((gd / td[..., None] - gw / tw[..., None]) @ (0.5j * sd.U))


# --- Abel map and the frame ----------------------------------------------------

@dataclass
class AbelPoint:
    """Integrals from infinity to P0 = (L0, sheet) along the radial ray."""

    L0: complex
    sheet: int
    l: np.ndarray
    L: complex
    lam0: complex


def _check_ray(curve, L0):
    safety = 1e-3 * curve.min_branch_distance()
    ray = (L0, L0 * RAY_LENGTH)
    segs = [(a, b) for a, b in zip(curve.inner, curve.outer)]
    segs.append((0j, RAY_LENGTH * np.exp(1j * curve.cut_angle)))
    dist = min(_seg_seg_dist(ray[0], ray[0] * 10, a, b) for a, b in segs)
    ang = np.angle(L0)
    for a in list(np.angle(curve.inner)) + [curve.cut_angle]:
        if abs(np.angle(np.exp(1j * (ang - a)))) < 1e-9:
            dist = 0.0
    if dist < safety:
        raise PathInconsistencyError("the ray from P0 to infinity meets a cut")


def abel_point(sd, L0, sheet=1, n=QUAD_ORDER, tol=1e-13):
    """Abel image l and regularized L = lim (int Omega_inf - sqrt(L)) at P0.

    Both integrals use the same ray L = L0/rho^2, rho in (0, 1].  The frame
    formula holds with lam0 = sheet * sqrt(L0), so L = lam0 + O(1).
    """
    curve, g = sd.curve, sd.genus
    L0 = complex(L0)
    _check_ray(curve, L0)
    C, c = sd.periods.C, sd.second.c_inf

    def f(rho):
        L = L0 / rho ** 2
        dL = -2 * L0 / rho ** 3
        M = curve.M(L)
        om = np.array([sum(C[m, k] * L ** k for k in range(g)) for m in range(g)]) / M
        s = curve.sqrt_L(L)
        R = M / (s * L ** g)
        reg = (0.5 * curve.one_minus_R(L) + sum(ck * L ** k for k, ck in enumerate(c)) / L ** g) / (s * R)
        return sheet * np.vstack([om, reg[None, :]]) * dL[None, :]

    v = adaptive_gl(f, 0.0, 1.0, n, tol, panels=4)
    s0 = complex(curve.sqrt_L(L0))
    return AbelPoint(L0, sheet, v[:g], sheet * s0 + v[g], sheet * s0)


@dataclass
class FiniteGapFrame:
    Phi: np.ndarray
    det_constant: complex
    abel: AbelPoint


def frame_det_constant(sd, ab):
    z = np.zeros(sd.genus, complex)
    th = sd.theta
    return 2 * th(ab.l) * th(ab.l + sd.Delta) / (th(z) * th(sd.Delta))


def finite_gap_frame(z, sd, ab):
    """Baker-Akhiezer frame; solves the CMC system at lam = ab.lam0."""
    z = np.asarray(z, complex)
    W = _W(z, sd)
    th = sd.theta
    tw, twd = th(W), th(W + sd.Delta)
    _divisor_check(tw, twd)
    pref = 1j / np.sqrt(tw * twd)
    l, Dl = ab.l, sd.Delta
    m = np.empty(z.shape + (2, 2), complex)
    m[..., 0, 0] = th(W + l)
    m[..., 0, 1] = th(W - l)
    m[..., 1, 0] = th(W + Dl + l)
    m[..., 1, 1] = -th(W + Dl - l)
    ph = np.exp(1j * np.real(z * ab.L))
    m[..., :, 0] *= ph[..., None]
    m[..., :, 1] /= ph[..., None]
    return FiniteGapFrame(pref[..., None, None] * m, complex(frame_det_constant(sd, ab)), ab)


def finite_gap_unitary_frame(z, sd, t, sheet=1, n=QUAD_ORDER):
    """Frame at L0 = e^{2it} scaled into SL(2) (unitary on the unit circle)."""
    ab = abel_point(sd, np.exp(2j * t), sheet, n)
    fr = finite_gap_frame(z, sd, ab)
    return fr.Phi / np.sqrt(fr.det_constant), ab


def abel_point_t(sd, ab):
    """d l/dt and d L/dt as L0 = e^{2it} moves on the unit circle.

    Both are the integrands at the endpoint times dL0/dt = 2i L0.
    """
    curve, g = sd.curve, sd.genus
    L0 = ab.L0
    dL0 = 2j * L0
    M0 = complex(curve.M(L0))
    C = sd.periods.C
    om = ab.sheet * np.array([sum(C[m, k] * L0 ** k for k in range(g)) for m in range(g)]) / M0
    Om = ab.sheet * complex(sd.second.omega_inf_coeff(curve, L0))
    return om * dL0, Om * dL0


def finite_gap_unitary_frame_t(z, sd, t, sheet=1, n=QUAD_ORDER):
    """Unitary frame at L0 = e^{2it} and its exact t-derivative."""
    z = np.asarray(z, complex)
    ab = abel_point(sd, np.exp(2j * t), sheet, n)
    lt, Lt = abel_point_t(sd, ab)
    W = _W(z, sd)
    th = sd.theta
    tw, twd = th(W), th(W + sd.Delta)
    _divisor_check(tw, twd)
    l, Dl = ab.l, sd.Delta
    ent, dent = [], []
    for arg, sgn in ((W + l, 1), (W - l, -1), (W + Dl + l, 1), (W + Dl - l, -1)):
        v, gr = th(arg, grad=True)
        ent.append(v)
        dent.append(sgn * (gr @ lt))
    ent[3], dent[3] = -ent[3], -dent[3]
    m = np.stack([np.stack(ent[:2], -1), np.stack(ent[2:], -1)], -2)
    mt = np.stack([np.stack(dent[:2], -1), np.stack(dent[2:], -1)], -2)
    ph = np.exp(1j * np.real(z * ab.L))
    pht = 1j * np.real(z * Lt)
    E = np.zeros(z.shape + (2, 2), complex)
    E[..., 0, 0], E[..., 1, 1] = ph, 1 / ph
    Et = E.copy()
    Et[..., 0, 0] *= pht
    Et[..., 1, 1] *= -pht
    pref = (1j / np.sqrt(tw * twd))[..., None, None]
    Phi = pref * (m @ E)
    Phi_t = pref * (mt @ E + m @ Et)
    zero = np.zeros(sd.genus, complex)
    v1, g1 = th(l, grad=True)
    v2, g2 = th(l + Dl, grad=True)
    c = 2 * v1 * v2 / (th(zero) * th(Dl))
    ct = c * ((g1 @ lt) / v1 + (g2 @ lt) / v2)
    rc = np.sqrt(c)
    return Phi / rc, Phi_t / rc - 0.5 * Phi * ct / rc ** 3, ab


def finite_gap_surface(sd, grid, t0, sheet=1, delta=None):
    """Sym immersion of the finite-gap frame at L0 = e^{2 i t0}.

    The t-derivative is exact by default; pass delta for a central difference.
    """
    from .frameflow import central_t_derivative, sym_immersion
    z = grid.z
    if delta is None:
        Phi, Phi_t, _ = finite_gap_unitary_frame_t(z, sd, t0, sheet)
    else:
        Phi, Phi_t = central_t_derivative(
            lambda t: finite_gap_unitary_frame(z, sd, t, sheet)[0], t0, delta)
    return sym_immersion(Phi, Phi_t, grid, tol=1e-6)


# --- periodicity ---------------------------------------------------------------

def _wrap(x):
    return np.angle(np.exp(1j * np.asarray(x)))


def periodicity_check(sd, Z1, Z2, L0, sheet=1):
    """Signed distances of Re(Z_k U) and Re(2 Z_k L) to 2 pi Z, and |Omega_inf(P0)|."""
    ab = abel_point(sd, L0, sheet)
    rep = {}
    for name, Z in (("Z1", complex(Z1)), ("Z2", complex(Z2))):
        lat = _wrap(np.real(Z * sd.U))
        fr = float(_wrap(np.real(2 * Z * ab.L)))
        rep[name] = {"lattice_signed": lat.tolist(), "lattice": float(np.max(np.abs(lat))),
                     "frame_signed": fr, "frame": abs(fr)}
    rep["omega_inf_at_P0"] = float(abs(sd.second.omega_inf_coeff(sd.curve, ab.L0)))
    return rep
