"""Bonnet families: Hazzidakis equations, the Painleve VI map and surface assembly.

Types A1, A2, B, C live on the strip coordinate w with t = w + conj(w); the
family parameter T acts as w -> w + iT.  Type BV(J) lives on the disc |w| < 1
with s = |w|^2 and acts by rotation w -> e^{iT} w.  Mean curvature H is a
function of t (or s) alone and satisfies a third-order ODE integrated as a
first-order system in (H, H', H'').
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _ode
from ._jet import Jet
from .errors import (DenominatorError, DomainError, ExcludedFamilyError, PoleError,
                     RecurrenceBreakdownError, SignFlipError, SingularLocusError,
                     ZeroDerivativeError)
from .frameflow import FramePotentials, frame_surface, integrate_frame, uv_matrices
from .quatgeo import FundamentalData

TAGS = ("A1", "A2", "B", "C", "BV")
MARGIN = 0.05
SERIES_ORDER = 12
MATCH_TOL = 1e-12


@dataclass(frozen=True)
class HazzidakisType:
    tag: str
    J: Optional[int] = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise DomainError(f"unknown type {self.tag!r}")
        if self.tag == "BV" and (self.J is None or int(self.J) != self.J or self.J < 0):
            raise DomainError("type BV needs an integer J >= 0")
        if self.tag != "BV" and self.J is not None:
            raise DomainError("J only applies to type BV")

    @classmethod
    def parse(cls, tag, J=None):
        if isinstance(tag, cls):
            return tag
        return cls(str(tag), None if J is None else int(J))

    @property
    def domain(self):
        """The open interval of t (closed at 0 for s in BV)."""
        return {"A1": (0.0, np.pi / 2), "A2": (0.0, np.pi / 2), "B": (0.0, np.inf),
                "C": (0.0, np.inf), "BV": (0.0, 1.0)}[self.tag]

    def contains(self, t, closed_left=False):
        lo, hi = self.domain
        t = np.asarray(t, float)
        left = t >= lo if closed_left or self.tag == "BV" else t > lo
        return bool(np.all(left & (t < hi)))

    def to_dict(self):
        return {"tag": self.tag, "J": self.J}


# --- the equations -------------------------------------------------------------

def _weight(tag, t):
    """f(t) in ((H''/H')' - H') f = 2 - H^2/H'."""
    if tag in ("A1", "A2"):
        return np.sin(2 * t) ** 2 / 4
    if tag == "B":
        return np.sinh(2 * t) ** 2 / 4
    return t * t


def _rhs(htype, t, H, H1, H2):
    if htype.tag != "BV":
        return H1 * ((2 - H * H / H1) / _weight(htype.tag, t) + H1) + H2 * H2 / H1
    J = htype.J
    s = t
    den = (1 - s ** (J + 2)) ** 2
    full = H1 + (J + 2) ** 2 * (2 * s ** (J + 1) - s ** J * H * H / H1) / den
    return (full * H1 - H2 + s * H2 * H2 / H1) / s


def hazzidakis_rhs(htype, t, H, H1, H2):
    """H''' of the Hazzidakis equation of the given type."""
    htype = HazzidakisType.parse(htype)
    t, H, H1, H2 = np.broadcast_arrays(*(np.asarray(a, float) for a in (t, H, H1, H2)))
    if np.any(H1 == 0):
        raise ZeroDerivativeError("H' = 0 in the Hazzidakis equation")
    lo, hi = htype.domain
    if np.any(t <= lo) or np.any(t >= hi):
        raise DomainError(f"t outside the open domain {htype.domain}")
    return _rhs(htype, t, H, H1, H2)


def _system(htype):
    def f(t, y):
        return np.array([y[1], y[2], _rhs(htype, t, y[0], y[1], y[2])])
    return f


# --- solutions -------------------------------------------------------------------

@dataclass
class HazzidakisSolution:
    """Sampled (H, H', H'') over an interval of the type's domain.

    For BV the samples start at the matching radius and `series` holds the
    coefficients p_k of H'(s) = s^J sum p_k s^k used below it.
    """

    htype: HazzidakisType
    t: np.ndarray
    Y: np.ndarray
    t0: float
    theta2: Optional[float] = None
    series: Optional[np.ndarray] = None
    H_origin: Optional[float] = None
    s_match: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def interval(self):
        lo = 0.0 if self.series is not None else float(self.t[0])
        return lo, float(self.t[-1])

    @property
    def H(self):
        return self.Y[:, 0]

    @property
    def H1(self):
        return self.Y[:, 1]

    @property
    def H2(self):
        return self.Y[:, 2]

    def _check(self, t):
        lo, hi = self.interval
        slack = 1e-12 * max(1.0, abs(hi))
        if np.any(t < lo - slack) or np.any(t > hi + slack):
            raise DomainError(f"evaluation outside the sampled interval [{lo}, {hi}]")

    def evaluate(self, t):
        """(H, H', H'') at arbitrary points of the sampled interval."""
        t = np.asarray(t, float)
        self._check(t)
        out = np.empty(t.shape + (3,))
        inner = np.zeros(t.shape, bool)
        if self.series is not None:
            inner = t <= self.s_match
            if np.any(inner):
                out[inner] = np.stack(_series_eval(self.series, self.htype.J, self.H_origin, t[inner]), -1)
        if np.any(~inner):
            out[~inner] = _ode.dense(_system(self.htype), self.t, self.Y, np.clip(t[~inner], self.t[0], self.t[-1]))
        return out[..., 0], out[..., 1], out[..., 2]

    def third(self, t):
        H, H1, H2 = self.evaluate(t)
        return _rhs(self.htype, np.asarray(t, float), H, H1, H2)

    def reduced(self, s):
        """p = H'/s^J and p' for BV, finite at s = 0."""
        if self.series is None:
            raise DomainError("reduced derivative only for type BV")
        J = self.htype.J
        s = np.asarray(s, float)
        inner = s <= self.s_match
        p = np.empty(s.shape)
        dp = np.empty(s.shape)
        if np.any(inner):
            si = s[inner]
            c = self.series
            p[inner] = np.polynomial.polynomial.polyval(si, c)
            dp[inner] = np.polynomial.polynomial.polyval(si, np.polynomial.polynomial.polyder(c))
        if np.any(~inner):
            so = s[~inner]
            _, H1, H2 = self.evaluate(so)
            p[~inner] = H1 / so ** J
            dp[~inner] = (H2 - J * H1 / so) / so ** J
        return p, dp

    def to_dict(self):
        d = {"type": self.htype.to_dict(), "t0": self.t0, "interval": list(self.interval),
             "samples": len(self.t)}
        if self.theta2 is not None:
            d["theta2"] = self.theta2
        return d


def _march(htype, t0, y0, t1, rtol):
    accept = lambda t, y: y[1] < 0
    try:
        return _ode.integrate(_system(htype), t0, y0, t1, rtol=rtol, accept=accept)
    except _ode.VetoError as e:
        raise SignFlipError(f"H' reached 0 near t={e.t:.6g} despite step refinement") from None
    except _ode.StallError as e:
        raise PoleError(f"integration stalled at t={e.t:.6g}") from None


def integrate_hazzidakis(htype, t0, H0, H1, H2, interval, rtol=1e-10):
    """Adaptive RK4 from data at t0 to both ends of `interval`."""
    htype = HazzidakisType.parse(htype)
    a, b = map(float, interval)
    if not (a <= t0 <= b):
        raise DomainError(f"t0={t0} not inside [{a}, {b}]")
    if not htype.contains([a, b]) or (htype.tag == "BV" and a <= 0):
        raise DomainError(f"[{a}, {b}] not inside the domain {htype.domain}")
    if not H1 < 0:
        raise SignFlipError("initial H' must be negative")
    y0 = np.array([H0, H1, H2], float)
    tl, yl = _march(htype, t0, y0, a, rtol)
    tr, yr = _march(htype, t0, y0, b, rtol)
    t = np.concatenate([tl[::-1], tr[1:]])
    Y = np.concatenate([yl[::-1], yr[1:]])
    sol = HazzidakisSolution(htype, t, Y, float(t0))
    if htype.tag == "B":
        sol.theta2 = float(first_integral(*t_to_x_data(t0, H0, H1, H2)))
    return sol


# --- BV series at the critical point ------------------------------------------------

def _series_mul(a, b, n):
    return np.convolve(a, b)[:n]


def _series_inv(a, n):
    if a[0] == 0:
        raise RecurrenceBreakdownError("zero pivot in the series recurrence", 0)
    r = np.zeros(n)
    r[0] = 1 / a[0]
    for k in range(1, n):
        m = min(k, len(a) - 1)
        r[k] = -np.dot(a[1:m + 1], r[k - 1::-1][:m]) / a[0]
    return r


def bv_coefficients(J, H_origin, H_lead, order=SERIES_ORDER):
    """Coefficients p_k with H'(s) = s^J sum_k p_k s^k, p_0 = (J+1) H_lead."""
    n = order + 1
    p = np.zeros(n)
    p[0] = (J + 1) * H_lead
    if p[0] == 0:
        raise RecurrenceBreakdownError("leading coefficient vanishes", 0)
    a = np.zeros(n)
    kern = np.zeros(n)
    kern[::J + 2] = np.arange(1, len(kern[::J + 2]) + 1)
    for k in range(order):
        m = k + 1
        Hs = np.zeros(m)
        Hs[0] = H_origin
        for i in range(m - J - 1):
            Hs[J + 1 + i] = p[i] / (J + 1 + i)
        inv = _series_inv(p[:m], m)
        br = -_series_mul(_series_mul(Hs, Hs, m), inv, m)
        if J + 1 < m:
            br[J + 1] += 2
        r = _series_mul(br, kern[:m], m) * (J + 2) ** 2
        if k >= J:
            r[k] += p[k - J]
        if not np.isfinite(r[k]):
            raise RecurrenceBreakdownError(f"non-finite coefficient at index {k}", k)
        a[k] = r[k] / (k + 1)
        p[k + 1] = np.dot(a[:k + 1], p[k::-1]) / (k + 1)
    return p


def _series_eval(p, J, H_origin, s):
    P = np.polynomial.polynomial
    k = np.arange(len(p))
    hc = np.concatenate([np.zeros(J + 1), p / (J + 1 + k)])
    H = H_origin + P.polyval(s, hc)
    H1 = P.polyval(s, np.concatenate([np.zeros(J), p]))
    H2 = P.polyval(s, P.polyder(np.concatenate([np.zeros(J), p])))
    return H, H1, H2


def bv_series_solve(J, H_origin, H_lead, order=SERIES_ORDER, s_end=(1 - MARGIN) ** 2, rtol=1e-10):
    """BV solution: series up to the matching radius, then adaptive RK4 to s_end."""
    htype = HazzidakisType("BV", int(J))
    if not H_lead < 0:
        raise SignFlipError("H_lead must be negative so that H' < 0 for s > 0")
    p = bv_coefficients(htype.J, H_origin, H_lead, order)
    last = abs(p[-1]) / (J + 1 + order)
    s_m = min(0.5, s_end, (MATCH_TOL / last) ** (1 / (J + 1 + order)) if last > 0 else 0.5)
    y0 = np.array(_series_eval(p, J, H_origin, s_m))
    t, Y = _march(htype, s_m, y0, s_end, rtol)
    return HazzidakisSolution(htype, t, Y, s_m, series=p, H_origin=float(H_origin), s_match=float(s_m),
                              meta={"order": order})


# --- x coordinates and the first integral ----------------------------------------------

def t_to_x(t):
    return np.exp(-4 * np.asarray(t, float))


def x_to_t(x):
    return -np.log(np.asarray(x, float)) / 4


def t_to_x_data(t, H, H1, H2):
    """(x, H, dH/dx, d2H/dx2) from t-derivatives."""
    x = t_to_x(t)
    Hx = H1 / (-4 * x)
    Hxx = (H2 - 16 * x * Hx) / (16 * x * x)
    return x, H, Hx, Hxx


def x_derivatives(t, H1, H2, H3):
    """dH/dx, d2H/dx2, d3H/dx3 by the chain rule with t = -log(x)/4."""
    x = t_to_x(t)
    d1, d2, d3 = -1 / (4 * x), 1 / (4 * x * x), -1 / (2 * x ** 3)
    return H1 * d1, H2 * d1 ** 2 + H1 * d2, H3 * d1 ** 3 + 3 * H2 * d1 * d2 + H1 * d3


@dataclass
class XCurve:
    x: np.ndarray
    H: np.ndarray
    Hx: np.ndarray
    Hxx: np.ndarray
    theta2: Optional[float] = None


def to_x_coordinates(sol, t=None):
    """Resample a type B solution in x = e^{-4t}, sorted by increasing x."""
    if sol.htype.tag != "B":
        raise DomainError("x coordinates apply to type B only")
    if t is None:
        t = sol.t
        H, H1, H2 = sol.H, sol.H1, sol.H2
    else:
        H, H1, H2 = sol.evaluate(t)
    x, H, Hx, Hxx = t_to_x_data(np.asarray(t, float), H, H1, H2)
    o = np.argsort(x)
    return XCurve(x[o], H[o], Hx[o], Hxx[o], sol.theta2)


def x_form_rhs(x, H, Hx, Hxx):
    """H''' of 4(x H''/H')' + H' = 4/(x-1)^2 (2 + H^2/(4x H')); accepts Jets."""
    rhs = 4 / (x - 1) ** 2 * (2 + H * H / (4 * x * Hx))
    return ((rhs - Hx) / 4 - Hxx / Hx + x * Hxx * Hxx / (Hx * Hx)) * Hx / x


def _check_x(x, Hx):
    if np.any(np.asarray(Hx) == 0):
        raise ZeroDerivativeError("H' = 0")
    if np.any(np.asarray(x) == 1):
        raise DomainError("x = 1 is excluded")


def first_integral(x, H, Hx, Hxx):
    """theta^2 of the x-form equation."""
    _check_x(x, Hx)
    return (x * x * (Hxx / Hx + 2 / (x - 1)) ** 2 + x * Hx / 2
            + H * H / (2 * (x - 1) ** 2 * Hx) + H * (x + 1) / (2 * (x - 1)))


# --- Painleve VI ------------------------------------------------------------------

def _y_expr(x, H, Hx, Hxx, theta):
    num = x * (x - 1) * Hxx + (theta - x * (theta - 2)) * Hx
    q = num / (H + (x - 1) * Hx)
    return -2 / Hx * q * q


def _check_denominator(x, H, Hx, tol=1e-14):
    den = np.asarray(H + (x - 1) * Hx)
    scale = np.abs(H) + np.abs((x - 1) * Hx)
    bad = np.abs(den) <= tol * scale
    if np.any(bad):
        loc = float(np.broadcast_to(x, bad.shape)[bad].flat[0])
        raise DenominatorError(f"H + (x-1)H' vanishes at x={loc:.6g}", loc)


def H_to_y(x, H, Hx, Hxx, theta):
    """Painleve VI solution y(x) from x-form data and a root theta of theta^2."""
    _check_x(x, Hx)
    _check_denominator(x, H, Hx)
    return _y_expr(x, H, Hx, Hxx, theta)


def H_to_y_jet(x, H, Hx, Hxx, theta):
    """(y, y', y'') along the flow, differentiating through the x-form equation."""
    _check_x(x, Hx)
    _check_denominator(x, H, Hx)
    H3 = x_form_rhs(x, H, Hx, Hxx)
    H4 = x_form_rhs(Jet.variable(x, 1), Jet([H, Hx]), Jet([Hx, Hxx]), Jet([Hxx, H3])).c[1]
    X = Jet.variable(np.asarray(x, float), 2)
    y = _y_expr(X, Jet.from_derivatives([H, Hx, Hxx]), Jet.from_derivatives([Hx, Hxx, H3]),
                Jet.from_derivatives([Hxx, H3, H4]), theta)
    return tuple(y.derivatives())


def _check_singular(y, x, tol=1e-12):
    y = np.asarray(y)
    if np.any(np.abs(y) < tol) or np.any(np.abs(y - 1) < tol) or np.any(np.abs(y - x) < tol):
        raise SingularLocusError("y on a singular locus {0, 1, x}")


def pvi_rhs(y, y1, x, theta):
    return (0.5 * (1 / y + 1 / (y - 1) + 1 / (y - x)) * y1 * y1
            - (1 / x + 1 / (x - 1) + 1 / (y - x)) * y1
            + y * (y - 1) * (y - x) / (2 * x * x * (x - 1) ** 2)
            * (theta ** 2 * (x - 1) / (y - 1) ** 2 - theta * (theta + 2) * x * (x - 1) / (y - x) ** 2))


def pvi_residual(y, y1, y2, x, theta):
    """|y'' - RHS| of Painleve VI with the theta-dependent coefficients."""
    _check_singular(y, x)
    return np.abs(y2 - pvi_rhs(y, y1, x, theta))


def y_to_H(y, y1, x, theta, tol=1e-12):
    """Inverse map: the x-form Hazzidakis solution from (y, y')."""
    _check_singular(y, x)
    a, b = theta * y, x * y1
    if np.any(np.abs(a * a - b * b) <= tol * (np.abs(a) ** 2 + np.abs(b) ** 2)):
        raise ExcludedFamilyError("y is locally of the form c x^(-theta)")
    return -2 * (x - 1) * (a - b) * (a + b) / (y * (y - 1) * (y - x))


# --- fundamental data of the family ------------------------------------------------

def chart_variable(htype, w):
    """t = w + conj(w), or s = |w|^2 for BV."""
    w = np.asarray(w, complex)
    return np.abs(w) ** 2 if HazzidakisType.parse(htype).tag == "BV" else 2 * w.real


def _check_chart(htype, w):
    w = np.asarray(w, complex)
    if htype.tag in ("A1", "A2"):
        ok = (w.real > 0) & (w.real < np.pi / 4)
    elif htype.tag == "BV":
        ok = np.abs(w) < 1
    else:
        ok = w.real > 0
    if not np.all(ok):
        raise DomainError(f"w outside the coordinate domain of type {htype.tag}")


def cartan_Q(htype, w, T=0.0):
    """Hopf differential of the family member T at w."""
    htype = HazzidakisType.parse(htype)
    w = np.asarray(w, complex)
    _check_chart(htype, w)
    if htype.tag == "BV":
        J = htype.J
        rot = np.exp(1j * T)
        v = rot * w
        s = np.abs(w) ** 2
        return rot ** 2 * (J + 2) * (1 - np.conj(v) ** (J + 2)) / (1 - v ** (J + 2)) * v ** J / (1 - s ** (J + 2))
    t = 2 * w.real
    v = w + 1j * T
    if htype.tag == "A1":
        return -2 * (np.sin(2 * np.conj(v)) / np.sin(2 * v)) / np.sin(2 * t)
    if htype.tag == "A2":
        return 2 * (np.cos(2 * np.conj(v)) / np.cos(2 * v)) / np.sin(2 * t)
    if htype.tag == "B":
        return -2 * (np.sinh(2 * np.conj(v)) / np.sinh(2 * v)) / np.sinh(2 * t)
    return -(np.conj(v) / v) / t


def metric_from_H(htype, t, H1):
    """e^u in terms of H' (t-types) or of H' (BV, s variable)."""
    htype = HazzidakisType.parse(htype)
    t = np.asarray(t, float)
    if htype.tag == "BV":
        J = htype.J
        return -2 * (J + 2) ** 2 * t ** J / ((1 - t ** (J + 2)) ** 2 * H1)
    c = -2.0 if htype.tag == "C" else -8.0
    f = t * t if htype.tag == "C" else 4 * _weight(htype.tag, t)
    return c / (f * H1)


def _log_weight_derivative(tag, t):
    if tag in ("A1", "A2"):
        return 4 / np.tan(2 * t)
    if tag == "B":
        return 4 / np.tanh(2 * t)
    return 2 / t


def _fields(htype, sol, w):
    """(u, u_w, H) at points w."""
    w = np.asarray(w, complex)
    v = chart_variable(htype, w)
    if htype.tag == "BV":
        J = htype.J
        H, _, _ = sol.evaluate(v)
        p, dp = sol.reduced(v)
        den = 1 - v ** (J + 2)
        u = np.log(-2 * (J + 2) ** 2 / (den ** 2 * p))
        us = 2 * (J + 2) * v ** (J + 1) / den - dp / p
        return u, us * np.conj(w), H
    H, H1, H2 = sol.evaluate(v)
    u = np.log(metric_from_H(htype, v, H1))
    return u, -_log_weight_derivative(htype.tag, v) - H2 / H1 + 0j, H


def _check_margin(htype, sol, w, margin):
    _check_chart(htype, w)
    v = chart_variable(htype, w)
    if htype.tag == "BV":
        if np.max(np.abs(w)) > 1 - margin:
            raise DomainError(f"chart closer than {margin} to |w| = 1")
    else:
        lo, hi = htype.domain
        if np.min(v) < lo + margin or np.max(v) > hi - margin:
            raise DomainError(f"chart closer than {margin} to the boundary of {htype.domain}")
    H1 = sol.evaluate(v)[1]
    pos = v > 0 if htype.tag == "BV" else np.ones(v.shape, bool)
    if np.any(H1[pos] >= 0):
        raise SignFlipError("H' >= 0 on the chart")


def bonnet_fundamental_data(htype, sol, T, chart, margin=MARGIN):
    """Exact (u, Q, H) of the family member T sampled on `chart`."""
    htype = HazzidakisType.parse(htype)
    _check_margin(htype, sol, chart.z, margin)
    u, _, H = _fields(htype, sol, chart.z)
    return FundamentalData(u, cartan_Q(htype, chart.z, T), H, chart)


def build_bonnet_surface(htype, sol, T, chart, tol=1e-8, margin=MARGIN):
    """Integrate frame and immersion of the family member T over `chart`."""
    htype = HazzidakisType.parse(htype)
    if sol.htype != htype:
        raise DomainError("solution type does not match")
    _check_margin(htype, sol, chart.z, margin)

    def fn(w):
        u, uw, H = _fields(htype, sol, w)
        return uv_matrices(u, uw, cartan_Q(htype, w, T), H)

    fp = FramePotentials(chart, fn=fn)
    u, _, H = _fields(htype, sol, chart.z)
    base = chart.center
    ff = integrate_frame(fp, np.exp(u[base] / 4) * np.eye(2), base, tol=tol)
    surf = frame_surface(ff.Phi, u, chart, base, tol=max(tol, 1e-6))
    surf.meta.update({"type": htype.to_dict(), "T": float(T), "frame_defect": ff.path_defect})
    return surf


# --- umbilic index ----------------------------------------------------------------

def winding_number(values):
    """Number of turns of a closed loop of nonzero complex values."""
    v = np.asarray(values, complex)
    if np.any(v == 0):
        raise SingularLocusError("loop passes through a zero")
    d = np.angle(np.roll(v, -1) / v)
    return int(np.rint(np.sum(d) / (2 * np.pi)))


def square_loop(center, r):
    """Grid indices of the square of half-width r around `center`, counter-clockwise."""
    i, j = center
    side = np.arange(-r, r)
    pts = ([(i + k, j - r) for k in side] + [(i + r, j + k) for k in side]
           + [(i - k, j + r) for k in side] + [(i - r, j - k) for k in side])
    return tuple(np.array(pts).T)
