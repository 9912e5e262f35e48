"""Adaptive RK4 with step doubling and Richardson-corrected dense evaluation."""

import numpy as np


class VetoError(RuntimeError):
    def __init__(self, t):
        super().__init__(f"step repeatedly vetoed at t={t}")
        self.t = t


class StallError(RuntimeError):
    def __init__(self, t):
        super().__init__(f"step size underflow at t={t}")
        self.t = t


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def doubled_step(f, t, y, h):
    """One RK4 step of size h and two of size h/2; returns (extrapolated, error)."""
    big = rk4_step(f, t, y, h)
    half = rk4_step(f, t, y, 0.5 * h)
    small = rk4_step(f, t + 0.5 * h, half, 0.5 * h)
    diff = (small - big) / 15
    return small + diff, diff


def integrate(f, t0, y0, t1, rtol=1e-10, h0=None, accept=None, max_steps=200000):
    """March y' = f(t, y) from t0 to t1; returns arrays of accepted (t, y).

    `accept(t, y)` may veto a step (returning False), which halves the step.
    """
    ts, ys = [t0], [np.asarray(y0, float)]
    if t1 == t0:
        return np.array(ts), np.array(ys)
    d = np.sign(t1 - t0)
    h = d * (abs(t1 - t0) / 100 if h0 is None else abs(h0))
    t, y = t0, ys[0]
    vetoes = 0
    for _ in range(max_steps):
        if d * (t + h - t1) > 0:
            h = t1 - t
        yn, err = doubled_step(f, t, y, h)
        scale = np.maximum(1.0, np.abs(yn))
        e = float(np.max(np.abs(err) / scale)) / rtol
        if not np.all(np.isfinite(yn)):
            e = np.inf
        if e <= 1.0:
            if accept is not None and not accept(t + h, yn):
                vetoes += 1
                h *= 0.5
                if vetoes > 30:
                    raise VetoError(t)
                continue
            t, y = t + h, yn
            ts.append(t)
            ys.append(y)
            if t == t1:
                return np.array(ts), np.array(ys)
            h *= min(4.0, 0.9 * e ** -0.2) if e > 0 else 4.0
        else:
            h *= max(0.1, 0.9 * e ** -0.2) if np.isfinite(e) else 0.1
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            raise StallError(t)
    raise StallError(t)


def dense(f, ts, ys, tq):
    """Evaluate at query points by one Richardson-corrected step from the nearest sample."""
    tq = np.asarray(tq, float)
    flat = tq.ravel()
    order = np.argsort(ts)
    ts_s, ys_s = ts[order], ys[order]
    idx = np.clip(np.searchsorted(ts_s, flat), 0, len(ts_s) - 1)
    left = np.clip(idx - 1, 0, len(ts_s) - 1)
    pick = np.where(np.abs(ts_s[left] - flat) < np.abs(ts_s[idx] - flat), left, idx)
    t0 = ts_s[pick]
    y0 = ys_s[pick].T
    h = flat - t0
    out, _ = doubled_step(f, t0, y0, h)
    return out.T.reshape(tq.shape + (ys.shape[1],))
