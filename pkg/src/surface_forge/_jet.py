"""Truncated Taylor jets for exact derivatives of composite expressions.

A Jet stores normalized Taylor coefficients c_k = f^(k)/k! of one variable,
truncated at a fixed order.  Coefficients may be numpy arrays, so a single
Jet carries a whole batch of evaluation points.
"""

from math import factorial

import numpy as np


class Jet:
    __array_priority__ = 100

    def __init__(self, coeffs):
        self.c = [np.asarray(c) for c in coeffs]

    @classmethod
    def from_derivatives(cls, derivs):
        return cls([d / factorial(k) for k, d in enumerate(derivs)])

    @classmethod
    def variable(cls, x, order):
        return cls([x, np.ones_like(x)] + [np.zeros_like(x)] * (order - 1))

    @property
    def order(self):
        return len(self.c) - 1

    def derivatives(self):
        return [c * factorial(k) for k, c in enumerate(self.c)]

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        z = np.zeros_like(np.asarray(other) * self.c[0])
        return Jet([np.asarray(other) + 0 * self.c[0]] + [z] * self.order)

    def __add__(self, other):
        o = self._lift(other)
        return Jet([a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([a * other for a in self.c])
        n = min(self.order, other.order)
        return Jet([sum(self.c[i] * other.c[k - i] for i in range(k + 1)) for k in range(n + 1)])

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.c
        r = [1.0 / a[0]]
        for k in range(1, len(a)):
            r.append(-sum(a[i] * r[k - i] for i in range(1, k + 1)) / a[0])
        return Jet(r)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet([a / other for a in self.c])
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = self._lift(1.0)
        for _ in range(n):
            out = out * self
        return out
