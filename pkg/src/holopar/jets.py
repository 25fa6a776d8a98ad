"""First-order forward-mode jets (dual numbers with n partials).

A ``Jet`` carries a value and its partial derivatives with respect to n
independent variables. Arithmetic propagates derivatives exactly (to
rounding), which is what the Lie bracket, Christoffel transforms and
curve velocities are built on. Values and partials may be floats, numpy
arrays (batched evaluation) or Jets themselves (nested, for second-order
quantities such as iterated brackets).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SCALARS = (int, float, np.integer, np.floating, np.ndarray)


@dataclass(frozen=True)
class Jet:
    value: object
    partials: tuple

    @staticmethod
    def constant(c, n):
        return Jet(c, (0.0,) * n)

    @staticmethod
    def variable(x, i, n):
        return Jet(x, tuple(1.0 if d == i else 0.0 for d in range(n)))

    @property
    def nvars(self):
        return len(self.partials)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value,
                       tuple(a + b for a, b in zip(self.partials, other.partials)))
        if isinstance(other, _SCALARS):
            return Jet(self.value + other, self.partials)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, tuple(-p for p in self.partials))

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -1.0 * other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value * other.value,
                       tuple(a * other.value + self.value * b
                             for a, b in zip(self.partials, other.partials)))
        if isinstance(other, _SCALARS):
            return Jet(self.value * other, tuple(p * other for p in self.partials))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            inv = 1.0 / other.value
            return Jet(self.value * inv,
                       tuple((a * other.value - self.value * b) * inv * inv
                             for a, b in zip(self.partials, other.partials)))
        if isinstance(other, _SCALARS):
            return Jet(self.value / other, tuple(p / other for p in self.partials))
        return NotImplemented

    def __rtruediv__(self, other):
        inv = 1.0 / self.value
        return Jet(other * inv,
                   tuple(-other * p * inv * inv for p in self.partials))

    def __pow__(self, k):
        if not isinstance(k, _SCALARS):
            return NotImplemented
        v = self.value ** k
        dv = k * self.value ** (k - 1)
        return Jet(v, tuple(p * dv for p in self.partials))


def as_jet(x, n):
    """Promote a scalar to a constant Jet with n partials."""
    return x if isinstance(x, Jet) else Jet.constant(x, n)


def seed_jets(values):
    """Seed independent variables: values[i] becomes the i-th variable Jet."""
    n = len(values)
    return tuple(Jet.variable(values[i], i, n) for i in range(n))


def _lift(fn_num, fn_jet):
    def wrapped(x):
        if isinstance(x, Jet):
            return fn_jet(x)
        return fn_num(x)
    return wrapped


jsqrt = _lift(np.sqrt, lambda x: (lambda s: Jet(s, tuple(p / (2.0 * s) for p in x.partials)))(jsqrt(x.value)))
jexp = _lift(np.exp, lambda x: (lambda e: Jet(e, tuple(p * e for p in x.partials)))(jexp(x.value)))


def jsin(x):
    if isinstance(x, Jet):
        c = jcos(x.value)
        return Jet(jsin(x.value), tuple(p * c for p in x.partials))
    return np.sin(x)


def jcos(x):
    if isinstance(x, Jet):
        s = jsin(x.value)
        return Jet(jcos(x.value), tuple(-p * s for p in x.partials))
    return np.cos(x)


def jet_apply(f, fprime, x):
    """Apply a scalar function with known derivative to a float/array/Jet."""
    if isinstance(x, Jet):
        return Jet(f(x.value), tuple(p * fprime(x.value) for p in x.partials))
    return f(x)


def _bump_g(t):
    # exp(-1/t) for t > 0, 0 otherwise; the standard mollifier glue.
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0.0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step_num(t):
    """C^inf step: 0 for t<=0, 1 for t>=1, strictly increasing between."""
    t = np.asarray(t, dtype=float)
    g = _bump_g(t)
    h = _bump_g(1.0 - t)
    return g / (g + h)


def smooth_step_deriv(t):
    t = np.asarray(t, dtype=float)
    g = _bump_g(t)
    h = _bump_g(1.0 - t)
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    gm, hm = g[mid], h[mid]
    dg = gm / tm ** 2
    dh = hm / (1.0 - tm) ** 2
    out[mid] = (dg * hm + gm * dh) / (gm + hm) ** 2
    return out


def smooth_step(t):
    """Jet-aware smooth step (values may be floats or arrays)."""
    return jet_apply(smooth_step_num, smooth_step_deriv, t)
