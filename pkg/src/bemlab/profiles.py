"""Scalar functions of proper time with first and second derivatives.

A :class:`ScalarProfile` bundles ``value``, ``d1`` and ``d2`` so that curvature
formulas can be evaluated exactly. Profiles built from the named constructors
below carry analytic derivatives; :func:`from_callable` falls back to central
differences and records that it did so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

DEFAULT_SAMPLES = 512
DEFAULT_HORIZON = 20.0


def _as_out(t, values):
    values = np.asarray(values, dtype=float)
    if np.ndim(t) == 0:
        return float(values)
    return np.broadcast_to(values, np.shape(t)).astype(float, copy=True)


@dataclass(frozen=True)
class Interval:
    """Real interval with optional open ends; infinite ends are always open."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty interval ({self.lo}, {self.hi})")
        if math.isinf(self.lo):
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi):
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def closed(cls, lo, hi):
        return cls(float(lo), float(hi), True, True)

    @classmethod
    def open(cls, lo=-math.inf, hi=math.inf):
        return cls(float(lo), float(hi), False, False)

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        above = t >= self.lo if self.lo_closed else t > self.lo
        below = t <= self.hi if self.hi_closed else t < self.hi
        return above & below

    def require(self, t, what="t"):
        if not np.all(self.contains(t)):
            raise DomainError(f"{what}={t!r} outside domain {self}")

    def finite_window(self, horizon=DEFAULT_HORIZON):
        """Finite ``(lo, hi)`` used for dense sampling; infinite ends are cut at ``horizon``."""
        lo, hi = self.lo, self.hi
        if math.isinf(lo) and math.isinf(hi):
            return -horizon, horizon
        if math.isinf(lo):
            return min(hi, 0.0) - horizon, hi
        if math.isinf(hi):
            return lo, max(lo, 0.0) + horizon
        return lo, hi

    def grid(self, n=DEFAULT_SAMPLES, horizon=DEFAULT_HORIZON):
        """``n`` points covering the interval; open ends are inset by 1e-6 of the span."""
        lo, hi = self.finite_window(horizon)
        inset = 1e-6 * (hi - lo)
        if not (self.lo_closed and not math.isinf(self.lo)):
            lo = lo + inset
        if not (self.hi_closed and not math.isinf(self.hi)):
            hi = hi - inset
        return np.linspace(lo, hi, n)

    def reflected(self):
        return Interval(-self.hi, -self.lo, self.hi_closed, self.lo_closed)

    def intersect(self, other):
        if self.lo == other.lo:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        else:
            lo, lo_closed = max((self.lo, self.lo_closed), (other.lo, other.lo_closed), key=lambda e: e[0])
        if self.hi == other.hi:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        else:
            hi, hi_closed = min((self.hi, self.hi_closed), (other.hi, other.hi_closed), key=lambda e: e[0])
        return Interval(lo, hi, lo_closed, hi_closed)

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


REAL_LINE = Interval()


@dataclass(frozen=True)
class ScalarProfile:
    """A function of proper time together with its first two derivatives."""

    name: str
    fn: Callable = field(repr=False)
    dfn: Callable = field(repr=False)
    d2fn: Callable = field(repr=False)
    domain: Interval = REAL_LINE
    analytic: bool = True

    def value(self, t):
        return _as_out(t, self.fn(np.asarray(t, dtype=float)))

    def d1(self, t):
        return _as_out(t, self.dfn(np.asarray(t, dtype=float)))

    def d2(self, t):
        return _as_out(t, self.d2fn(np.asarray(t, dtype=float)))

    __call__ = value

    # combinators -----------------------------------------------------------

    def apply(self, g, dg, d2g, name):
        """Compose ``g`` after this profile using the chain rule."""
        f, df, d2f = self.fn, self.dfn, self.d2fn

        def v(t):
            return g(f(t))

        def d(t):
            return dg(f(t)) * df(t)

        def dd(t):
            x = f(t)
            return d2g(x) * df(t) ** 2 + dg(x) * d2f(t)

        return ScalarProfile(name, v, d, dd, self.domain, self.analytic)

    def __add__(self, other):
        if not isinstance(other, ScalarProfile):
            c = float(other)
            return ScalarProfile(f"({self.name}+{c:g})", lambda t: self.fn(t) + c, self.dfn, self.d2fn,
                                 self.domain, self.analytic)
        return ScalarProfile(
            f"({self.name}+{other.name})",
            lambda t: self.fn(t) + other.fn(t),
            lambda t: self.dfn(t) + other.dfn(t),
            lambda t: self.d2fn(t) + other.d2fn(t),
            self.domain.intersect(other.domain),
            self.analytic and other.analytic,
        )

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, ScalarProfile):
            c = float(other)
            return ScalarProfile(f"{c:g}*{self.name}", lambda t: c * self.fn(t), lambda t: c * self.dfn(t),
                                 lambda t: c * self.d2fn(t), self.domain, self.analytic)
        a, b = self, other
        return ScalarProfile(
            f"{a.name}*{b.name}",
            lambda t: a.fn(t) * b.fn(t),
            lambda t: a.dfn(t) * b.fn(t) + a.fn(t) * b.dfn(t),
            lambda t: a.d2fn(t) * b.fn(t) + 2.0 * a.dfn(t) * b.dfn(t) + a.fn(t) * b.d2fn(t),
            a.domain.intersect(b.domain),
            a.analytic and b.analytic,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def reflected(self):
        """The profile of ``t -> self(-t)``, used for time-reversal checks."""
        f, df, d2f = self.fn, self.dfn, self.d2fn
        return ScalarProfile(f"{self.name}(-t)", lambda t: f(-t), lambda t: -df(-t), lambda t: d2f(-t),
                             self.domain.reflected(), self.analytic)

    def shifted(self, t0):
        """The profile of ``t -> self(t - t0)``."""
        f, df, d2f = self.fn, self.dfn, self.d2fn
        dom = self.domain
        return ScalarProfile(f"{self.name}(t-{t0:g})", lambda t: f(t - t0), lambda t: df(t - t0),
                             lambda t: d2f(t - t0),
                             Interval(dom.lo + t0, dom.hi + t0, dom.lo_closed, dom.hi_closed), self.analytic)

    def log(self):
        return self.apply(np.log, lambda x: 1.0 / x, lambda x: -1.0 / x**2, f"log({self.name})")

    def sqrt(self):
        return self.apply(np.sqrt, lambda x: 0.5 / np.sqrt(x), lambda x: -0.25 * x ** -1.5, f"sqrt({self.name})")

    def restricted(self, domain):
        return ScalarProfile(self.name, self.fn, self.dfn, self.d2fn, self.domain.intersect(domain), self.analytic)


# named constructors ----------------------------------------------------------


def constant(c, domain=REAL_LINE):
    c = float(c)
    zero = lambda t: np.zeros_like(t, dtype=float)  # noqa: E731
    return ScalarProfile(f"const({c:g})", lambda t: np.full_like(t, c, dtype=float), zero, zero, domain)


def exponential(rate=1.0, amp=1.0, domain=REAL_LINE):
    """``amp * exp(rate * t)``."""
    r, A = float(rate), float(amp)
    return ScalarProfile(
        f"{A:g}*exp({r:g}t)",
        lambda t: A * np.exp(r * t),
        lambda t: A * r * np.exp(r * t),
        lambda t: A * r * r * np.exp(r * t),
        domain,
    )


def power(p, amp=1.0, origin=0.0):
    """``amp * (t - origin)**p`` on ``(origin, inf)``."""
    p, A, t0 = float(p), float(amp), float(origin)
    return ScalarProfile(
        f"{A:g}*(t-{t0:g})^{p:g}",
        lambda t: A * (t - t0) ** p,
        lambda t: A * p * (t - t0) ** (p - 1.0),
        lambda t: A * p * (p - 1.0) * (t - t0) ** (p - 2.0),
        Interval.open(t0, math.inf),
    )


def cosh(rate=1.0, amp=1.0):
    r, A = float(rate), float(amp)
    return ScalarProfile(
        f"{A:g}*cosh({r:g}t)",
        lambda t: A * np.cosh(r * t),
        lambda t: A * r * np.sinh(r * t),
        lambda t: A * r * r * np.cosh(r * t),
    )


def sinh_power(p=2.0 / 3.0, rate=1.5, amp=1.0):
    """``amp * sinh(rate t)**p`` on ``(0, inf)``; ``p=2/3, rate=3/2`` is flat LCDM with Lambda=3."""
    p, r, A = float(p), float(rate), float(amp)

    def v(t):
        return A * np.sinh(r * t) ** p

    def d(t):
        s, c = np.sinh(r * t), np.cosh(r * t)
        return A * p * r * s ** (p - 1.0) * c

    def dd(t):
        s, c = np.sinh(r * t), np.cosh(r * t)
        return A * p * r * r * (s**p + (p - 1.0) * s ** (p - 2.0) * c * c)

    return ScalarProfile(f"{A:g}*sinh({r:g}t)^{p:g}", v, d, dd, Interval.open(0.0, math.inf))


def polynomial(coeffs, domain=REAL_LINE):
    """``sum(coeffs[k] * t**k)`` (ascending order)."""
    c = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    dc, d2c = c.deriv(1), c.deriv(2)
    name = "poly(" + ",".join(f"{x:g}" for x in c.coef) + ")"
    return ScalarProfile(name, lambda t: c(t), lambda t: dc(t), lambda t: d2c(t), domain)


def sinusoid(offset=1.0, amp=0.1, freq=1.0, phase=0.0, domain=REAL_LINE):
    """``offset + amp * sin(freq t + phase)``."""
    c0, A, w, ph = float(offset), float(amp), float(freq), float(phase)
    return ScalarProfile(
        f"{c0:g}+{A:g}*sin({w:g}t+{ph:g})",
        lambda t: c0 + A * np.sin(w * t + ph),
        lambda t: A * w * np.cos(w * t + ph),
        lambda t: -A * w * w * np.sin(w * t + ph),
        domain,
    )


def from_callable(fn, name="user", domain=REAL_LINE, h=1e-4):
    """Wrap a plain (numpy-vectorised) function; derivatives by central differences."""
    h1, h2 = 0.1 * h, h

    def d(t):
        return (fn(t + h1) - fn(t - h1)) / (2.0 * h1)

    def dd(t):
        return (fn(t + h2) - 2.0 * fn(t) + fn(t - h2)) / (h2 * h2)

    return ScalarProfile(name, fn, d, dd, domain, analytic=False)


PROFILE_BUILDERS = {
    "constant": constant,
    "exp": exponential,
    "power": power,
    "cosh": cosh,
    "sinh_power": sinh_power,
    "polynomial": polynomial,
    "sinusoid": sinusoid,
}
