"""Curvature of warped products ``-dt^2 + a(t)^2 h`` with a comoving weight ``f(t)``.

Conventions: the unit normal ``nu = d/dt`` is future directed, the second
fundamental form is ``K(X, Y) = g(nabla_X nu, Y)`` so that ``K = (a'/a) h`` on
each slice and ``H = (n-1) a'/a`` (positive for expansion). Observers are
``X(beta) = cosh(beta) nu + sinh(beta) e`` with ``e`` a unit spatial vector;
by homogeneity and isotropy of the slice the direction of ``e`` is irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .profiles import DEFAULT_SAMPLES, Interval, ScalarProfile, constant

GRAD_CAUSAL_CHOICES = ("future", "past", "both", "none")


@dataclass(frozen=True)
class SpaceForm:
    """Compact spatial slice of constant sectional curvature ``kappa``."""

    d: int
    kappa: int = 0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConfigurationError(f"slice dimension must be an integer >= 1, got {self.d}")
        if self.kappa not in (-1, 0, 1):
            raise ConfigurationError(f"kappa must be -1, 0 or +1, got {self.kappa}")


@dataclass(frozen=True)
class WarpedSpacetime:
    n: int
    a: ScalarProfile
    slice: SpaceForm
    tdomain: Interval | None = None
    name: str = ""

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"spacetime dimension must be >= 2, got {self.n}")
        if self.slice.d != self.n - 1:
            raise ConfigurationError(f"slice dimension {self.slice.d} != n-1 = {self.n - 1}")
        dom = self.a.domain if self.tdomain is None else self.tdomain.intersect(self.a.domain)
        object.__setattr__(self, "tdomain", dom)
        if not self.name:
            object.__setattr__(self, "name", f"warped[a={self.a.name}, kappa={self.slice.kappa}]")
        samples = self.a.value(dom.grid(DEFAULT_SAMPLES))
        if not np.all(samples > 0):
            raise DomainError(f"scale factor {self.a.name} is not positive on {dom}")

    @property
    def kappa(self):
        return self.slice.kappa

    def require(self, t):
        self.tdomain.require(t)

    def reflected(self):
        """The time-reversed spacetime ``a(-t)``."""
        return WarpedSpacetime(self.n, self.a.reflected(), self.slice, self.tdomain.reflected(),
                               self.name + "(-t)")


@dataclass(frozen=True)
class WeightProfile:
    """Comoving weight ``f(t)``; ``sup_bound`` is the declared ``k`` with ``f <= k``.

    ``grad_causal`` records the causal character of ``grad f = -f' d/dt``:
    ``future`` when ``f' <= 0``, ``past`` when ``f' >= 0``, ``both`` for a
    time-independent weight and ``none`` otherwise. Left as ``None`` it is
    inferred by sampling ``f'`` on the profile's domain.
    """

    f: ScalarProfile
    sup_bound: float | None = None
    grad_causal: str | None = None
    samples: int = field(default=DEFAULT_SAMPLES, repr=False)

    def __post_init__(self):
        inferred = self.infer_grad_causal()
        if self.grad_causal is None:
            object.__setattr__(self, "grad_causal", inferred)
        elif self.grad_causal not in GRAD_CAUSAL_CHOICES:
            raise ConfigurationError(f"grad_causal must be one of {GRAD_CAUSAL_CHOICES}")
        elif self.grad_causal != "none" and inferred not in (self.grad_causal, "both"):
            raise ConfigurationError(f"declared grad_causal={self.grad_causal} contradicts sampled f' ({inferred})")
        if self.sup_bound is not None:
            vals = self.f.value(self.f.domain.grid(self.samples))
            if np.max(vals) > self.sup_bound + 1e-12 * max(1.0, abs(self.sup_bound)):
                raise ConfigurationError(f"f exceeds declared bound k={self.sup_bound}")

    def infer_grad_causal(self, tol=1e-14):
        fp = self.f.d1(self.f.domain.grid(self.samples))
        scale = max(1.0, float(np.max(np.abs(self.f.value(self.f.domain.grid(self.samples))))))
        nonpos = bool(np.all(fp <= tol * scale))
        nonneg = bool(np.all(fp >= -tol * scale))
        if nonpos and nonneg:
            return "both"
        if nonpos:
            return "future"
        if nonneg:
            return "past"
        return "none"

    def is_grad_causal(self, direction):
        return self.grad_causal in (direction, "both")

    def reflected(self):
        flip = {"future": "past", "past": "future"}.get(self.grad_causal, self.grad_causal)
        return WeightProfile(self.f.reflected(), self.sup_bound, flip, self.samples)


def zero_weight():
    return WeightProfile(constant(0.0), sup_bound=0.0)


@dataclass(frozen=True)
class Observer:
    t: float
    beta: float = 0.0

    def components(self):
        """``(cosh beta, sinh beta)``: coefficients of ``nu`` and ``e``."""
        return math.cosh(self.beta), math.sinh(self.beta)

    def norm2(self):
        c, s = self.components()
        return -c * c + s * s


# closed forms ----------------------------------------------------------------


def ricci_components(M, t):
    """``(Ric(nu,nu), Ric(e,e))`` for a unit spatial ``e``."""
    M.require(t)
    a, ap, app = M.a.value(t), M.a.d1(t), M.a.d2(t)
    n = M.n
    r_nn = -(n - 1) * app / a
    r_ee = app / a + (n - 2) * (ap * ap + M.kappa) / (a * a)
    return r_nn, r_ee


def hessian_components(M, w, t):
    """``(Hess f(nu,nu), Hess f(e,e)) = (f'', -(a'/a) f')``."""
    M.require(t)
    return w.f.d2(t), -(M.a.d1(t) / M.a.value(t)) * w.f.d1(t)


def ricci_obs(M, t, beta=0.0):
    r_nn, r_ee = ricci_components(M, t)
    c2, s2 = np.cosh(beta) ** 2, np.sinh(beta) ** 2
    return c2 * r_nn + s2 * r_ee


def hess_f_obs(M, w, t, beta=0.0):
    h_nn, h_ee = hessian_components(M, w, t)
    return np.cosh(beta) ** 2 * h_nn + np.sinh(beta) ** 2 * h_ee


def ric_f_obs(M, w, t, beta=0.0):
    return ricci_obs(M, t, beta) + hess_f_obs(M, w, t, beta)


def ric_f_coefficients(M, w, t):
    """``(A, B)`` with ``Ric_f(X(beta), X(beta)) = A + sinh(beta)^2 * B``."""
    r_nn, r_ee = ricci_components(M, t)
    h_nn, h_ee = hessian_components(M, w, t)
    A = r_nn + h_nn
    return A, A + r_ee + h_ee


def mean_curvature(M, t):
    M.require(t)
    return (M.n - 1) * M.a.d1(t) / M.a.value(t)


def second_fundamental_form(M, t):
    """``K`` in an orthonormal frame of the slice: ``(a'/a) * identity``."""
    M.require(t)
    return (M.a.d1(t) / M.a.value(t)) * np.eye(M.n - 1)


def shear(M, t):
    K = second_fundamental_form(M, t)
    return K - np.trace(K) / (M.n - 1) * np.eye(M.n - 1)


def f_mean_curvature(M, w, t):
    return mean_curvature(M, t) - w.f.d1(t)


def normalized_f_mean_curvature(M, w, t):
    return f_mean_curvature(M, w, t) / (M.n - 1)


# finite-difference validator -------------------------------------------------


def _chart_point(d):
    base = np.array([0.11, -0.07, 0.05, 0.03, -0.02, 0.04])
    if d > base.size:
        base = np.resize(base, d)
    return base[:d].copy()


def _conformal_factor(kappa, y):
    return 2.0 / (1.0 + kappa * float(y @ y))


def _metric(M, x):
    """Coordinate metric at ``x = (t, y)`` in the chart ``h = psi(y)^2 delta``."""
    t, y = x[0], x[1:]
    psi = _conformal_factor(M.kappa, y)
    a = float(M.a.value(t))
    g = np.eye(M.n) * (a * psi) ** 2
    g[0, 0] = -1.0
    return g


def _christoffel(M, x, h):
    n = M.n
    dg = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[k] = (_metric(M, x + e) - _metric(M, x - e)) / (2.0 * h)
    ginv = np.linalg.inv(_metric(M, x))
    # lowered[s, m, v] = d_m g_sv + d_v g_sm - d_s g_mv
    lowered = np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg
    return 0.5 * np.einsum("rs,smv->rmv", ginv, lowered)


def _ricci_fd(M, x, h):
    n = M.n
    gam = _christoffel(M, x, h)
    dgam = np.empty((n, n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dgam[k] = (_christoffel(M, x + e, h) - _christoffel(M, x - e, h)) / (2.0 * h)
    ric = (
        np.einsum("rrmv->mv", dgam)
        - np.einsum("vrmr->mv", dgam)
        + np.einsum("rrl,lmv->mv", gam, gam)
        - np.einsum("rvl,lmr->mv", gam, gam)
    )
    return ric, gam


def _obs_fd(M, w, t, beta, h):
    y = _chart_point(M.n - 1)
    x = np.concatenate(([t], y))
    ric, gam = _ricci_fd(M, x, h)
    f = w.f.value
    df = (f(t + h) - f(t - h)) / (2.0 * h)
    d2f = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
    hess = -gam[0] * df
    hess[0, 0] += d2f
    scale = 1.0 / (float(M.a.value(t)) * _conformal_factor(M.kappa, y))
    X = np.zeros(M.n)
    X[0] = math.cosh(beta)
    X[1] = math.sinh(beta) * scale
    return float(X @ ric @ X), float(X @ hess @ X)


def fd_validate(M, w, t, beta=0.0, h=1e-3):
    """Worst relative discrepancy between closed-form and finite-difference curvature.

    The finite-difference route builds Christoffel symbols and the Ricci tensor
    from the coordinate metric by nested central differences (step ``h`` and
    ``h/2``, Richardson-combined) and never touches ``a'`` or ``a''``.
    Relative errors are taken against ``max(1, |closed form|)``.
    """
    reach = 2.0 * h
    if not (M.tdomain.contains(t - reach) and M.tdomain.contains(t + reach)):
        raise DomainError(f"step h={h} too large at t={t} for domain {M.tdomain}")
    r1, s1 = _obs_fd(M, w, t, beta, h)
    r2, s2 = _obs_fd(M, w, t, beta, 0.5 * h)
    ric = (4.0 * r2 - r1) / 3.0
    hess = (4.0 * s2 - s1) / 3.0
    ric_exact = float(ricci_obs(M, t, beta))
    hess_exact = float(hess_f_obs(M, w, t, beta))
    err_r = abs(ric - ric_exact) / max(1.0, abs(ric_exact))
    err_h = abs(hess - hess_exact) / max(1.0, abs(hess_exact))
    return max(err_r, err_h)
