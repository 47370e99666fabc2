"""Brans-Dicke cosmology (n = 4) in Jordan and Einstein frames.

Models are spatially homogeneous: metric ``-dt^2 + a(t)^2 h`` on a space form,
scalar ``phi(t) > 0``, potential ``V(phi)`` and a comoving perfect fluid
``(rho, p)``. The weight of the Bakry-Emery picture is ``f = -log(phi)``.

FLRW reduction with ``b = a'/a`` (8*pi kept explicit):

* constraint  ``3(b^2 + k/a^2) = V/(2phi) - 3 b phi'/phi + 8 pi rho/phi + w phi'^2/(2 phi^2)``
* spatial     ``-(2a''/a + b^2 + k/a^2) + V/(2phi) = (phi'' + 2 b phi')/phi + 8 pi p/phi + w phi'^2/(2 phi^2)``
* scalar      ``-phi'' - 3 b phi' = (8 pi (3p - rho) + phi V' - 2V)/(3 + 2w)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from . import certificates as cert
from . import geometry
from .certificates import Certificate, Hypothesis, SurfaceData
from .errors import ConfigurationError, DomainError, IntegrationError, PreconditionError
from .geometry import SpaceForm, WarpedSpacetime, WeightProfile
from .profiles import DEFAULT_SAMPLES, Interval, ScalarProfile, constant

EIGHT_PI = 8.0 * math.pi
DUAL_TOL = 1e-10
EC_TOL = 1e-9
STRICT_MARGIN = 1e-10
CONSTRAINT_DRIFT_TOL = 1e-7


# potentials and matter ------------------------------------------------------------


@dataclass(frozen=True)
class Potential:
    name: str
    V: Callable = field(repr=False)
    dV: Callable = field(repr=False)

    def __call__(self, phi):
        return self.V(np.asarray(phi, dtype=float))

    def d1(self, phi):
        return self.dV(np.asarray(phi, dtype=float))


def zero_potential():
    return Potential("zero", lambda x: np.zeros_like(x, dtype=float), lambda x: np.zeros_like(x, dtype=float))


def linear_potential(lam, omega):
    """``V = -((3+2w)/(1+w)) lam phi``, whose effective cosmological term is ``lam``."""
    if omega == -1:
        raise ConfigurationError("the linear potential needs omega != -1")
    c = -(3.0 + 2.0 * omega) / (1.0 + omega) * float(lam)
    return Potential(f"linear(lam={lam:g},omega={omega:g})", lambda x: c * x, lambda x: np.full_like(x, c, dtype=float))


def power_potential(coeff, power):
    """``V = coeff * phi**power``."""
    c, q = float(coeff), float(power)
    return Potential(f"{c:g}*phi^{q:g}", lambda x: c * x**q, lambda x: c * q * x ** (q - 1.0))


POTENTIALS = {
    "zero": zero_potential,
    "linear": linear_potential,
    "power": power_potential,
}


@dataclass(frozen=True)
class Fluid:
    """Comoving perfect fluid; ``tr_g T = -rho + 3p``."""

    rho: ScalarProfile
    p: ScalarProfile

    def trace(self, t):
        return -self.rho.value(t) + 3.0 * self.p.value(t)


def vacuum():
    return Fluid(constant(0.0), constant(0.0))


def barotropic(a, rho0, eos=0.0):
    """``rho = rho0 a^(-3(1+eos))`` and ``p = eos * rho`` along the scale factor ``a``."""
    m = -3.0 * (1.0 + eos)

    def rho(t):
        return rho0 * a.fn(t) ** m

    def drho(t):
        return m * rho(t) * a.dfn(t) / a.fn(t)

    def d2rho(t):
        b = a.dfn(t) / a.fn(t)
        db = a.d2fn(t) / a.fn(t) - b * b
        return m * (drho(t) * b + rho(t) * db)

    r = ScalarProfile(f"{rho0:g}*a^{m:g}", rho, drho, d2rho, a.domain)
    return Fluid(r, r * eos)


@dataclass(frozen=True)
class BDModel:
    omega: float
    phi: ScalarProfile
    potential: Potential
    fluid: Fluid
    geom: WarpedSpacetime
    name: str = "bd"

    def __post_init__(self):
        if self.geom.n != 4:
            raise ConfigurationError(f"Brans-Dicke models are four-dimensional, got n={self.geom.n}")
        if not self.omega > -1.5:
            raise ConfigurationError(f"omega must exceed -3/2, got {self.omega}")
        samples = self.phi.value(self.grid())
        if not np.all(samples > 0):
            raise DomainError("scalar field must be positive on the time domain")

    @property
    def below_minus_one(self):
        """``omega < -1``: the weighted theorems do not apply, the conformal one may."""
        return self.omega < -1

    def grid(self, samples=DEFAULT_SAMPLES):
        return self.geom.tdomain.intersect(self.phi.domain).grid(samples)

    @property
    def c_omega(self):
        return (1.0 + self.omega) / (3.0 + 2.0 * self.omega)


# weight translation and potential functionals --------------------------------------


def weight_from_scalar(phi, sup_bound=None, samples=DEFAULT_SAMPLES):
    """``f = -log(phi)``; the causal character of ``grad f`` follows from ``phi'``."""
    if not np.all(phi.value(phi.domain.grid(samples)) > 0):
        raise DomainError(f"scalar {phi.name} is not positive on {phi.domain}")
    f = -phi.log()
    f = ScalarProfile(f"-log({phi.name})", f.fn, f.dfn, f.d2fn, f.domain, f.analytic)
    return WeightProfile(f, sup_bound=sup_bound, samples=samples)


def lambda_v_form(omega, potential, phi):
    """``-(V' + (1+2w) V/phi) / (2(3+2w))``; raises ``ZeroDivisionError`` at ``w = -3/2``."""
    denom = 2.0 * (3.0 + 2.0 * omega)
    if denom == 0:
        raise ZeroDivisionError("omega = -3/2 is excluded")
    phi = np.asarray(phi, dtype=float)
    return -(potential.d1(phi) + (1.0 + 2.0 * omega) * potential(phi) / phi) / denom


def w_functionals(potential, f):
    """``W(f) = -exp(f) V(exp(-f)) / 6`` and its derivative in ``f``."""
    f = np.asarray(f, dtype=float)
    phi = np.exp(-f)
    V = potential(phi)
    W = -V / (6.0 * phi)
    return W, W + potential.d1(phi) / 6.0


def _w_slope(potential, f):
    """``dW/df`` by complex step on ``V`` alone, independent of the supplied ``V'``.

    Potentials that cannot take complex input fall back to the closed form.
    """
    h = 1e-30
    z = np.asarray(f, dtype=float) + 1j * h
    try:
        W = -np.exp(z) * np.asarray(potential.V(np.exp(-z))) / 6.0
    except (TypeError, ValueError):
        return None
    if not np.iscomplexobj(W):
        return None
    return np.imag(W) / h


def potential_functionals(m, f):
    """``(W, W', Lambda)`` at weight value ``f``.

    Lambda is evaluated both from ``W`` and directly from ``V``. The W-form
    differentiates ``V`` itself, so disagreement beyond ``1e-10`` means the
    supplied ``V'`` is not the derivative of ``V``.
    """
    omega = m.omega
    if 3.0 + 2.0 * omega == 0:
        raise ZeroDivisionError("omega = -3/2 is excluded")
    W, Wp = w_functionals(m.potential, f)
    slope = _w_slope(m.potential, f)
    if slope is not None:
        Wp = slope
    lam_w = (6.0 * (1.0 + omega) * W - 3.0 * Wp) / (3.0 + 2.0 * omega)
    lam_v = lambda_v_form(omega, m.potential, np.exp(-np.asarray(f, dtype=float)))
    gap = np.max(np.abs(lam_w - lam_v) / np.maximum(1.0, np.abs(lam_v)))
    if gap > DUAL_TOL:
        raise ConfigurationError(f"W-form and V-form Lambda disagree by {gap:.3g}")
    if np.ndim(f) == 0:
        return float(W), float(Wp), float(lam_w)
    return W, Wp, lam_w


# energy conditions -----------------------------------------------------------------


def omega_energy_margin(m, t, beta=0.0):
    """``T(X,X) + ((1+w)/(3+2w)) tr T`` for the unit observer ``X(beta)``."""
    rho, p = m.fluid.rho.value(t), m.fluid.p.value(t)
    c2, s2 = np.cosh(beta) ** 2, np.sinh(beta) ** 2
    return c2 * rho + s2 * p + m.c_omega * (-rho + 3.0 * p)


def sec_margin(m, t, beta=0.0):
    """``T(X,X) - g(X,X) tr_g T / 2`` with ``g(X,X) = -1``."""
    rho, p = m.fluid.rho.value(t), m.fluid.p.value(t)
    c2, s2 = np.cosh(beta) ** 2, np.sinh(beta) ** 2
    return c2 * rho + s2 * p + 0.5 * (-rho + 3.0 * p)


def sec_margin_einstein(m, t, beta=0.0):
    """The same combination assembled with the rescaled metric ``phi g`` in coordinates.

    Uses explicit 4x4 matrices so that it is an independent evaluation of the
    conformal invariance of the strong-energy combination.
    """
    t = float(t)
    a, phi = float(m.geom.a.value(t)), float(m.phi.value(t))
    rho, p = float(m.fluid.rho.value(t)), float(m.fluid.p.value(t))
    g = np.diag([-1.0, a * a, a * a, a * a])
    gt = phi * g
    T = np.diag([rho, p * a * a, p * a * a, p * a * a])
    X = np.array([math.cosh(beta), math.sinh(beta) / a, 0.0, 0.0])
    tr_t = float(np.trace(np.linalg.inv(gt) @ T))
    return float(X @ T @ X) - 0.5 * float(X @ gt @ X) * tr_t


def _affine_min(coef_a, coef_b, tol=EC_TOL):
    """``min over beta of A + sinh^2(beta) B`` given sampled coefficients."""
    scale = np.maximum(1.0, np.maximum(np.abs(coef_a), np.abs(coef_b)))
    if np.any(coef_b < -tol * scale):
        return -math.inf
    return float(np.min(coef_a))


def omega_ec_min(m, tgrid=None):
    t = m.grid() if tgrid is None else tgrid
    rho, p = m.fluid.rho.value(t), m.fluid.p.value(t)
    return _affine_min(rho + m.c_omega * (-rho + 3.0 * p), rho + p)


def sec_min(m, tgrid=None):
    t = m.grid() if tgrid is None else tgrid
    rho, p = m.fluid.rho.value(t), m.fluid.p.value(t)
    return _affine_min(0.5 * (rho + 3.0 * p), rho + p)


# lemmas --------------------------------------------------------------------------


def q_functional(m, phi):
    phi = np.asarray(phi, dtype=float)
    return m.potential.d1(phi) + (1.0 + 2.0 * m.omega) * m.potential(phi) / phi


def phi_range(m, samples=DEFAULT_SAMPLES):
    vals = m.phi.value(m.grid(samples))
    return float(np.min(vals)), float(np.max(vals))


def lemma44_sup_q(m, samples=DEFAULT_SAMPLES):
    return float(np.max(q_functional(m, m.phi.value(m.grid(samples)))))


def lemma44_level(m, samples=DEFAULT_SAMPLES):
    """``ge0`` if ``sup Q <= 0``, ``geMinus3`` if ``sup Q <= 6(3+2w)``, else ``none``.

    ``Q = V' + (1+2w) V/phi`` is sampled along the model's own scalar profile.
    The lemma's standing assumptions are reported by :func:`lemma44_hypotheses`.
    """
    q = lemma44_sup_q(m, samples)
    if q <= 0:
        return "ge0"
    if q <= 6.0 * (3.0 + 2.0 * m.omega):
        return "geMinus3"
    return "none"


def lemma44_hypotheses(m):
    ec = omega_ec_min(m)
    return (Hypothesis("omega >= -1", m.omega >= -1, m.omega),
            Hypothesis("omega-energy condition", ec >= -EC_TOL, ec))


def bd_slice(m, t_S, *, compact=True, cauchy=True, samples=DEFAULT_SAMPLES):
    """Slice data with ``phi0 = inf phi`` over the causal past and ``phi1 = phi(t_S)``."""
    w = weight_from_scalar(m.phi)
    past = cert.causal_half(m.geom, t_S, "past").intersect(m.phi.domain)
    phi0 = float(np.min(m.phi.value(past.grid(samples))))
    return cert.homogeneous_slice(m.geom, w, t_S, compact=compact, cauchy=cauchy, phi0=phi0,
                                  phi1=float(m.phi.value(t_S)))


def scalar_rate(m, t):
    """``-(1/phi) d phi / dt`` along the comoving normal."""
    return -float(m.phi.d1(t)) / float(m.phi.value(t))


def lemma45_threshold(m, S, which):
    """Jordan-frame threshold on ``H`` equivalent to the ``H_f`` condition ``which``.

    ``eq410``: ``H_f > 0``; ``eq411``: ``H_f > 3 exp((2/3)(k - N))`` with
    ``k = -log(phi0)`` and ``N = -log(phi1)``; ``eq412``: ``H_f > 3``.
    """
    base = scalar_rate(m, S.t_S)
    if which == "eq410":
        return base
    if which == "eq411":
        if S.phi0 is None or S.phi1 is None:
            raise PreconditionError("eq411 needs phi0 and phi1 on the slice")
        return base + 3.0 * (S.phi1 / S.phi0) ** (2.0 / 3.0)
    if which == "eq412":
        return base + 3.0
    raise PreconditionError(f"unknown threshold {which!r}; valid: eq410, eq411, eq412")


def lemma45_condition(m, S, which, strict=True):
    """``H(S) > threshold`` (or ``>=`` with ``strict=False``)."""
    H = float(geometry.mean_curvature(m.geom, S.t_S))
    thr = lemma45_threshold(m, S, which)
    return H > thr if strict else H >= thr


def hf_condition(m, S, which, strict=True):
    """The weighted side of the same equivalence, evaluated from ``H_f`` directly."""
    w = weight_from_scalar(m.phi)
    hf = float(geometry.f_mean_curvature(m.geom, w, S.t_S))
    if which == "eq410":
        thr = 0.0
    elif which == "eq411":
        if S.phi0 is None or S.phi1 is None:
            raise PreconditionError("eq411 needs phi0 and phi1 on the slice")
        k, N = -math.log(S.phi0), -math.log(S.phi1)
        thr = 3.0 * math.exp(2.0 * (k - N) / 3.0)
    elif which == "eq412":
        thr = 3.0
    else:
        raise PreconditionError(f"unknown threshold {which!r}")
    return hf > thr if strict else hf >= thr


# theorem checkers --------------------------------------------------------------------


def _require_n4(m):
    if m.geom.n != 4:
        raise ConfigurationError("Brans-Dicke checkers are four-dimensional")


def _bd_certificate(tag, bd_hyps, delegate, m, S, extras):
    hyps = tuple(bd_hyps) + tuple(Hypothesis(f"[{delegate.theorem}] {h.name}", h.passed, h.witness)
                                  for h in delegate.hypotheses)
    fires = all(h.passed for h in bd_hyps) and delegate.fires
    extras = dict(extras)
    extras["delegate"] = delegate.theorem
    extras["delegate_verdict"] = delegate.verdict
    return Certificate(tag, "past", hyps, "FIRES" if fires else "FAILS",
                       delegate.conclusion if fires else cert.NO_CONCLUSION,
                       delegate.delta if fires else None, delegate.t_bound if fires else None,
                       m.name, S.t_S, extras)


def check_t46(m, S, *, margin=STRICT_MARGIN):
    """Big-bang theorem with ``Ric_f >= 0`` obtained from the Brans-Dicke data.

    Brans-Dicke-form hypotheses are recorded first; the weighted certificate
    for the past direction is then computed on ``(geom, -log phi)`` and its
    hypotheses appended. The verdict fires only if both lists pass.
    """
    _require_n4(m)
    lo, _ = phi_range(m)
    H = float(geometry.mean_curvature(m.geom, S.t_S))
    thr = lemma45_threshold(m, S, "eq410")
    q = lemma44_sup_q(m)
    bd = lemma44_hypotheses(m) + (
        Hypothesis("phi >= phi0 > 0", lo > 0, lo),
        Hypothesis("V' + (1+2w)V/phi <= 0", q <= 0, q),
        Hypothesis("H > -phi'/phi", H - thr > margin, H - thr),
    )
    w = weight_from_scalar(m.phi, sup_bound=-math.log(lo))
    delegate = cert.check_t11(m.geom, w, _with_weight(m, w, S), "past")
    return _bd_certificate("T4.6", bd, delegate, m, S, {"H": H, "threshold": thr, "phi0": lo})


def check_t47(m, S, case="ii", *, margin=STRICT_MARGIN):
    """Big-bang theorem with ``Ric_f >= -3`` (positive cosmological term allowed)."""
    _require_n4(m)
    if case not in ("i", "ii"):
        raise PreconditionError(f"case must be 'i' or 'ii', got {case!r}")
    H = float(geometry.mean_curvature(m.geom, S.t_S))
    q = lemma44_sup_q(m)
    bd = list(lemma44_hypotheses(m))
    bd.append(Hypothesis("V' + (1+2w)V/phi <= 6(3+2w)", q <= 6.0 * (3.0 + 2.0 * m.omega), q))
    if case == "i":
        if S.phi0 is None or S.phi1 is None:
            S = bd_slice(m, S.t_S, compact=S.compact, cauchy=S.cauchy)
        thr = lemma45_threshold(m, S, "eq411")
        bd.append(Hypothesis("phi0 = inf over past > 0", S.phi0 > 0, S.phi0))
        bd.append(Hypothesis("H > 3(phi1/phi0)^(2/3) - phi'/phi", H - thr > margin, H - thr))
        k_mode = "local"
    else:
        thr = lemma45_threshold(m, S, "eq412")
        dphi = m.phi.d1(m.grid())
        bd.append(Hypothesis("grad phi future causal", bool(np.all(dphi <= 0)), float(np.max(dphi))))
        bd.append(Hypothesis("H > 3 - phi'/phi", H - thr > margin, H - thr))
        k_mode = "global"
    w = weight_from_scalar(m.phi)
    delegate = cert.check_t12(m.geom, w, _with_weight(m, w, S), "past", case, k_mode=k_mode)
    return _bd_certificate("T4.7", bd, delegate, m, S, {"H": H, "threshold": thr, "case": case})


def _with_weight(m, w, S):
    hf = float(geometry.f_mean_curvature(m.geom, w, S.t_S))
    return SurfaceData(S.t_S, hf, hf, float(w.f.value(S.t_S)), S.compact, S.cauchy, S.phi0, S.phi1)


def check_t48(m, S, *, margin=STRICT_MARGIN):
    """Conformal-frame theorem: strong energy condition, ``V <= 0`` and ``H~ > 0``."""
    _require_n4(m)
    pair = einstein_frame(m)
    sec = sec_min(m)
    vmax = float(np.max(m.potential(m.phi.value(m.grid()))))
    Ht = einstein_mean_curvature(m, S.t_S)
    bd = (
        Hypothesis("strong energy condition", sec >= -EC_TOL, sec),
        Hypothesis("V(phi) <= 0", vmax <= 0, vmax),
        Hypothesis("H~ > 0 (Einstein frame)", Ht > margin, Ht),
    )
    tS = float(pair.time_map(S.t_S))
    zero = geometry.zero_weight()
    St = cert.homogeneous_slice(pair.einstein, zero, tS, compact=S.compact, cauchy=S.cauchy)
    delegate = cert.check_t11(pair.einstein, zero, St, "past")
    lo, _ = phi_range(m)
    extras = {"H_einstein": Ht, "jordan_corollary": lo > 0, "phi0": lo, "t_S_einstein": tS}
    if pair.warnings:
        extras["warnings"] = "; ".join(pair.warnings)
    return _bd_certificate("T4.8", bd, delegate, m, S, extras)


# Einstein frame ---------------------------------------------------------------------


@dataclass(frozen=True)
class FramePair:
    jordan: tuple
    einstein: WarpedSpacetime
    time_map: Callable = field(repr=False)
    inverse_map: Callable = field(repr=False)
    warnings: tuple = ()


def einstein_frame(m, anchor=None, rtol=1e-12, atol=1e-14):
    """Rescaled model ``phi g``: proper time ``dt~ = sqrt(phi) dt`` and scale ``sqrt(phi) a``.

    ``t~`` is normalised so that ``t~(anchor) = sqrt(phi(anchor)) * anchor``,
    which makes a constant ``phi = c^2`` map ``t`` to ``c t`` exactly.
    """
    dom = m.geom.tdomain.intersect(m.phi.domain)
    lo, hi = dom.finite_window()
    inset = 1e-9 * (hi - lo)
    lo_i = lo if dom.lo_closed else lo + inset
    hi_i = hi if dom.hi_closed else hi - inset
    if anchor is None:
        anchor = 0.5 * (lo_i + hi_i)
    sq = m.phi.sqrt()
    phis = m.phi.value(dom.grid())
    warnings = []
    if float(np.min(phis)) <= 1e-8 * float(np.max(phis)):
        warnings.append("phi is not bounded away from zero on the domain")

    t_anchor = math.sqrt(float(m.phi.value(anchor))) * anchor
    const = bool(np.allclose(m.phi.d1(dom.grid()), 0.0, atol=0.0, rtol=0.0))
    if const:
        c = math.sqrt(float(phis[0]))

        def time_map(t):
            return c * np.asarray(t, dtype=float) if np.ndim(t) else c * float(t)

        def inverse_map(tt):
            return np.asarray(tt, dtype=float) / c if np.ndim(tt) else float(tt) / c
    else:
        def forward(t, y):
            return [float(sq.value(t))]

        def backward(tt, y):
            return [1.0 / float(sq.value(y[0]))]

        fw_hi = solve_ivp(forward, (anchor, hi_i), [t_anchor], method="DOP853", rtol=rtol, atol=atol,
                          dense_output=True)
        fw_lo = solve_ivp(forward, (anchor, lo_i), [t_anchor], method="DOP853", rtol=rtol, atol=atol,
                          dense_output=True)
        tt_lo, tt_hi = float(fw_lo.y[0, -1]), float(fw_hi.y[0, -1])
        bw_hi = solve_ivp(backward, (t_anchor, tt_hi), [anchor], method="DOP853", rtol=rtol, atol=atol,
                          dense_output=True)
        bw_lo = solve_ivp(backward, (t_anchor, tt_lo), [anchor], method="DOP853", rtol=rtol, atol=atol,
                          dense_output=True)
        for sol in (fw_hi, fw_lo, bw_hi, bw_lo):
            if sol.status < 0:
                raise IntegrationError(f"time map integration failed: {sol.message}")

        def _split(x, left, right, pivot):
            x = np.asarray(x, dtype=float)
            out = np.where(x >= pivot, right.sol(np.maximum(x, pivot))[0], left.sol(np.minimum(x, pivot))[0])
            return float(out) if out.ndim == 0 else out

        tdom = Interval(tt_lo, tt_hi, dom.lo_closed, dom.hi_closed)

        def time_map(t):
            dom.require(t)
            return _split(t, fw_lo, fw_hi, anchor)

        def inverse_map(tt):
            tdom.require(tt, "t~")
            return _split(tt, bw_lo, bw_hi, t_anchor)

    a = m.geom.a
    phi = m.phi

    def at_value(tt):
        t = inverse_map(tt)
        return np.sqrt(phi.fn(t)) * a.fn(t)

    def _dt_parts(t):
        p, dp, d2p = phi.fn(t), phi.dfn(t), phi.d2fn(t)
        A, dA, d2A = a.fn(t), a.dfn(t), a.d2fn(t)
        s = np.sqrt(p)
        da = s * dA + A * dp / (2.0 * s)
        d2a = s * d2A + dA * dp / s + A * d2p / (2.0 * s) - A * dp * dp / (4.0 * p * s)
        return s, p, dp, da, d2a

    def at_d1(tt):
        s, p, dp, da, _ = _dt_parts(inverse_map(tt))
        return da / s

    def at_d2(tt):
        s, p, dp, da, d2a = _dt_parts(inverse_map(tt))
        return (d2a / s - da * dp / (2.0 * p * s)) / s

    ed = Interval(c * dom.lo, c * dom.hi, dom.lo_closed, dom.hi_closed) if const else tdom
    at = ScalarProfile(f"einstein[{a.name}]", at_value, at_d1, at_d2, ed, analytic=False)
    geom = WarpedSpacetime(4, at, m.geom.slice, ed, name=f"{m.geom.name}~")
    return FramePair((m.geom, weight_from_scalar(m.phi)), geom, time_map, inverse_map, tuple(warnings))


def einstein_mean_curvature(m, t):
    """``H~`` of the slice ``t`` in the rescaled metric, from Jordan data."""
    phi, dphi = float(m.phi.value(t)), float(m.phi.d1(t))
    H = float(geometry.mean_curvature(m.geom, t))
    return (H + 1.5 * dphi / phi) / math.sqrt(phi)


def einstein_ricci_rhs(m, t):
    """Right side of the rescaled-frame field equation in the ``(nu~, e~)`` frame."""
    phi, dphi = float(m.phi.value(t)), float(m.phi.d1(t))
    rho, p = float(m.fluid.rho.value(t)), float(m.fluid.p.value(t))
    V = float(m.potential(phi))
    tr = (-rho + 3.0 * p) / phi
    nn = EIGHT_PI / phi * (rho / phi + 0.5 * tr) + (3.0 + 2.0 * m.omega) * dphi**2 / (2.0 * phi**3) - V / (2.0 * phi**2)
    ee = EIGHT_PI / phi * (p / phi - 0.5 * tr) + V / (2.0 * phi**2)
    return nn, ee


def frame_comparison(m, S):
    """Jordan thresholds for ``H`` from both routes, with the slice's actual ``H``."""
    H = float(geometry.mean_curvature(m.geom, S.t_S))
    rate = scalar_rate(m, S.t_S)
    weighted = rate
    conformal = 1.5 * rate
    return {
        "t_S": S.t_S,
        "H": H,
        "threshold_weighted": weighted,
        "threshold_conformal": conformal,
        "weighted_holds": H > weighted,
        "conformal_holds": H > conformal,
        "H_f": float(geometry.f_mean_curvature(m.geom, weight_from_scalar(m.phi), S.t_S)),
        "H_einstein": einstein_mean_curvature(m, S.t_S),
    }


# field equations --------------------------------------------------------------------


@dataclass(frozen=True)
class FieldResiduals:
    r42: float
    r43: float
    r47: float
    r48: float
    components: dict = field(default_factory=dict)
    identity_defect: float = 0.0

    def __iter__(self):
        return iter((self.r42, self.r43, self.r47, self.r48))


def _field_parts(m, t):
    g = m.geom
    a, da, d2a = float(g.a.value(t)), float(g.a.d1(t)), float(g.a.d2(t))
    phi, dphi, d2phi = float(m.phi.value(t)), float(m.phi.d1(t)), float(m.phi.d2(t))
    rho, p = float(m.fluid.rho.value(t)), float(m.fluid.p.value(t))
    V, dV = float(m.potential(phi)), float(m.potential.d1(phi))
    return a, da, d2a, phi, dphi, d2phi, rho, p, V, dV


def field_residuals(m, t):
    """Residuals of the original and the rewritten field equations at time ``t``.

    ``r42`` is the max over the ``tt`` and spatial components of the metric
    equation, ``r43`` the scalar equation; ``r47``/``r48`` the weighted
    rewriting. ``identity_defect`` is the mismatch of the exact algebraic map
    from the first pair of residuals to the second.
    """
    om = m.omega
    kappa = m.geom.kappa
    a, da, d2a, phi, dphi, d2phi, rho, p, V, dV = _field_parts(m, t)
    b = da / a
    tr = -rho + 3.0 * p
    box_phi = -d2phi - 3.0 * b * dphi
    kin = om * dphi**2 / (2.0 * phi**2)
    # metric equation, orthonormal tt and ii components (lhs - rhs)
    E_tt = 3.0 * (b * b + kappa / a**2) - V / (2.0 * phi) + 3.0 * b * dphi / phi - EIGHT_PI * rho / phi - kin
    E_ii = (-(2.0 * d2a / a + b * b + kappa / a**2) + V / (2.0 * phi)
            - (d2phi + 2.0 * b * dphi) / phi - EIGHT_PI * p / phi - kin)
    S = box_phi - (EIGHT_PI * tr + phi * dV - 2.0 * V) / (3.0 + 2.0 * om)
    # weighted form
    f1 = -dphi / phi
    f2 = -d2phi / phi + (dphi / phi) ** 2
    ef = 1.0 / phi
    lam = float(lambda_v_form(om, m.potential, phi))
    cw = m.c_omega
    ric_tt = -3.0 * d2a / a + f2
    ric_ii = d2a / a + 2.0 * (da**2 + kappa) / a**2 - b * f1
    R_tt = ric_tt - lam - (EIGHT_PI * ef * (rho + cw * tr) + (1.0 + om) * f1**2)
    R_ii = ric_ii + lam - EIGHT_PI * ef * (p - cw * tr)
    W, Wp = w_functionals(m.potential, -math.log(phi))
    R48 = (-f2 - 3.0 * b * f1 + f1**2) + 2.0 / (3.0 + 2.0 * om) * (3.0 * Wp + 3.0 * W + 0.5 * EIGHT_PI * ef * tr)
    # algebraic map between the two systems
    trE = -E_tt + 3.0 * E_ii
    pred_tt = E_tt + 0.5 * trE - S / (2.0 * phi)
    pred_ii = E_ii - 0.5 * trE + S / (2.0 * phi)
    pred_48 = -S / phi
    defect = max(abs(pred_tt - R_tt), abs(pred_ii - R_ii), abs(pred_48 - R48))
    comps = {"E_tt": E_tt, "E_ii": E_ii, "S": S, "R_tt": R_tt, "R_ii": R_ii, "R48": R48}
    return FieldResiduals(max(abs(E_tt), abs(E_ii)), abs(S), max(abs(R_tt), abs(R_ii)), abs(R48), comps, defect)


def identity_constant(m, t):
    """``C`` with ``r47 <= C (r42 + r43)`` implied by the algebraic map at ``t``."""
    phi = float(m.phi.value(t))
    return 3.0 + 1.0 / (2.0 * phi) + 1.0 / phi


# synthesis --------------------------------------------------------------------------


@dataclass(frozen=True)
class Synthesis:
    model: BDModel
    t0: float
    constraint_drift: float
    t_event: float | None


def _hubble_from_constraint(a, phi, dphi, rho, V, omega, kappa, branch=1.0):
    rest = V / (2.0 * phi) + EIGHT_PI * rho / phi + omega * dphi**2 / (2.0 * phi**2) - 3.0 * kappa / a**2
    x = dphi / phi
    disc = 9.0 * x * x + 12.0 * rest
    if disc < 0:
        raise PreconditionError("initial data violate the constraint (no real expansion rate)")
    return (-3.0 * x + branch * math.sqrt(disc)) / 6.0


def synthesize_flrw(omega, potential, *, rho0=3.0 / (8.0 * math.pi), eos=0.0, kappa=0, a0=1.0, phi0=1.0,
                    dphi0=0.0, t0=1.0, t_span=(0.0, 3.0), a_min=1e-2, branch=1.0, rtol=1e-12, atol=1e-14,
                    name="bd_flrw"):
    """Integrate the homogeneous Brans-Dicke system and wrap the solution as a model.

    The initial expansion rate is solved from the constraint; the state
    ``(a, a', phi, phi')`` is then evolved with DOP853 both ways from ``t0``.
    Backward integration stops when ``a`` falls to ``a_min * a0``. Second
    derivatives of the returned profiles come from the equations themselves.
    """
    if not omega > -1.5:
        raise ConfigurationError(f"omega must exceed -3/2, got {omega}")
    m_exp = -3.0 * (1.0 + eos)
    rho_at = lambda a: rho0 * a**m_exp  # noqa: E731
    b0 = _hubble_from_constraint(a0, phi0, dphi0, rho_at(a0), float(potential(phi0)), omega, kappa, branch)

    def accel(y):
        a, da, phi, dphi = y
        b = da / a
        rho = rho_at(a)
        p = eos * rho
        V, dV = float(potential(phi)), float(potential.d1(phi))
        d2phi = -3.0 * b * dphi - (EIGHT_PI * (-rho + 3.0 * p) + phi * dV - 2.0 * V) / (3.0 + 2.0 * omega)
        rhs = (V / (2.0 * phi) - (d2phi + 2.0 * b * dphi) / phi - EIGHT_PI * p / phi
               - omega * dphi**2 / (2.0 * phi**2) - b * b - kappa / a**2)
        return 0.5 * a * rhs, d2phi

    def rhs(t, y):
        d2a, d2phi = accel(y)
        return [y[1], d2a, y[3], d2phi]

    def small_a(t, y):
        return y[0] - a_min * a0

    small_a.terminal = True

    y0 = [a0, a0 * b0, phi0, dphi0]
    lo, hi = t_span
    sols = []
    t_event = None
    for end in (hi, lo):
        if end == t0:
            sols.append(None)
            continue
        sol = solve_ivp(rhs, (t0, end), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True,
                        events=small_a)
        if sol.status < 0:
            raise IntegrationError(f"Brans-Dicke synthesis failed: {sol.message}", (sol.t[-1], sol.y[:, -1]))
        if sol.t_events[0].size:
            t_event = float(sol.t_events[0][0])
        sols.append(sol)
    fwd, bwd = sols
    t_hi = float(fwd.t[-1]) if fwd is not None else t0
    t_lo = float(bwd.t[-1]) if bwd is not None else t0

    def state(t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t)
        out = np.empty((4, flat.size))
        if fwd is not None:
            sel = flat >= t0
            if np.any(sel):
                out[:, sel] = fwd.sol(flat[sel])
        if bwd is not None:
            sel = flat < t0
            if np.any(sel):
                out[:, sel] = bwd.sol(flat[sel])
        return out if t.ndim else out[:, 0]

    def second(t):
        y = state(t)
        if y.ndim == 1:
            return accel(y)
        acc = np.array([accel(y[:, j]) for j in range(y.shape[1])]).T
        return acc[0], acc[1]

    def comp(i):
        def fn(t):
            y = state(t)
            return y[i]
        return fn

    def d2(i):
        def fn(t):
            return second(t)[i]
        return fn

    dom = Interval.closed(t_lo, t_hi)
    a_prof = ScalarProfile("a_bd", comp(0), comp(1), d2(0), dom, analytic=False)
    phi_prof = ScalarProfile("phi_bd", comp(2), comp(3), d2(1), dom, analytic=False)
    geom = WarpedSpacetime(4, a_prof, SpaceForm(3, kappa), dom, name=name)
    fluid = barotropic(a_prof, rho0, eos)
    model = BDModel(float(omega), phi_prof, potential, fluid, geom, name)
    ts = np.linspace(t_lo, t_hi, 64)[1:-1]
    drift = max(abs(field_residuals(model, t).components["E_tt"]) for t in ts)
    if drift > CONSTRAINT_DRIFT_TOL:
        raise IntegrationError(f"constraint drift {drift:.3g} exceeds {CONSTRAINT_DRIFT_TOL:g}")
    return Synthesis(model, float(t0), float(drift), t_event)
