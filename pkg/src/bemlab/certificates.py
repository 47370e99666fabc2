"""Hypothesis checkers for the weighted singularity and splitting theorems.

Each checker evaluates the hypotheses of one theorem on a homogeneous model,
records a witness value per hypothesis and, when every hypothesis passes,
attaches the quantitative deadline ``t_bound`` from the matching Riccati
comparison. Strict inequalities need a margin of ``STRICT_MARGIN``; slices
that meet a threshold with equality are the business of
:func:`classify_rigidity`.

Theorem tags: ``T1.1``/``T1.2i``/``T1.2ii`` (future), ``T4.1``/``T4.2i``/
``T4.2ii`` (their past versions), ``T2.5`` (``T1.1`` without the Cauchy
property), ``T1.3``/``T1.5`` (splitting), ``C1.4`` (two-sided splitting).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import PreconditionError
from .focusing import lemma21_deadline, lemma22_deadline
from .profiles import DEFAULT_HORIZON, DEFAULT_SAMPLES, Interval

STRICT_MARGIN = 1e-10
EC_TOL = 1e-9
RIGIDITY_EPS = 0.5
RIGIDITY_SAMPLES = 64
RIGIDITY_TOL = 1e-10
DEFAULT_BETAS = np.linspace(0.0, 3.0, 13)

EVERY = "every timelike geodesic incomplete"
SOME = "some timelike geodesic incomplete"
SPLITS_PRODUCT = "splits (product)"
SPLITS_WARPED = "splits (warped e^{-2t})"
NO_CONCLUSION = "no conclusion"

THEOREM_TAGS = ("T1.1", "T1.2i", "T1.2ii", "T2.5", "T1.3", "T1.5", "C1.4",
                "T4.1", "T4.2i", "T4.2ii", "T4.6", "T4.7", "T4.8")


@dataclass(frozen=True)
class SurfaceData:
    """A spacelike slice ``t = t_S`` and the data the theorems read off it."""

    t_S: float
    H_f_inf: float
    H_f_sup: float
    N: float
    compact: bool = True
    cauchy: bool = True
    phi0: float | None = None
    phi1: float | None = None

    def __post_init__(self):
        if self.H_f_inf > self.H_f_sup:
            raise PreconditionError(f"H_f_inf={self.H_f_inf} exceeds H_f_sup={self.H_f_sup}")


def homogeneous_slice(M, w, t_S, *, compact=True, cauchy=True, phi0=None, phi1=None):
    hf = float(geometry.f_mean_curvature(M, w, t_S))
    return SurfaceData(float(t_S), hf, hf, float(w.f.value(t_S)), compact, cauchy, phi0, phi1)


@dataclass(frozen=True)
class Hypothesis:
    name: str
    passed: bool
    witness: float | str | None = None


@dataclass(frozen=True)
class Certificate:
    theorem: str
    direction: str
    hypotheses: tuple
    verdict: str
    conclusion: str
    delta: float | None = None
    t_bound: float | None = None
    model: str = ""
    t_S: float | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.theorem not in THEOREM_TAGS:
            raise ValueError(f"unknown theorem tag {self.theorem!r}")
        if self.verdict == "FIRES" and (self.t_bound is None or not all(h.passed for h in self.hypotheses)):
            raise ValueError("a firing certificate needs every hypothesis and a t_bound")

    @property
    def fires(self):
        return self.verdict == "FIRES"

    def hypothesis(self, name):
        for h in self.hypotheses:
            if h.name == name:
                return h
        raise KeyError(name)

    def to_record(self):
        rec = {
            "theorem": self.theorem,
            "direction": self.direction,
            "verdict": self.verdict,
            "hypotheses": [{"name": h.name, "pass": h.passed, "witness": _json_value(h.witness)}
                           for h in self.hypotheses],
            "delta": _json_value(self.delta),
            "t_bound": _json_value(self.t_bound),
            "conclusion": self.conclusion,
            "model": self.model,
            "t_S": _json_value(self.t_S),
        }
        if self.extras:
            rec["extras"] = {k: _json_value(v) for k, v in sorted(self.extras.items())}
        return rec

    def to_json(self):
        return json.dumps(self.to_record(), sort_keys=False, allow_nan=False)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


# energy condition --------------------------------------------------------------


def theorem_grid_min(M, w, c, tgrid=None, betagrid=None, tol=EC_TOL):
    """Minimum of ``Ric_f(X, X) - c`` over unit timelike ``X`` at the sampled times.

    ``Ric_f(X(beta), X(beta)) = A + sinh(beta)^2 B`` is affine in
    ``sinh(beta)^2``, so the infimum over all rapidities is ``A`` when
    ``B >= 0`` and ``-inf`` otherwise. ``betagrid`` (if given) is evaluated as
    well, which only matters for slightly negative ``B`` inside ``tol``.
    """
    if tgrid is None:
        tgrid = ec_grid(M, w)
    tgrid = np.asarray(tgrid, dtype=float)
    A, B = geometry.ric_f_coefficients(M, w, tgrid)
    A, B = np.atleast_1d(A), np.atleast_1d(B)
    scale = np.maximum(1.0, np.maximum(np.abs(A), np.abs(B)))
    if np.any(B < -tol * scale):
        return -math.inf
    margin = float(np.min(A)) - c
    if betagrid is not None:
        s2 = np.sinh(np.asarray(betagrid, dtype=float)) ** 2
        vals = A[:, None] + s2[None, :] * B[:, None]
        margin = min(margin, float(np.min(vals)) - c)
    return margin


def ec_grid(M, w, samples=DEFAULT_SAMPLES):
    return M.tdomain.intersect(w.f.domain).grid(samples)


def _ec_hypothesis(M, w, level, tol):
    c = 0.0 if level == 0 else -(M.n - 1.0)
    margin = theorem_grid_min(M, w, c, betagrid=DEFAULT_BETAS, tol=tol)
    name = "Ric_f >= 0" if level == 0 else f"Ric_f >= -{M.n - 1}"
    return Hypothesis(name, margin >= -tol, margin)


# weight bound ------------------------------------------------------------------


def causal_half(M, t_S, direction):
    """``J^+(S)`` or ``J^-(S)`` of a comoving slice, as a time interval."""
    dom = M.tdomain
    if direction == "future":
        return Interval(t_S, dom.hi, True, dom.hi_closed)
    return Interval(dom.lo, t_S, dom.lo_closed, True)


def weight_sup(w, interval, samples=DEFAULT_SAMPLES, horizon=DEFAULT_HORIZON):
    """``sup f`` over ``interval`` by dense sampling, ``inf`` if it keeps growing.

    Unbounded ends are probed at ``horizon`` and ``2*horizon``; a sup that
    increases between the two windows is reported as unbounded.
    """
    interval = interval.intersect(w.f.domain)
    near = float(np.max(w.f.value(interval.grid(samples, horizon))))
    if math.isinf(interval.lo) or math.isinf(interval.hi):
        far = float(np.max(w.f.value(interval.grid(2 * samples, 2.0 * horizon))))
        if far > near + 1e-9 * max(1.0, abs(near)):
            return math.inf
    return near


def extract_k(M, w, S, direction, k_mode="global"):
    if k_mode == "global":
        return w.sup_bound
    if k_mode == "local":
        k = weight_sup(w, causal_half(M, S.t_S, direction))
        return None if math.isinf(k) else k
    raise PreconditionError(f"k_mode must be 'global' or 'local', got {k_mode!r}")


def _k_hypothesis(k):
    return Hypothesis("f <= k", k is not None, k if k is not None else "none")


# theorem checkers --------------------------------------------------------------


def _require_compact(S):
    if not S.compact:
        raise PreconditionError("every theorem needs a compact slice; refusing")


def _signed(S, direction):
    """H_f in the direction of travel: ``-sup H_f`` (future) or ``inf H_f`` (past)."""
    return -S.H_f_sup if direction == "future" else S.H_f_inf


def _conclusion(fires, S):
    if not fires:
        return NO_CONCLUSION
    return EVERY if S.cauchy else SOME


def check_t11(M, w, S, direction="future", *, tol=EC_TOL, k_mode="global", margin=STRICT_MARGIN):
    """Hypotheses of the ``Ric_f >= 0``, ``f <= k``, ``H_f`` strict-sign theorem."""
    _require_compact(S)
    _check_direction(direction)
    n = M.n
    k = extract_k(M, w, S, direction, k_mode)
    signed = _signed(S, direction)
    sign_name = "H_f < 0" if direction == "future" else "H_f > 0"
    hyps = (
        _ec_hypothesis(M, w, 0, tol),
        _k_hypothesis(k),
        Hypothesis(sign_name, signed > margin, S.H_f_sup if direction == "future" else S.H_f_inf),
    )
    fires = all(h.passed for h in hyps)
    delta = signed / (n - 1) if signed > 0 else None
    t_bound = lemma21_deadline(delta, k, min(S.N, k), n).t_p if fires else None
    if S.cauchy:
        tag = "T1.1" if direction == "future" else "T4.1"
    else:
        tag = "T2.5"
    extras = {"k": k, "N": S.N, "k_mode": k_mode, "cauchy": S.cauchy}
    if abs(signed) <= margin:
        extras["borderline"] = "equality; see rigidity classifier"
    return Certificate(tag, direction, hyps, "FIRES" if fires else "FAILS", _conclusion(fires, S), delta,
                       t_bound, M.name, S.t_S, extras)


def check_t12(M, w, S, direction="future", case="ii", *, tol=EC_TOL, k_mode="global", margin=STRICT_MARGIN):
    """Hypotheses of the ``Ric_f >= -(n-1)`` theorem, case ``i`` (bounded f) or ``ii`` (causal grad f)."""
    _require_compact(S)
    _check_direction(direction)
    if case not in ("i", "ii"):
        raise PreconditionError(f"case must be 'i' or 'ii', got {case!r}")
    n = M.n
    signed = _signed(S, direction)
    hf_witness = S.H_f_sup if direction == "future" else S.H_f_inf
    hyps = [_ec_hypothesis(M, w, -1, tol)]
    extras = {"case": case, "N": S.N, "cauchy": S.cauchy}
    delta = None
    if case == "i":
        k = extract_k(M, w, S, direction, k_mode)
        hyps.append(_k_hypothesis(k))
        extras.update(k=k, k_mode=k_mode)
        if k is not None:
            factor = math.exp(2.0 * (k - S.N) / (n - 1))
            threshold = (n - 1) * factor
            rel = "<" if direction == "future" else ">"
            hyps.append(Hypothesis(f"H_f {rel} {'-' if direction == 'future' else ''}(n-1)e^(2(k-N)/(n-1))",
                                   signed - threshold > margin, hf_witness))
            extras["threshold"] = threshold
            delta = signed / (n - 1) / factor - 1.0
        else:
            hyps.append(Hypothesis("H_f threshold", False, hf_witness))
    else:
        hyps.append(Hypothesis(f"grad f {direction} causal", w.is_grad_causal(direction), w.grad_causal))
        rel = "H_f < -(n-1)" if direction == "future" else "H_f > (n-1)"
        hyps.append(Hypothesis(rel, signed - (n - 1) > margin, hf_witness))
        delta = signed / (n - 1) - 1.0
        if abs(signed - (n - 1)) <= margin:
            extras["borderline"] = "equality; see rigidity classifier"
    fires = all(h.passed for h in hyps)
    t_bound = lemma22_deadline(delta).t_p if fires else None
    if direction == "future":
        tag = "T1.2i" if case == "i" else "T1.2ii"
    else:
        tag = "T4.2i" if case == "i" else "T4.2ii"
    if not S.cauchy:
        extras["acausal_only"] = True
    return Certificate(tag, direction, tuple(hyps), "FIRES" if fires else "FAILS", _conclusion(fires, S),
                       delta if (delta is not None and delta > 0) else None, t_bound, M.name, S.t_S, extras)


def _check_direction(direction):
    if direction not in ("future", "past"):
        raise PreconditionError(f"direction must be 'future' or 'past', got {direction!r}")


# rigidity ----------------------------------------------------------------------


def rigidity_window(M, t_S, direction, eps=RIGIDITY_EPS, samples=RIGIDITY_SAMPLES):
    end = t_S + eps if direction == "future" else t_S - eps
    lo, hi = min(t_S, end), max(t_S, end)
    dom = M.tdomain
    ts = np.linspace(lo, hi, samples)
    ts = ts[dom.contains(ts)]
    if ts.size < 2:
        raise PreconditionError(f"rigidity window around t={t_S} leaves the domain {dom}")
    return ts


def _max_abs(v):
    return float(np.max(np.abs(v)))


def classify_rigidity(M, w, S, direction="future", *, complete=True, tol=RIGIDITY_TOL, eps=RIGIDITY_EPS,
                      samples=RIGIDITY_SAMPLES, ec_tol=EC_TOL):
    """Detect the equality cases of the splitting theorems on ``[t_S, t_S + eps]``.

    Product case: ``Ric_f >= 0``, ``f <= k`` and ``H_f = 0`` along the window,
    verified by ``K = 0`` and ``f' = 0``. Warped case: ``Ric_f >= -(n-1)``,
    causal ``grad f`` and ``H_f = -(n-1)``, verified by fitting
    ``a = a(t_S) exp(-(t - t_S))`` and ``f' = 0``. For past slices signs flip.
    ``complete`` is the caller's assertion of geodesic completeness and is
    recorded as such.
    """
    _require_compact(S)
    _check_direction(direction)
    n = M.n
    sgn = 1.0 if direction == "future" else -1.0
    ts = rigidity_window(M, S.t_S, direction, eps, samples)
    hf = geometry.f_mean_curvature(M, w, ts)
    fp = w.f.d1(ts)
    K = M.a.d1(ts) / M.a.value(ts)
    completeness = Hypothesis("completeness (asserted)", bool(complete), "asserted" if complete else "denied")
    extras = {"eps": eps, "samples": int(ts.size)}

    # product case
    ec0 = _ec_hypothesis(M, w, 0, ec_tol)
    kb = _k_hypothesis(w.sup_bound)
    hf0 = Hypothesis("H_f == 0 on window", _max_abs(hf) <= tol, _max_abs(hf))
    prod = (completeness, ec0, kb, hf0,
            Hypothesis("K == 0", _max_abs(K) <= tol, _max_abs(K)),
            Hypothesis("df/dt == 0", _max_abs(fp) <= tol, _max_abs(fp)))
    if all(h.passed for h in prod):
        return Certificate("T1.3", direction, prod, "RIGID", SPLITS_PRODUCT, None, None, M.name, S.t_S, extras)

    # warped case
    ec1 = _ec_hypothesis(M, w, -1, ec_tol)
    causal = Hypothesis(f"grad f {direction} causal", w.is_grad_causal(direction), w.grad_causal)
    hfw = hf + sgn * (n - 1)
    a0 = float(M.a.value(S.t_S))
    fit = M.a.value(ts) / (a0 * np.exp(-sgn * (ts - S.t_S))) - 1.0
    warped = (completeness, ec1, causal,
              Hypothesis(f"H_f == {'-' if sgn > 0 else ''}(n-1) on window", _max_abs(hfw) <= tol, _max_abs(hfw)),
              Hypothesis("a exponential fit", _max_abs(fit) <= tol, _max_abs(fit)),
              Hypothesis("df/dt == 0", _max_abs(fp) <= tol, _max_abs(fp)))
    if all(h.passed for h in warped):
        return Certificate("T1.5", direction, warped, "RIGID", SPLITS_WARPED, None, None, M.name, S.t_S, extras)

    # neither: report the closer family
    chosen, tag = (prod, "T1.3") if ec0.passed and _max_abs(hf) <= _max_abs(hfw) else (warped, "T1.5")
    extras["H_f_variation"] = float(np.ptp(hf))
    return Certificate(tag, direction, chosen, "FAILS", NO_CONCLUSION, None, None, M.name, S.t_S, extras)


def classify_c14(M, w, S, *, complete=True, tol=RIGIDITY_TOL, eps=RIGIDITY_EPS, samples=RIGIDITY_SAMPLES):
    """Two-sided splitting: ``|f| <= k`` and a constant-``H_f`` Cauchy slice."""
    _require_compact(S)
    k = w.sup_bound
    if k is not None:
        lo = -weight_sup(geometry.WeightProfile(-w.f), w.f.domain)
        bounded = math.isfinite(lo) and abs(lo) <= k + 1e-12
    else:
        bounded = False
    fut = classify_rigidity(M, w, S, "future", complete=complete, tol=tol, eps=eps, samples=samples)
    past = classify_rigidity(M, w, S, "past", complete=complete, tol=tol, eps=eps, samples=samples)
    hyps = (
        Hypothesis("|f| <= k", bounded, k if k is not None else "none"),
        Hypothesis("H_f(S) constant", abs(S.H_f_sup - S.H_f_inf) <= tol, S.H_f_sup - S.H_f_inf),
        Hypothesis("future half splits (product)", fut.verdict == "RIGID" and fut.theorem == "T1.3", fut.verdict),
        Hypothesis("past half splits (product)", past.verdict == "RIGID" and past.theorem == "T1.3", past.verdict),
    )
    rigid = all(h.passed for h in hyps)
    return Certificate("C1.4", "future", hyps, "RIGID" if rigid else "FAILS",
                       SPLITS_PRODUCT if rigid else NO_CONCLUSION, None, None, M.name, S.t_S,
                       {"complete": complete})


def all_checks(M, w, S, directions=("future", "past"), k_mode="global"):
    """Every singularity checker on one slice, in a fixed order."""
    out = []
    for d in directions:
        out.append(check_t11(M, w, S, d, k_mode=k_mode))
        out.append(check_t12(M, w, S, d, "i", k_mode=k_mode))
        out.append(check_t12(M, w, S, d, "ii"))
    return out
