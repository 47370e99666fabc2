"""Raychaudhuri dynamics of comoving congruences and Riccati comparison deadlines.

For the comoving congruence of a warped product the expansion obeys
``H' = -Ric(nu, nu) - H^2/(n-1)`` exactly (no shear), i.e. ``z' = a''/a - z^2``
with ``z = H/(n-1)``. The weighted quantity tracked by the comparison lemmas
is ``x = H_f/(n-1) = z - f'/(n-1)``.

Past-directed congruences are handled by time reversal: along a curve running
backward from ``t0`` the elapsed proper time is ``s = t0 - t`` and the
expansion measured along the past-pointing tangent is ``-x``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import PreconditionError
from .integrate import integrate_riccati
from .kernels import riccati_model

BLOWUP_THRESHOLD = 1e8
DEFAULT_RTOL = 1e-10
COMPARISON_TOL = 1e-8
CSV_COLUMNS = ("t", "H", "H_f", "x", "f", "fprime")


@dataclass(frozen=True)
class Blowup:
    t_blow: float
    detected: bool


@dataclass(frozen=True)
class CongruenceTrajectory:
    """Samples of the comoving congruence, stored with ``t`` increasing."""

    t: np.ndarray
    H: np.ndarray
    H_f: np.ndarray
    x: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    n: int
    t_start: float
    direction: str = "future"
    blowup: Blowup | None = None
    steps: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.direction not in ("future", "past"):
            raise ValueError(f"direction must be 'future' or 'past', got {self.direction!r}")
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return int(self.t.size)

    def elapsed(self):
        """Proper time travelled from the start along the congruence direction."""
        return self.t - self.t_start if self.direction == "future" else self.t_start - self.t

    def directed_x(self):
        """``x`` measured along the direction of travel (``-x`` for past curves)."""
        return self.x if self.direction == "future" else -self.x

    def rows(self):
        return np.column_stack([self.t, self.H, self.H_f, self.x, self.f, self.fprime])

    def to_csv(self, target=None):
        """Write ``t,H,H_f,x,f,fprime`` rows; returns the text when ``target`` is None."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow([f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if target is None:
            return text
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return text


def integrate_raychaudhuri(M, w, t0, tmax, H0=None, *, rtol=DEFAULT_RTOL, threshold=BLOWUP_THRESHOLD,
                           fixed_step=None, max_steps=200_000):
    """Integrate the comoving expansion from ``t0`` towards ``tmax``.

    ``tmax < t0`` gives the past-directed congruence. Integration stops at
    the first of: ``tmax``, the edge of the model's time domain (recorded as an
    undetected blow-up at the edge) or ``|x| > threshold`` (detected blow-up,
    located by bisection).
    """
    M.require(t0)
    if t0 == tmax:
        raise PreconditionError("t0 and tmax coincide")
    n = M.n
    a = M.a
    domain = M.tdomain.intersect(w.f.domain)
    if H0 is None:
        H0 = geometry.mean_curvature(M, t0)

    def q(t):
        return a.d2(t) / a.value(t)

    def observable(t, z):
        return z - w.f.d1(t) / (n - 1)

    res = integrate_riccati(q, float(t0), float(H0) / (n - 1), float(tmax), domain=domain,
                            observable=observable, threshold=threshold, rtol=rtol,
                            fixed_step=fixed_step, max_steps=max_steps)
    t, z = res.t, res.z
    direction = "future" if tmax > t0 else "past"
    if direction == "past":
        t, z = t[::-1], z[::-1]
    H = (n - 1) * z
    fp = w.f.d1(t)
    Hf = H - fp
    blow = None if res.t_blow is None else Blowup(float(res.t_blow), bool(res.detected))
    return CongruenceTrajectory(t, H, Hf, Hf / (n - 1), w.f.value(t), fp, n, float(t0), direction, blow, res.steps)


# comparison bounds -------------------------------------------------------------


@dataclass(frozen=True)
class FocusingBound:
    """Blow-up deadline ``t_p`` and the bound curve for elapsed time ``s``.

    ``kind`` is ``"L21"`` (weighted Ricci bounded below by zero) or ``"L22"``
    (bounded below by ``-(n-1)``). ``bound`` is the unweighted curve;
    ``x_bound`` multiplies it by ``exp(2(k - f)/(n-1))`` when ``k`` and ``n``
    are known, which is the sharper statement for the normalized ``x``.
    """

    kind: str
    t_p: float
    inputs: dict

    def bound(self, s):
        s = np.asarray(s, dtype=float)
        gap = self.t_p - s
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -1.0 / gap if self.kind == "L21" else -1.0 / np.tanh(gap)
        out = np.where(gap > 0, out, -np.inf)
        return float(out) if out.ndim == 0 else out

    def x_bound(self, s, f):
        k, n = self.inputs.get("k"), self.inputs.get("n")
        if k is None or n is None:
            return self.bound(s)
        return np.exp(2.0 * (k - np.asarray(f, dtype=float)) / (n - 1)) * self.bound(s)

    def __call__(self, s):
        return self.bound(s)


def lemma21_deadline(delta, k, f0, n):
    """``t_p = exp(2(k - f0)/(n-1)) / delta`` for ``Ric_f >= 0`` and ``x(0) <= -delta``."""
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    if f0 > k:
        raise PreconditionError(f"f0={f0} exceeds the weight bound k={k}")
    if n < 2:
        raise PreconditionError(f"dimension must be >= 2, got {n}")
    t_p = math.exp(2.0 * (k - f0) / (n - 1)) / delta
    return FocusingBound("L21", t_p, {"delta": float(delta), "k": float(k), "f0": float(f0), "n": int(n)})


def lemma22_deadline(delta, k=None, n=None):
    """``t_p = arctanh(1/(1+delta))`` for ``Ric_f >= -(n-1)``.

    ``k`` and ``n`` are optional; with them :meth:`FocusingBound.x_bound`
    gives the weighted curve ``-exp(2(k - f)/(n-1)) coth(t_p - s)``.
    """
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    inputs = {"delta": float(delta)}
    if k is not None and n is not None:
        inputs.update(k=float(k), n=int(n))
    return FocusingBound("L22", math.atanh(1.0 / (1.0 + delta)), inputs)


def lemma21_from_trajectory(traj, k):
    """L21 bound using the trajectory's initial data: ``delta = -x(0)``, ``f0 = f(t0)``."""
    i0 = _start_index(traj)
    return lemma21_deadline(-float(traj.directed_x()[i0]), k, float(traj.f[i0]), traj.n)


def lemma22_from_trajectory(traj, k):
    """L22 bound with ``delta = -x(0) exp(-2(k - f0)/(n-1)) - 1``."""
    i0 = _start_index(traj)
    f0 = float(traj.f[i0])
    if f0 > k:
        raise PreconditionError(f"f0={f0} exceeds the weight bound k={k}")
    y0 = float(traj.directed_x()[i0]) * math.exp(-2.0 * (k - f0) / (traj.n - 1))
    return lemma22_deadline(-y0 - 1.0, k, traj.n)


def _start_index(traj):
    return 0 if traj.direction == "future" else len(traj) - 1


def check_comparison(traj, b, tol=COMPARISON_TOL, weighted=False):
    """Largest violation of ``x(s) <= bound(s)`` along the trajectory.

    Violations are scaled by ``max(1, |bound|)``; a trajectory that survives
    past the deadline without blowing up counts as an infinite violation.
    ``tol`` only feeds :func:`comparison_holds`; it does not alter the value.
    """
    s = traj.elapsed()
    inside = s < b.t_p
    if not np.any(inside):
        raise PreconditionError(f"trajectory does not overlap [0, t_p={b.t_p:g})")
    xs = traj.directed_x()[inside]
    bound = b.x_bound(s[inside], traj.f[inside]) if weighted else b.bound(s[inside])
    viol = float(np.max((xs - bound) / np.maximum(1.0, np.abs(bound))))
    if np.any(~inside):
        return math.inf
    if traj.blowup is not None and traj.blowup.detected:
        s_blow = traj.blowup.t_blow - traj.t_start if traj.direction == "future" else traj.t_start - traj.blowup.t_blow
        if s_blow > b.t_p + tol:
            return math.inf
    return viol


def comparison_holds(violation, tol=COMPARISON_TOL):
    return violation <= tol


# constant-coefficient model ---------------------------------------------------


def model_blowup(q, x0, t_end=math.inf, *, rtol=DEFAULT_RTOL, threshold=BLOWUP_THRESHOLD, fixed_step=0.0):
    """Blow-up time of ``x' = q - x^2``, ``x(0) = x0`` via the compiled kernel.

    Returns ``(t_blow, detected)``; with ``t_end = inf`` the horizon is taken
    from the closed form so that the integration is always finite.
    """
    if math.isinf(t_end):
        blows = q < 0 or x0 < -math.sqrt(q)
        t_end = 10.0 * (_model_closed_form(q, x0) if blows else 1.0) + 1.0
    t_blow, detected, _ = riccati_model(float(q), float(x0), float(t_end), float(rtol), float(threshold),
                                        float(fixed_step))
    return float(t_blow), bool(detected)


def _model_closed_form(q, x0):
    if q == 0:
        return -1.0 / x0
    if q > 0:
        r = math.sqrt(q)
        return math.atanh(r / -x0) / r
    r = math.sqrt(-q)
    return (math.pi / 2 - math.atan(-x0 / r)) / r
