"""Dormand-Prince 5(4) stepping with a reciprocal switch for Riccati blow-up.

Riccati equations ``z' = q(t) - z^2`` reach ``-inf`` in finite time. Far from
the pole we integrate ``z``; once ``|z|`` is large we integrate ``u = 1/z``,
which obeys ``u' = 1 - q(t) u^2`` and crosses zero smoothly at the pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError

C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
E = tuple(b5 - b4 for b5, b4 in zip(B5, B4))

SWITCH_TO_RECIPROCAL = 10.0
SWITCH_BACK = 1.0


def dp54_step(fun, t, y, h):
    """One Dormand-Prince step; returns ``(y5, err)`` where ``err = y5 - y4``."""
    k = []
    for i in range(7):
        yi = y
        for j, aij in enumerate(A[i]):
            if aij:
                yi = yi + h * aij * k[j]
        k.append(fun(t + C[i] * h, yi))
    y5 = y + h * sum(b * kk for b, kk in zip(B5, k) if b)
    err = h * sum(e * kk for e, kk in zip(E, k) if e)
    return y5, err


@dataclass
class RiccatiResult:
    t: np.ndarray
    z: np.ndarray
    t_blow: float | None
    detected: bool
    steps: int


def integrate_riccati(q, t0, z0, t_end, *, domain=None, observable=None, threshold=1e8, rtol=1e-10,
                      atol=1e-20, h_floor=1e-12, h0=None, fixed_step=None, bisect_tol=1e-13,
                      max_steps=200_000):
    """Integrate ``z' = q(t) - z^2`` from ``t0`` towards ``t_end`` (either direction).

    ``observable(t, z)`` maps the state to the monitored quantity (defaults to
    ``z``); blow-up is declared when its magnitude exceeds ``threshold`` and
    the crossing time is located by bisection on the last step. Integration
    also stops at the edge of ``domain`` (an :class:`~bemlab.profiles.Interval`),
    reported with ``detected=False``.
    """
    obs = observable or (lambda t, z: z)
    sgn = 1.0 if t_end >= t0 else -1.0
    span = abs(t_end - t0)

    def f_z(t, z):
        return q(t) - z * z

    def f_u(t, u):
        return 1.0 - q(t) * u * u

    def phys(t, y, mode):
        z = y if mode == "z" else (1.0 / y if y != 0.0 else math.copysign(math.inf, y))
        return z

    def inside(t):
        return domain is None or bool(domain.contains(t))

    ts, zs = [t0], [z0]
    t, mode = t0, "z"
    y = z0
    if abs(z0) > SWITCH_TO_RECIPROCAL:
        mode, y = "u", 1.0 / z0
    if fixed_step is not None:
        h = sgn * abs(fixed_step)
    else:
        h = sgn * (h0 if h0 is not None else min(1e-3, 0.01 * span if span > 0 else 1e-3))
    steps = 0
    while sgn * (t_end - t) > 0:
        if steps >= max_steps:
            raise IntegrationError(f"step budget exhausted at t={t}", (t, phys(t, y, mode)))
        if sgn * (t + h - t_end) > 0:
            h = t_end - t
        edge = None
        while not inside(t + h):
            h *= 0.5
            if abs(h) < h_floor:
                edge = domain.lo if sgn < 0 else domain.hi
                break
        if edge is not None:
            return RiccatiResult(np.array(ts), np.array(zs), float(edge), False, steps)
        fun = f_z if mode == "z" else f_u
        y_new, err = dp54_step(fun, t, y, h)
        steps += 1
        if fixed_step is None:
            scale = atol + rtol * max(abs(y), abs(y_new))
            enorm = abs(err) / scale if err != 0.0 else 0.0
        else:
            enorm = 0.0
        if not math.isfinite(y_new) or not math.isfinite(enorm):
            if fixed_step is not None:
                raise IntegrationError(f"non-finite state at t={t + h}", (t, phys(t, y, mode)))
            h *= 0.25
            if abs(h) < h_floor:
                raise IntegrationError(f"non-finite right-hand side near t={t}", (t, phys(t, y, mode)))
            continue
        if enorm > 1.0:
            h *= max(0.2, 0.9 * enorm ** -0.2)
            if abs(h) < h_floor:
                raise IntegrationError(f"step size below floor {h_floor} at t={t}", (t, phys(t, y, mode)))
            continue

        crossed = _beyond(obs, t + h, y_new, mode, y, threshold)
        if crossed:
            t_blow = _bisect_crossing(fun, obs, t, y, h, mode, threshold, bisect_tol)
            return RiccatiResult(np.array(ts), np.array(zs), t_blow, True, steps)

        t, y = t + h, y_new
        ts.append(t)
        zs.append(phys(t, y, mode))
        if mode == "z" and abs(y) > SWITCH_TO_RECIPROCAL:
            mode, y = "u", 1.0 / y
        elif mode == "u" and abs(y) > SWITCH_BACK:
            mode, y = "z", 1.0 / y
        if fixed_step is None:
            fac = 5.0 if enorm == 0.0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
            h *= fac
    return RiccatiResult(np.array(ts), np.array(zs), None, False, steps)


def _beyond(obs, t, y, mode, y_start, threshold):
    if mode == "u" and (y == 0.0 or math.copysign(1.0, y) != math.copysign(1.0, y_start)):
        return True
    z = y if mode == "z" else 1.0 / y
    return abs(obs(t, z)) > threshold


def _bisect_crossing(fun, obs, t, y, h, mode, threshold, tol):
    lo, hi = 0.0, 1.0
    while (hi - lo) * abs(h) > tol:
        mid = 0.5 * (lo + hi)
        y_mid, _ = dp54_step(fun, t, y, mid * h)
        if math.isfinite(y_mid) and not _beyond(obs, t + mid * h, y_mid, mode, y, threshold):
            lo = mid
        else:
            hi = mid
    return t + 0.5 * (lo + hi) * h
