"""Hot numeric kernels with compiled and pure-numpy variants.

``riccati_model`` integrates the constant-coefficient Riccati model
``x' = q - x^2`` (the comparison equations of the focusing lemmas) and
``graph_hf`` evaluates the f-mean curvature of a graph ``t = u(x)`` over a
periodic grid. When numba is enabled the ``*_loops`` functions are compiled;
otherwise :func:`graph_hf` uses the vectorised numpy stencils.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import NUMBA_ENABLED, njit

# Riccati model ----------------------------------------------------------------


@njit
def riccati_model(q, x0, t_end, rtol, threshold, fixed_step):
    """Return ``(t_blow, detected, steps)`` for ``x' = q - x^2``, ``x(0) = x0``.

    Uses the Dormand-Prince pair on ``x`` and on ``u = 1/x`` once ``|x| > 10``;
    the threshold crossing ``|x| = threshold`` is bisected to ~1e-13.
    """
    t = 0.0
    mode = 0  # 0: x, 1: u = 1/x
    y = x0
    if abs(x0) > 10.0:
        mode = 1
        y = 1.0 / x0
    h = fixed_step if fixed_step > 0.0 else 1e-3
    steps = 0
    while t < t_end:
        if t + h > t_end:
            h = t_end - t
        y5, err = _dp54_model(q, y, h, mode)
        steps += 1
        if fixed_step > 0.0:
            enorm = 0.0
        else:
            scale = 1e-20 + rtol * max(abs(y), abs(y5))
            enorm = abs(err) / scale
        if not (math.isfinite(y5) and math.isfinite(enorm)):
            h *= 0.25
            if h < 1e-14:
                return t, False, steps
            continue
        if enorm > 1.0:
            h *= max(0.2, 0.9 * enorm ** -0.2)
            continue
        if _model_beyond(y5, y, mode, threshold):
            lo = 0.0
            hi = 1.0
            while (hi - lo) * h > 1e-13:
                mid = 0.5 * (lo + hi)
                ym, _ = _dp54_model(q, y, mid * h, mode)
                if math.isfinite(ym) and not _model_beyond(ym, y, mode, threshold):
                    lo = mid
                else:
                    hi = mid
            return t + 0.5 * (lo + hi) * h, True, steps
        t += h
        y = y5
        if mode == 0 and abs(y) > 10.0:
            mode = 1
            y = 1.0 / y
        elif mode == 1 and abs(y) > 1.0:
            mode = 0
            y = 1.0 / y
        if fixed_step <= 0.0:
            if enorm == 0.0:
                h *= 5.0
            else:
                h *= min(5.0, max(0.2, 0.9 * enorm ** -0.2))
    return t, False, steps


@njit
def _model_rhs(q, y, mode):
    if mode == 0:
        return q - y * y
    return 1.0 - q * y * y


@njit
def _model_beyond(y, y_start, mode, threshold):
    if mode == 1:
        if y == 0.0 or (y > 0.0) != (y_start > 0.0):
            return True
        return abs(1.0 / y) > threshold
    return abs(y) > threshold


@njit
def _dp54_model(q, y, h, mode):
    k1 = _model_rhs(q, y, mode)
    k2 = _model_rhs(q, y + h * (k1 / 5.0), mode)
    k3 = _model_rhs(q, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2), mode)
    k4 = _model_rhs(q, y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3), mode)
    k5 = _model_rhs(q, y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3
                                - 212.0 / 729.0 * k4), mode)
    k6 = _model_rhs(q, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
                                + 49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5), mode)
    y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5
                  + 11.0 / 84.0 * k6)
    k7 = _model_rhs(q, y5, mode)
    err = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1 + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3
               + (125.0 / 192.0 - 393.0 / 640.0) * k4 + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5
               + (11.0 / 84.0 - 187.0 / 2100.0) * k6 - 1.0 / 40.0 * k7)
    return y5, err


# graph f-mean curvature --------------------------------------------------------


def graph_hf_numpy(u, a, ap, fp, dx):
    """Vectorised stencils. Returns ``(H_f, W, D)`` with ``D = a^2 - |Du|^2``."""
    if u.ndim == 1:
        up, um = np.roll(u, -1), np.roll(u, 1)
        ux = (up - um) / (2.0 * dx)
        uxx = (up - 2.0 * u + um) / (dx * dx)
        p2 = ux * ux
        D = a * a - p2
        lap_term = uxx / D
        d = 1
    else:
        ue, uw = np.roll(u, -1, axis=0), np.roll(u, 1, axis=0)
        un, us = np.roll(u, -1, axis=1), np.roll(u, 1, axis=1)
        ux = (ue - uw) / (2.0 * dx)
        uy = (un - us) / (2.0 * dx)
        uxx = (ue - 2.0 * u + uw) / (dx * dx)
        uyy = (un - 2.0 * u + us) / (dx * dx)
        uxy = (np.roll(ue, -1, axis=1) - np.roll(ue, 1, axis=1)
               - np.roll(uw, -1, axis=1) + np.roll(uw, 1, axis=1)) / (4.0 * dx * dx)
        p2 = ux * ux + uy * uy
        D = a * a - p2
        quad = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy
        lap_term = (uxx + uyy + quad / D) / (a * a)
        d = 2
    with np.errstate(invalid="ignore"):
        W = np.sqrt(D) / a
    H = (lap_term + (ap / a) * (d - p2 / D)) / W
    return H - fp / W, W, D


@njit
def _graph_hf_1d_loops(u, a, ap, fp, dx):
    n = u.shape[0]
    hf = np.empty(n)
    W = np.empty(n)
    D = np.empty(n)
    for i in range(n):
        up = u[(i + 1) % n]
        um = u[(i - 1) % n]
        ux = (up - um) / (2.0 * dx)
        uxx = (up - 2.0 * u[i] + um) / (dx * dx)
        p2 = ux * ux
        Di = a[i] * a[i] - p2
        D[i] = Di
        if Di <= 0.0:
            W[i] = np.nan
            hf[i] = np.nan
            continue
        Wi = math.sqrt(Di) / a[i]
        W[i] = Wi
        H = (uxx / Di + (ap[i] / a[i]) * (1.0 - p2 / Di)) / Wi
        hf[i] = H - fp[i] / Wi
    return hf, W, D


@njit
def _graph_hf_2d_loops(u, a, ap, fp, dx):
    n, m = u.shape
    hf = np.empty((n, m))
    W = np.empty((n, m))
    D = np.empty((n, m))
    for i in range(n):
        ie = (i + 1) % n
        iw = (i - 1) % n
        for j in range(m):
            jn = (j + 1) % m
            js = (j - 1) % m
            ux = (u[ie, j] - u[iw, j]) / (2.0 * dx)
            uy = (u[i, jn] - u[i, js]) / (2.0 * dx)
            uxx = (u[ie, j] - 2.0 * u[i, j] + u[iw, j]) / (dx * dx)
            uyy = (u[i, jn] - 2.0 * u[i, j] + u[i, js]) / (dx * dx)
            uxy = (u[ie, jn] - u[ie, js] - u[iw, jn] + u[iw, js]) / (4.0 * dx * dx)
            p2 = ux * ux + uy * uy
            Dij = a[i, j] * a[i, j] - p2
            D[i, j] = Dij
            if Dij <= 0.0:
                W[i, j] = np.nan
                hf[i, j] = np.nan
                continue
            Wij = math.sqrt(Dij) / a[i, j]
            W[i, j] = Wij
            quad = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy
            lap_term = (uxx + uyy + quad / Dij) / (a[i, j] * a[i, j])
            H = (lap_term + (ap[i, j] / a[i, j]) * (2.0 - p2 / Dij)) / Wij
            hf[i, j] = H - fp[i, j] / Wij
    return hf, W, D


def graph_hf_loops(u, a, ap, fp, dx):
    """Explicit per-node loops (compiled when numba is enabled)."""
    if u.ndim == 1:
        return _graph_hf_1d_loops(u, a, ap, fp, dx)
    return _graph_hf_2d_loops(u, a, ap, fp, dx)


def graph_hf(u, a, ap, fp, dx):
    """Dispatch to the compiled loops when numba is on, else to numpy stencils."""
    u = np.ascontiguousarray(u, dtype=float)
    a, ap, fp = (np.ascontiguousarray(np.broadcast_to(v, u.shape), dtype=float) for v in (a, ap, fp))
    if NUMBA_ENABLED:
        return graph_hf_loops(u, a, ap, fp, float(dx))
    return graph_hf_numpy(u, a, ap, fp, float(dx))
