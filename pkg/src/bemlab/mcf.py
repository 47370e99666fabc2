"""(c, f)-mean-curvature flow of spacelike graphs ``t = u(x)`` over a flat torus.

The graph moves along its future unit normal with speed ``phi = H_f - c``;
in graph form this is ``u_s = phi * W`` with ``W = sqrt(a(u)^2 - |Du|^2)/a(u)``
(``1/W`` is the time component of the normal). Steps are classical RK4 under
the parabolic restriction ``ds <= cfl * dx^2 * min(a^2 - |Du|^2)``.

Quantities per node, with ``p = Du`` and ``D = a^2 - |p|^2``:

* induced metric ``gamma_ij = a^2 delta_ij - p_i p_j``,
  inverse ``a^-2 (delta + p p^T / D)``;
* second fundamental form ``K_ij = (u_ij + a a' delta_ij - 2 (a'/a) p_i p_j) / W``;
* boost of the normal relative to the comoving frame: ``sinh^2 = |p|^2 / D``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import CausalityError, ConfigurationError, PreconditionError, SignPropagationError
from .kernels import graph_hf

CFL = 0.2
STEADY_TOL = 1e-12
ZERO_TOL = 1e-12
NEGATIVE_SCALE = 1e-14


@dataclass(frozen=True)
class GraphHypersurface:
    """Periodic graph ``t = u(x)`` on ``[0, length)^d`` with ``n_pts`` nodes per axis."""

    M: geometry.WarpedSpacetime = field(repr=False)
    u: np.ndarray
    length: float = 2.0 * math.pi

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if u.ndim not in (1, 2):
            raise ConfigurationError(f"base dimension must be 1 or 2, got {u.ndim}")
        if u.ndim == 2 and u.shape[0] != u.shape[1]:
            raise ConfigurationError("2-d bases need the same number of nodes per axis")
        if self.M.n != u.ndim + 1:
            raise ConfigurationError(f"graph over a {u.ndim}-d base needs n={u.ndim + 1}, model has n={self.M.n}")
        if u.shape[0] < 3 or not self.length > 0:
            raise ConfigurationError(f"degenerate grid: {u.shape[0]} nodes over length {self.length}")
        if not np.all(np.isfinite(u)):
            raise ConfigurationError("graph values must be finite")
        bad = ~self.M.tdomain.contains(u)
        if np.any(bad):
            node = tuple(int(i) for i in np.argwhere(bad)[0])
            raise CausalityError(f"u={u[node]:g} at node {node} lies outside {self.M.tdomain}", node)

    @property
    def d(self):
        return self.u.ndim

    @property
    def n_pts(self):
        return self.u.shape[0]

    @property
    def dx(self):
        return self.length / self.n_pts

    def coords(self):
        x = np.arange(self.n_pts) * self.dx
        if self.d == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def with_u(self, u):
        return GraphHypersurface(self.M, u, self.length)

    @classmethod
    def from_function(cls, M, fn, n_pts, length=2.0 * math.pi):
        """Sample ``fn`` (of one coordinate array per base axis) on the grid."""
        d = M.n - 1
        x = np.arange(n_pts) * (length / n_pts)
        grids = (x,) if d == 1 else tuple(np.meshgrid(x, x, indexing="ij"))
        return cls(M, np.asarray(fn(*grids), dtype=float) * np.ones(grids[0].shape), length)


@dataclass(frozen=True)
class FlowState:
    surface: GraphHypersurface
    s: float
    phi: np.ndarray
    min_phi: float
    max_phi: float
    max_speed: float


class FlowHistory(list):
    """Recorded :class:`FlowState` snapshots plus the reason the run stopped."""

    reason = "s_max"
    c = 0.0


def _derivs(u, dx):
    """Central-difference ``p_i`` and ``u_ij`` on the periodic grid."""
    if u.ndim == 1:
        up, um = np.roll(u, -1), np.roll(u, 1)
        p = ((up - um) / (2 * dx),)
        hess = (((up - 2 * u + um) / dx**2,),)
        return p, hess
    ue, uw = np.roll(u, -1, 0), np.roll(u, 1, 0)
    un, us = np.roll(u, -1, 1), np.roll(u, 1, 1)
    uxy = (np.roll(ue, -1, 1) - np.roll(ue, 1, 1) - np.roll(uw, -1, 1) + np.roll(uw, 1, 1)) / (4 * dx**2)
    p = ((ue - uw) / (2 * dx), (un - us) / (2 * dx))
    hess = (((ue - 2 * u + uw) / dx**2, uxy), (uxy, (un - 2 * u + us) / dx**2))
    return p, hess


def _grad(phi, dx):
    if phi.ndim == 1:
        return ((np.roll(phi, -1) - np.roll(phi, 1)) / (2 * dx),)
    return tuple((np.roll(phi, -1, ax) - np.roll(phi, 1, ax)) / (2 * dx) for ax in range(phi.ndim))


def _node(mask):
    return tuple(int(i) for i in np.argwhere(mask)[0])


def graph_Hf(M, w, surf):
    """Per-node f-mean curvature of the graph; raises :class:`CausalityError` where not spacelike."""
    u = surf.u
    a, ap, fp = M.a.value(u), M.a.d1(u), w.f.d1(u)
    hf, W, D = graph_hf(u, a, ap, fp, surf.dx)
    bad = ~(D > 0)
    if np.any(bad):
        node = _node(bad)
        raise CausalityError(f"graph is not spacelike at node {node}: a^2 - |Du|^2 = {D[node]:.3g}", node)
    return hf


def _speed_parts(M, w, surf, c):
    u = surf.u
    hf, W, D = graph_hf(u, M.a.value(u), M.a.d1(u), w.f.d1(u), surf.dx)
    if not np.all(D > 0):
        node = _node(~(D > 0))
        raise CausalityError(f"graph is not spacelike at node {node}", node)
    phi = hf - c
    return phi, phi * W, D


def cfl_step(surf, D, cfl=CFL):
    return cfl * surf.dx**2 * float(np.min(D))


def flow_run(M, w, surf0, c, s_max, dt_ctrl=None, *, cfl=CFL, record_every=1, max_steps=1_000_000,
             steady_tol=STEADY_TOL):
    """Run the (c, f)-flow from ``surf0`` until ``s_max``, steady state or a causal violation.

    ``dt_ctrl`` caps the step; the effective step is the smaller of it and the
    parabolic bound, and is kept fixed unless the bound shrinks below it.
    """
    if not (cfl > 0 and surf0.dx > 0 and surf0.n_pts >= 3):
        raise ConfigurationError("degenerate grid or CFL factor")
    if dt_ctrl is not None and not dt_ctrl > 0:
        raise ConfigurationError(f"dt_ctrl must be positive, got {dt_ctrl}")
    phi, speed, D = _speed_parts(M, w, surf0, c)
    if not np.all(np.isfinite(phi)):
        raise PreconditionError("initial speed is not finite")
    ds = cfl_step(surf0, D, cfl)
    if dt_ctrl is not None:
        ds = min(ds, dt_ctrl)
    if not ds > 0:
        raise ConfigurationError("CFL bound is zero: grid too fine or graph null")

    hist = FlowHistory()
    hist.c = c
    surf, s = surf0, 0.0
    hist.append(_state(surf, s, phi, speed))
    steps = 0
    while s < s_max - 1e-15 * max(1.0, s_max) and steps < max_steps:
        h = min(ds, s_max - s)
        try:
            u_new = _rk4(M, w, surf, c, h)
            surf_new = surf.with_u(u_new)
            phi_new, speed_new, D_new = _speed_parts(M, w, surf_new, c)
        except CausalityError as exc:
            hist.reason = f"causal violation: {exc}"
            break
        steps += 1
        s += h
        change = float(np.max(np.abs(phi_new - phi)))
        surf, phi, speed = surf_new, phi_new, speed_new
        limit = cfl_step(surf, D_new, cfl)
        if limit < ds:
            ds = limit
        steady = change < steady_tol
        if steps % record_every == 0 or steady or s >= s_max:
            hist.append(_state(surf, s, phi, speed))
        if steady:
            hist.reason = "steady"
            break
    else:
        if steps >= max_steps:
            hist.reason = "max_steps"
    return hist


def _state(surf, s, phi, speed):
    return FlowState(surf, float(s), phi.copy(), float(np.min(phi)), float(np.max(phi)),
                     float(np.max(np.abs(speed))))


def _rk4(M, w, surf, c, h):
    def rhs(u):
        return _speed_parts(M, w, surf.with_u(u), c)[1]

    u = surf.u
    k1 = rhs(u)
    k2 = rhs(u + 0.5 * h * k1)
    k3 = rhs(u + 0.5 * h * k2)
    k4 = rhs(u + h * k3)
    return u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


# sign propagation ----------------------------------------------------------------


@dataclass(frozen=True)
class SignReport:
    branch: str
    s: np.ndarray
    max_phi: np.ndarray

    def decay(self):
        """``max phi`` relative to its value right after the first step."""
        if self.branch == "identically zero" or self.max_phi.size < 2:
            return np.zeros_like(self.max_phi)
        return self.max_phi / abs(self.max_phi[1]) if self.max_phi[1] != 0 else self.max_phi


def verify_sign_propagation(states, *, zero_tol=ZERO_TOL, negative_scale=NEGATIVE_SCALE):
    """Check that ``phi <= 0`` initially becomes (or stays) ``phi < 0`` after one step.

    All-zero initial data selects the ``identically zero`` branch, in which
    every recorded ``phi`` must vanish to ``zero_tol``. Otherwise every state
    after the first recorded step must have ``max phi <= -negative_scale *
    max|phi(0)|``.
    """
    if not states:
        raise PreconditionError("no flow states recorded")
    phi0 = states[0].phi
    scale = float(np.max(np.abs(phi0)))
    if np.max(phi0) > 0:
        node = _node(phi0 > 0)
        raise PreconditionError(f"initial phi is positive at node {node}: {phi0[node]:.3g}")
    s = np.array([st.s for st in states])
    mx = np.array([st.max_phi for st in states])
    if not np.any(phi0):
        worst = max(float(np.max(np.abs(st.phi))) for st in states)
        if worst > zero_tol:
            raise SignPropagationError(f"phi left zero: max|phi| = {worst:.3g}", {"max_abs_phi": worst})
        return SignReport("identically zero", s, mx)
    bound = -negative_scale * scale
    for st in states[1:]:
        if st.max_phi > bound:
            raise SignPropagationError(f"max phi = {st.max_phi:.3g} at s = {st.s:.6g} is not negative",
                                       {"s": st.s, "max_phi": st.max_phi, "bound": bound})
    return SignReport("strictly negative", s, mx)


# evolution equation residual ----------------------------------------------------


def _fd_weights(x, x0):
    """Weights of the derivative at ``x0`` of the interpolant through nodes ``x``."""
    x = np.asarray(x, dtype=float) - x0
    m = x.size
    V = np.vander(x, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def phi_rate_rhs(M, w, surf, phi):
    """Right side of the speed evolution at fixed base point.

    ``Lap phi - <Df, Dphi> - (|K|^2 + Ric_f(nu, nu)) phi`` for the normal
    parametrization, plus the transport ``-phi a^-2 p.Dphi / W`` that appears
    because graph coordinates slide tangentially as the surface moves.
    """
    u = surf.u
    dx = surf.dx
    d = surf.d
    a, ap = M.a.value(u), M.a.d1(u)
    fp = w.f.d1(u)
    p, hess = _derivs(u, dx)
    p2 = sum(pi * pi for pi in p)
    D = a * a - p2
    W = np.sqrt(D) / a
    # inverse induced metric and K_ij
    ginv = [[(float(i == j) + p[i] * p[j] / D) / (a * a) for j in range(d)] for i in range(d)]
    K = [[(hess[i][j] + (a * ap if i == j else 0.0) - 2.0 * (ap / a) * p[i] * p[j]) / W for j in range(d)]
         for i in range(d)]
    mixed = [[sum(ginv[i][k] * K[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    K2 = sum(mixed[i][j] * mixed[j][i] for i in range(d) for j in range(d))
    # Ric_f along the normal: boost with sinh^2 = |p|^2 / D
    A, B = geometry.ric_f_coefficients(M, w, u)
    ric_f = A + (p2 / D) * B
    # Laplace-Beltrami in divergence form, sqrt(det gamma) = a^(d-1) sqrt(D)
    vol = a ** (d - 1) * np.sqrt(D)
    dphi = _grad(phi, dx)
    lap = 0.0
    for i in range(d):
        flux = vol * sum(ginv[i][j] * dphi[j] for j in range(d))
        lap = lap + _grad(flux, dx)[i]
    lap = lap / vol
    # tangential gradient of f(u): df/dx_j = f' p_j
    df_dphi = fp * sum(ginv[i][j] * p[i] * dphi[j] for i in range(d) for j in range(d))
    transport = phi * sum(p[i] * dphi[i] for i in range(d)) / (a * a * W)
    return lap - df_dphi - (K2 + ric_f) * phi - transport


def verify_phi_evolution(states, M, w):
    """Max residual of the speed evolution equation over the interior of a run.

    ``d phi / ds`` is a five-point derivative over consecutive recorded states
    (non-uniform spacing allowed); the first and last two states are skipped.
    """
    if len(states) < 5:
        raise PreconditionError(f"need at least 5 states to differentiate, got {len(states)}")
    s = np.array([st.s for st in states])
    worst = 0.0
    for j in range(2, len(states) - 2):
        wts = _fd_weights(s[j - 2:j + 3], s[j])
        rate = sum(wt * states[j - 2 + m].phi for m, wt in enumerate(wts))
        rhs = phi_rate_rhs(M, w, states[j].surface, states[j].phi)
        worst = max(worst, float(np.max(np.abs(rate - rhs))))
    return worst


# output --------------------------------------------------------------------------


DIAGNOSTIC_COLUMNS = ("s", "min_phi", "max_phi", "max_speed")


def diagnostics_csv(states, target=None):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(DIAGNOSTIC_COLUMNS)
    for st in states:
        wr.writerow([f"{v:.17g}" for v in (st.s, st.min_phi, st.max_phi, st.max_speed)])
    return _emit(buf.getvalue(), target)


def surface_csv(surf, target=None):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    coords = surf.coords()
    names = ("x",) if surf.d == 1 else ("x", "y")
    wr.writerow(names + ("u",))
    cols = [c.ravel() for c in coords] + [surf.u.ravel()]
    for row in zip(*cols):
        wr.writerow([f"{v:.17g}" for v in row])
    return _emit(buf.getvalue(), target)


def _emit(text, target):
    if target is not None:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
