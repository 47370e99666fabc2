"""Acceptance criteria 1-10, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (shown even
under output capture) and then asserts, so a failure is both visible in the
summary line and reported by pytest.
"""

import math

import numpy as np
import pytest

from bemlab import bransdicke as bd
from bemlab import certificates as C
from bemlab import focusing as F
from bemlab import geometry as G
from bemlab import mcf, models
from bemlab import profiles as P
from bemlab import runner
from bemlab.cli import builtin_scenarios
from bemlab.errors import PreconditionError
from bemlab.geometry import SpaceForm, WarpedSpacetime, WeightProfile


@pytest.fixture
def report(capsys):
    def emit(number, title, failures):
        status = "PASS" if not failures else "FAIL"
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:2d} {status}: {title}" + ("" if not failures else f" -- {failures}"))
        assert not failures, failures
    return emit


def test_criterion_01_riccati_deadline(report):
    bad = []
    for delta in (0.5, 1.0, 2.0):
        t_blow, detected = F.model_blowup(0.0, -delta)
        if not detected or abs(t_blow - 1.0 / delta) > 1e-4:
            bad.append(("blow-up", delta, t_blow))
    t_p = F.lemma21_deadline(0.5, 2.0, 0.0, 4).t_p
    if abs(t_p - 2.0 * math.exp(4.0 / 3.0)) > 1e-10:
        bad.append(("deadline", t_p))
    report(1, "x' = -x^2 blow-up times and the k-shifted deadline", bad)


def test_criterion_02_hyperbolic_deadline(report):
    bad = []
    for delta in (0.5, 1.0, 3.0):
        t_blow, detected = F.model_blowup(1.0, -(1.0 + delta))
        if not detected or abs(t_blow - math.atanh(1.0 / (1.0 + delta))) > 1e-4:
            bad.append(("blow-up", delta, t_blow))
    t_p = F.lemma22_deadline(1.0).t_p
    if abs(t_p - 0.549306) > 1e-6:
        bad.append(("deadline", t_p))
    report(2, "y' = 1 - y^2 blow-up times and the delta=1 deadline", bad)


def test_criterion_03_complete_static_regression(report):
    bad = []
    M, w = models.einstein_static(), WeightProfile(P.exponential(1.0))
    for t in np.linspace(-2.0, 2.0, 9):
        if abs(G.ric_f_obs(M, w, t) - math.exp(t)) > 1e-12 * max(1.0, math.exp(t)):
            bad.append(("Ric_f", t))
        if abs(G.f_mean_curvature(M, w, t) + math.exp(t)) > 1e-12 * max(1.0, math.exp(t)):
            bad.append(("H_f", t))
    for t in (-1.0, 0.0, 1.0, 2.0):
        S = C.homogeneous_slice(M, w, t)
        for k_mode in ("global", "local"):
            bad += [("fires", c.theorem, c.direction, t) for c in C.all_checks(M, w, S, k_mode=k_mode) if c.fires]
    report(3, "static closed universe with f = e^t: curvature values, nothing fires", bad)


def test_criterion_04_flrw_bound_sharpness(report):
    bad = []
    w = G.zero_weight()
    for t0 in (0.5, 1.0, 2.0):
        eds = models.einstein_de_sitter()
        c = C.check_t11(eds, w, C.homogeneous_slice(eds, w, t0), "past")
        if c.theorem != "T4.1" or not c.fires or abs(c.t_bound / t0 - 1.5) > 1e-6:
            bad.append(("eds", t0, c.verdict, c.t_bound))
        lcdm = models.lcdm()
        c = C.check_t12(lcdm, w, C.homogeneous_slice(lcdm, w, t0), "past", "ii")
        if c.theorem != "T4.2ii" or not c.fires or abs(c.t_bound / t0 - 1.5) > 1e-6:
            bad.append(("lcdm", t0, c.verdict, c.t_bound))
    report(4, "past bounds fire with t_bound / age = 1.5", bad)


def test_criterion_05_comparison_dominance(report):
    rng = np.random.default_rng(5)
    bad, used = [], 0
    w = G.zero_weight()
    for i in range(20):
        if i % 2 == 0:
            t_S = float(rng.uniform(0.5, 2.5))
            M = WarpedSpacetime(4, P.power(float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.5, 3.0))),
                                SpaceForm(3, 0))
            level, make = 0.0, F.lemma21_from_trajectory
        else:
            # H/3 = (2r/3) coth(r t) > 2/(3t) > 1 for t < 2/3, which the hyperbolic bound needs
            t_S = float(rng.uniform(0.2, 0.6))
            scale = P.sinh_power(2.0 / 3.0, float(rng.uniform(0.3, 1.5)), float(rng.uniform(0.5, 2.0)))
            M = WarpedSpacetime(4, scale, SpaceForm(3, 0))
            level, make = -3.0, F.lemma22_from_trajectory
        if C.theorem_grid_min(M, w, level) < 0:
            bad.append(("energy condition", M.name))
            continue
        traj = F.integrate_raychaudhuri(M, w, t_S, 0.0)
        try:
            v = F.check_comparison(traj, make(traj, 0.0))
        except PreconditionError as exc:
            bad.append((M.name, t_S, str(exc)))
            continue
        used += 1
        if not v <= 1e-8:
            bad.append((M.name, t_S, v))
    if used != 20:
        bad.append(("models checked", used))
    report(5, "20 random models stay below their comparison bound", bad)


def test_criterion_06_curvature_cross_validation(report):
    bad = []
    closed = [models.minkowski_torus(), models.product(), models.einstein_static(), models.de_sitter(),
              models.einstein_de_sitter(), models.lcdm(), models.warped_exp(), models.oscillating()]
    for M in closed:
        for t, beta in ((0.7, 0.0), (1.3, 0.8)):
            for w in (G.zero_weight(), WeightProfile(P.sinusoid(0.0, 0.3, 1.1))):
                err = G.fd_validate(M, w, t, beta)
                if not err < 1e-6:
                    bad.append((M.name, t, beta, err))
    rng = np.random.default_rng(6)
    builders = [lambda c1, c2: P.exponential(c2, c1), lambda c1, c2: P.cosh(c1),
                lambda c1, c2: P.sinusoid(1.0, 0.5 * c2, c1), lambda c1, c2: P.polynomial([1.0, c2, 0.3 * c1])]
    for i in range(20):
        c1, c2 = float(rng.uniform(0.2, 1.5)), float(rng.uniform(-0.5, 0.5))
        n = int(rng.integers(2, 6))
        M = WarpedSpacetime(n, builders[i % 4](c1, c2), SpaceForm(n - 1, int(rng.integers(-1, 2))),
                            P.Interval.closed(0.0, 2.0))
        w = WeightProfile(P.sinusoid(0.0, float(rng.uniform(-1, 1)), 1.3))
        t, beta = float(rng.uniform(0.2, 1.5)), float(rng.uniform(0.0, 2.0))
        err = G.fd_validate(M, w, t, beta)
        if not err < 1e-6:
            bad.append(("random", i, err))
    report(6, "closed-form curvature matches finite differences", bad)


def test_criterion_07_rigidity(report):
    bad = []
    M = models.product()
    w = WeightProfile(P.constant(1.5), sup_bound=1.5)
    r = C.classify_rigidity(M, w, C.homogeneous_slice(M, w, 0.0), "future")
    if not (r.verdict == "RIGID" and r.conclusion == C.SPLITS_PRODUCT and r.hypothesis("K == 0").passed
            and r.hypothesis("df/dt == 0").passed):
        bad.append(("product", r.verdict, r.conclusion))
    M = models.warped_exp(4, -1.0)
    r = C.classify_rigidity(M, w, C.homogeneous_slice(M, w, 0.0), "future")
    fit = r.hypothesis("a exponential fit").witness
    if not (r.verdict == "RIGID" and r.conclusion == C.SPLITS_WARPED and fit < 1e-10):
        bad.append(("warped", r.verdict, fit))
    M = models.oscillating()
    for t in (0.5, 1.5, 2.5):
        for d in ("future", "past"):
            r = C.classify_rigidity(M, w, C.homogeneous_slice(M, w, t), d)
            if r.verdict == "RIGID":
                bad.append(("oscillating", t, d))
    report(7, "product and e^{-t} split, a = 1 + 0.1 sin t does not", bad)


def _bump_run(n_pts):
    M, w = models.product(2), G.zero_weight()
    surf = mcf.GraphHypersurface.from_function(M, lambda x: 1.0 + 0.05 * np.cos(x), n_pts)
    c = float(np.max(mcf.graph_Hf(M, w, surf)))
    return M, w, mcf.flow_run(M, w, surf, c, 0.05)


def test_criterion_08_flow_sign_propagation(report):
    bad = []
    M, w, hist = _bump_run(128)
    if hist[0].max_phi > 0 or not np.any(hist[0].phi < 0):
        bad.append("initial data not a non-positive bump")
    if not all(st.max_phi < 0 for st in hist[1:]):
        bad.append("max phi not negative after the first step")
    if mcf.verify_sign_propagation(hist).branch != "strictly negative":
        bad.append("branch")
    r128 = mcf.verify_phi_evolution(hist, M, w)
    M2, w2, hist2 = _bump_run(256)
    r256 = mcf.verify_phi_evolution(hist2, M2, w2)
    if not r128 / r256 >= 3.5:
        bad.append(("convergence ratio", r128 / r256))
    Mh, wh = models.de_sitter(2), WeightProfile(P.sinusoid(0.0, 0.2, 1.0))
    flat = mcf.GraphHypersurface.from_function(Mh, lambda x: 0.5 + 0 * x, 8)
    hom = mcf.flow_run(Mh, wh, flat, 0.3, 0.5, 1e-3, record_every=5)
    rh = mcf.verify_phi_evolution(hom, Mh, wh)
    if not rh < 1e-6:
        bad.append(("homogeneous residual", rh))
    report(8, "sign propagation, homogeneous residual, second-order convergence", bad)


def test_criterion_09_brans_dicke_identities(report):
    bad = []
    rng = np.random.default_rng(9)
    for _ in range(50):
        omega = float(rng.uniform(-1.4, 20))
        pot = bd.power_potential(float(rng.uniform(-3, 3)), float(rng.uniform(-2, 3)))
        m = bd.BDModel(omega, P.constant(1.0), pot, bd.vacuum(), models.product())
        phi = float(rng.uniform(0.05, 10))
        lam = bd.potential_functionals(m, -math.log(phi))[2]
        lam_v = float(bd.lambda_v_form(omega, pot, phi))
        if abs(lam - lam_v) > 1e-10 * max(1.0, abs(lam_v)):
            bad.append(("dual form", omega, phi))
    m = bd.BDModel(1.0, P.constant(1.0), bd.linear_potential(3.0, 1.0), bd.vacuum(), models.product())
    for f in (-1.0, 0.0, 1.5):
        lam = bd.potential_functionals(m, f)[2]
        if abs(lam - 3.0) > 1e-12:
            bad.append(("linear", f, lam))
    for _ in range(50):
        rho, eos = float(rng.uniform(-2, 5)), float(rng.uniform(-1.5, 1.5))
        geom = WarpedSpacetime(4, P.exponential(float(rng.uniform(-1, 1)), 1.3), SpaceForm(3, 0))
        fl = bd.Fluid(P.constant(rho), P.constant(eos * rho))
        m = bd.BDModel(0.0, P.exponential(0.2, float(rng.uniform(0.1, 10))), bd.zero_potential(), fl, geom)
        t, beta = float(rng.uniform(-1, 1)), float(rng.uniform(0, 3))
        j, e = bd.sec_margin(m, t, beta), bd.sec_margin_einstein(m, t, beta)
        if abs(j - e) > 1e-10 * max(1.0, abs(j)):
            bad.append(("frame invariance", j, e))
    for omega, eos in ((10.0, 0.0), (0.0, -0.5)):
        syn = bd.synthesize_flrw(omega, bd.zero_potential(), eos=eos)
        lo, hi = syn.model.geom.tdomain.lo, syn.model.geom.tdomain.hi
        worst = max(max(bd.field_residuals(syn.model, t)) for t in np.linspace(lo, hi, 19)[1:-1])
        if not worst < 1e-8:
            bad.append(("residuals", omega, eos, worst))
    report(9, "Lambda dual form, linear potential, frame invariance, field residuals", bad)


def test_criterion_10_frame_comparison(report, tmp_path):
    bad = []
    scen = {s.name: s for s in builtin_scenarios()}
    for name in ("bd_frame_comparison_t48", "bd_dust_t46"):
        rep = runner.run_one(scen[name], str(tmp_path))
        if not rep.passed:
            bad.append((name, [(c.name, c.observed) for c in rep.checks if not c.passed], rep.error))
    weak = bd.synthesize_flrw(0.0, bd.zero_potential(), eos=-0.5).model
    S = bd.bd_slice(weak, 1.0)
    if (bd.check_t46(weak, S).verdict, bd.check_t48(weak, S).verdict) != ("FIRES", "FAILS"):
        bad.append("weak vs strong verdicts")
    dust = bd.synthesize_flrw(10.0, bd.zero_potential()).model
    S = bd.bd_slice(dust, 1.0)
    if (bd.check_t46(dust, S).verdict, bd.check_t48(dust, S).verdict) != ("FIRES", "FIRES"):
        bad.append("dust verdicts")
    for which in ("eq410", "eq411", "eq412"):
        if bd.lemma45_condition(dust, S, which) != bd.hf_condition(dust, S, which):
            bad.append(("threshold equivalence", which))
    comp = bd.frame_comparison(dust, S)
    if abs(comp["threshold_conformal"] - 1.5 * comp["threshold_weighted"]) > 1e-12:
        bad.append("conformal threshold")
    report(10, "weak-vs-strong scenario and dust baseline", bad)
