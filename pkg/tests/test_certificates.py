import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bemlab import certificates as C
from bemlab import focusing as F
from bemlab import geometry as G
from bemlab import models
from bemlab import profiles as P
from bemlab.errors import PreconditionError
from bemlab.geometry import SpaceForm, WarpedSpacetime, WeightProfile


def slice_of(M, w, t, **kw):
    return C.homogeneous_slice(M, w, t, **kw)


def exp_weight():
    return WeightProfile(P.exponential(1.0))


# theorem_grid_min -----------------------------------------------------------------------


def test_grid_min_examples():
    assert abs(C.theorem_grid_min(models.de_sitter(), G.zero_weight(), -3.0)) < 1e-12
    assert C.theorem_grid_min(models.minkowski_torus(), G.zero_weight(), 0.0) == 0.0
    M = models.warped_exp(4, -2.0)
    # Ric(nu, nu) = -3 a''/a = -12, so the margin against -3 is -9
    assert C.theorem_grid_min(M, G.zero_weight(), -3.0) == pytest.approx(-9.0)


# check_t11 ---------------------------------------------------------------------------


def test_nonnegative_check_static_model_fails_on_weight_bound():
    M, w = models.einstein_static(), exp_weight()
    c = C.check_t11(M, w, slice_of(M, w, 0.0), "future")
    assert c.verdict == "FAILS"
    assert not c.hypothesis("f <= k").passed
    assert c.hypothesis("Ric_f >= 0").passed


def test_nonnegative_check_minkowski_fails_strictness():
    M, w = models.minkowski_torus(), G.zero_weight()
    c = C.check_t11(M, w, slice_of(M, w, 0.0), "future")
    assert c.verdict == "FAILS" and not c.hypothesis("H_f < 0").passed
    assert "borderline" in c.extras


def test_nonnegative_check_einstein_de_sitter_past_fires():
    M, w = models.einstein_de_sitter(), G.zero_weight()
    c = C.check_t11(M, w, slice_of(M, w, 1.0), "past")
    assert c.verdict == "FIRES" and c.theorem == "T4.1"
    assert c.delta == pytest.approx(2.0 / 3.0)
    assert c.t_bound == pytest.approx(1.5)
    assert c.conclusion == C.EVERY


def test_non_cauchy_downgrades_conclusion():
    M, w = models.einstein_de_sitter(), G.zero_weight()
    c = C.check_t11(M, w, slice_of(M, w, 1.0, cauchy=False), "past")
    assert c.theorem == "T2.5" and c.conclusion == C.SOME and c.fires


def test_non_compact_slice_is_refused():
    M, w = models.einstein_de_sitter(), G.zero_weight()
    with pytest.raises(PreconditionError):
        C.check_t11(M, w, slice_of(M, w, 1.0, compact=False), "past")


def test_local_k_mode():
    # f = -t is unbounded above in the past, bounded by f(t_S) in the future
    M = models.minkowski_torus()
    w = WeightProfile(P.polynomial([0, -1]))
    S = slice_of(M, w, 1.0)
    assert C.extract_k(M, w, S, "future", "local") == pytest.approx(-1.0)
    assert C.extract_k(M, w, S, "past", "local") is None
    assert C.extract_k(M, w, S, "future", "global") is None
    with pytest.raises(PreconditionError):
        C.extract_k(M, w, S, "future", "sideways")


# check_t12 ---------------------------------------------------------------------------


@pytest.mark.parametrize("t0", [0.5, 1.0, 2.0])
def test_negative_level_check_lcdm_past_bound_ratio(t0):
    M, w = models.lcdm(), G.zero_weight()
    S = slice_of(M, w, t0)
    assert S.H_f_inf == pytest.approx(3.0 / math.tanh(1.5 * t0))
    c = C.check_t12(M, w, S, "past", "ii")
    assert c.verdict == "FIRES" and c.theorem == "T4.2ii"
    assert c.t_bound == pytest.approx(1.5 * t0, rel=1e-12)


@pytest.mark.parametrize("t", [-1.0, 0.0, 0.7, 3.0])
def test_negative_level_check_de_sitter_never_fires(t):
    M, w = models.de_sitter(), G.zero_weight()
    for d in ("future", "past"):
        for case in ("i", "ii"):
            assert C.check_t12(M, w, slice_of(M, w, t), d, case).verdict == "FAILS"


def test_negative_level_check_warped_borderline_is_rigid_instead():
    M, w = models.warped_exp(4, -1.0), G.zero_weight()
    S = slice_of(M, w, 0.0)
    c = C.check_t12(M, w, S, "future", "ii")
    assert c.verdict == "FAILS" and "borderline" in c.extras
    r = C.classify_rigidity(M, w, S, "future")
    assert r.verdict == "RIGID" and r.theorem == "T1.5" and r.conclusion == C.SPLITS_WARPED


def test_causal_case_without_causal_gradient_is_a_failed_hypothesis():
    M = models.minkowski_torus()
    w = WeightProfile(P.sinusoid(0.0, 0.1))
    assert w.grad_causal == "none"
    c = C.check_t12(M, w, slice_of(M, w, 0.0), "future", "ii")
    assert c.verdict == "FAILS"
    assert not c.hypothesis("grad f future causal").passed


# rigidity ---------------------------------------------------------------------------


def test_rigidity_product():
    M = models.product()
    w = WeightProfile(P.constant(2.0), sup_bound=2.0)
    r = C.classify_rigidity(M, w, slice_of(M, w, 0.0), "future")
    assert r.verdict == "RIGID" and r.theorem == "T1.3" and r.conclusion == C.SPLITS_PRODUCT
    assert r.hypothesis("df/dt == 0").passed and r.hypothesis("K == 0").passed
    assert r.hypothesis("completeness (asserted)").witness == "asserted"


def test_rigidity_warped_fit_residual():
    M = models.warped_exp(4, -1.0)
    w = WeightProfile(P.constant(-0.5), sup_bound=-0.5)
    r = C.classify_rigidity(M, w, slice_of(M, w, 0.3), "future")
    assert r.verdict == "RIGID" and r.theorem == "T1.5"
    assert r.hypothesis("a exponential fit").witness < 1e-10


def test_oscillating_model_is_not_rigid_but_focuses():
    M, w = models.oscillating(), G.zero_weight()
    S = slice_of(M, w, 2.5)
    assert M.a.d1(2.5) < 0
    r = C.classify_rigidity(M, w, S, "future")
    assert r.verdict == "FAILS"
    assert C.check_t11(M, w, S, "future").verdict == "FIRES"


def test_two_sided_rigidity_product():
    M = models.product()
    w = WeightProfile(P.constant(1.0), sup_bound=1.0)
    c = C.classify_c14(M, w, slice_of(M, w, 0.0))
    assert c.theorem == "C1.4" and c.verdict == "RIGID"


# invariants -------------------------------------------------------------------------


def test_complete_static_model_never_fires():
    M, w = models.einstein_static(), exp_weight()
    for t in (-1.0, 0.0, 2.0):
        S = slice_of(M, w, t)
        for k_mode in ("global", "local"):
            for c in C.all_checks(M, w, S, k_mode=k_mode):
                assert not c.fires, c


def test_certificate_validation_and_record():
    with pytest.raises(ValueError):
        C.Certificate("T1.1", "future", (C.Hypothesis("x", False),), "FIRES", C.EVERY, 1.0, 1.0)
    with pytest.raises(ValueError):
        C.Certificate("T9", "future", (), "FAILS", C.NO_CONCLUSION)
    M, w = models.einstein_de_sitter(), G.zero_weight()
    rec = json.loads(C.check_t11(M, w, slice_of(M, w, 1.0), "past").to_json())
    for key in ("theorem", "direction", "verdict", "hypotheses", "delta", "t_bound", "conclusion"):
        assert key in rec
    assert rec["hypotheses"][0].keys() == {"name", "pass", "witness"}


def random_power_model(p, amp):
    return WarpedSpacetime(4, P.power(p, amp), SpaceForm(3, 0), name=f"power[{p:.3f}]")


@settings(max_examples=10, deadline=None)
@given(p=st.floats(0.2, 1.0), amp=st.floats(0.5, 3.0), t_S=st.floats(0.3, 3.0))
def test_soundness_against_dynamics(p, amp, t_S):
    M, w = random_power_model(p, amp), G.zero_weight()
    assert C.theorem_grid_min(M, w, 0.0) >= -1e-9
    c = C.check_t11(M, w, slice_of(M, w, t_S), "past")
    assert c.fires
    traj = F.integrate_raychaudhuri(M, w, t_S, -1.0)
    assert traj.blowup is not None
    assert t_S - traj.blowup.t_blow <= c.t_bound + 1e-4


@pytest.mark.parametrize("M,checker", [
    (models.einstein_de_sitter(), lambda M, w, S: C.check_t11(M, w, S, "past")),
    (models.lcdm(), lambda M, w, S: C.check_t12(M, w, S, "past", "ii")),
])
@pytest.mark.parametrize("t_S", [0.5, 1.0, 2.0])
def test_soundness_closed_form_models(M, checker, t_S):
    w = G.zero_weight()
    c = checker(M, w, slice_of(M, w, t_S))
    traj = F.integrate_raychaudhuri(M, w, t_S, -1.0)
    assert c.fires and traj.blowup is not None
    assert t_S - traj.blowup.t_blow <= c.t_bound + 1e-4


@settings(max_examples=15, deadline=None)
@given(rate=st.floats(-2.0, 2.0), fslope=st.floats(-1.0, 1.0), t_S=st.floats(-1.0, 1.0))
def test_time_reversal_duality(rate, fslope, t_S):
    M = WarpedSpacetime(4, P.exponential(rate), SpaceForm(3, 0), P.Interval.closed(-3, 3))
    w = WeightProfile(P.polynomial([0.0, fslope], P.Interval.closed(-3, 3)), sup_bound=3 * abs(fslope))
    fwd = C.check_t11(M, w, slice_of(M, w, t_S), "future")
    Mr, wr = M.reflected(), w.reflected()
    bwd = C.check_t11(Mr, wr, slice_of(Mr, wr, -t_S), "past")
    assert fwd.verdict == bwd.verdict
    assert (fwd.delta is None) == (bwd.delta is None)
    if fwd.delta is not None:
        assert fwd.delta == pytest.approx(bwd.delta, rel=1e-12)
    if fwd.t_bound is not None:
        assert fwd.t_bound == pytest.approx(bwd.t_bound, rel=1e-12)
    for hf, hb in zip(fwd.hypotheses, bwd.hypotheses):
        assert hf.passed == hb.passed
        if isinstance(hf.witness, float):
            # the sign witness records H_f, which flips under t -> -t
            assert abs(hf.witness) == pytest.approx(abs(hb.witness), rel=1e-9, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(rate=st.floats(-1.5, -0.5), kappa=st.sampled_from([-1, 0, 1]), t_S=st.floats(-1.0, 1.0))
def test_borderline_exclusivity(rate, kappa, t_S):
    M = WarpedSpacetime(4, P.exponential(rate), SpaceForm(3, kappa))
    w = G.zero_weight()
    S = slice_of(M, w, t_S)
    fires = C.check_t12(M, w, S, "future", "ii").fires
    rigid = C.classify_rigidity(M, w, S, "future").verdict == "RIGID"
    assert not (fires and rigid)
    if abs(rate + 1.0) < 1e-12 and kappa == 0:
        assert rigid


def test_exact_borderline_both_ways():
    M, w = models.warped_exp(4, -1.0), G.zero_weight()
    S = slice_of(M, w, 0.0)
    assert not C.check_t12(M, w, S, "future", "ii").fires
    assert C.classify_rigidity(M, w, S, "future").verdict == "RIGID"
    steeper = models.warped_exp(4, -1.2)
    S2 = slice_of(steeper, w, 0.0)
    # steeper contraction: EC at level -(n-1) fails, so neither fires nor splits
    assert not C.check_t12(steeper, w, S2, "future", "ii").fires
    assert C.classify_rigidity(steeper, w, S2, "future").verdict == "FAILS"
    assert np.isfinite(S2.H_f_inf)
