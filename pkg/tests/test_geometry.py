import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bemlab import geometry as G
from bemlab import models
from bemlab import profiles as P
from bemlab.errors import ConfigurationError, DomainError
from bemlab.geometry import Observer, SpaceForm, WarpedSpacetime, WeightProfile


def weight(profile, **kw):
    return WeightProfile(profile, **kw)


# profiles -------------------------------------------------------------------------


@pytest.mark.parametrize("prof", [
    P.exponential(0.7, 2.0), P.cosh(1.3), P.sinh_power(), P.power(2.0 / 3.0), P.polynomial([1, -2, 0.5]),
    P.sinusoid(2.0, 0.5, 1.7, 0.3), P.constant(3.0).log() + P.cosh().sqrt(), P.exponential(1.0) * P.cosh(),
])
def test_profile_derivatives_match_central_differences(prof):
    t = np.linspace(0.3, 2.0, 9)
    h = 1e-4
    d1 = (prof.value(t + h) - prof.value(t - h)) / (2 * h)
    d2 = (prof.value(t + h) - 2 * prof.value(t) + prof.value(t - h)) / h**2
    assert np.allclose(prof.d1(t), d1, rtol=1e-7, atol=1e-7)
    assert np.allclose(prof.d2(t), d2, rtol=1e-5, atol=1e-5)


def test_from_callable_records_numeric_derivatives():
    prof = P.from_callable(np.sin)
    assert not prof.analytic
    assert abs(prof.d1(0.4) - math.cos(0.4)) < 1e-8
    assert abs(prof.d2(0.4) + math.sin(0.4)) < 1e-6


def test_interval_and_domain_errors():
    with pytest.raises(DomainError):
        P.Interval(1.0, 1.0)
    half = P.Interval.open(0.0)
    assert not half.contains(0.0) and half.contains(1e-9)
    assert P.Interval.closed(0, 1).intersect(P.Interval.open(0.5, 2)) == P.Interval(0.5, 1.0, False, True)
    with pytest.raises(DomainError):
        G.mean_curvature(models.einstein_de_sitter(), -1.0)


def test_spacetime_validation():
    with pytest.raises(ConfigurationError):
        WarpedSpacetime(4, P.constant(1.0), SpaceForm(2, 0))
    with pytest.raises(ConfigurationError):
        SpaceForm(3, 2)
    with pytest.raises(DomainError):
        WarpedSpacetime(2, P.sinusoid(0.0, 1.0), SpaceForm(1, 0))


def test_weight_profile_invariants():
    assert G.zero_weight().grad_causal == "both"
    assert weight(P.exponential(-1.0)).grad_causal == "future"
    assert weight(P.polynomial([0, 1])).grad_causal == "past"
    assert weight(P.sinusoid()).grad_causal == "none"
    with pytest.raises(ConfigurationError):
        weight(P.sinusoid(0.0, 1.0), sup_bound=0.5)
    with pytest.raises(ConfigurationError):
        weight(P.polynomial([0, 1]), grad_causal="future")


# closed forms -----------------------------------------------------------------------


@given(st.floats(-6, 6))
def test_observer_is_unit_timelike(beta):
    assert abs(Observer(0.0, beta).norm2() + 1.0) <= 1e-15 * math.cosh(beta) ** 2


def test_ricci_examples():
    es = models.einstein_static()
    assert G.ricci_obs(es, 0.3, 0.0) == pytest.approx(0.0, abs=1e-15)
    mink = models.minkowski_torus()
    for b in (0.0, 0.7, 2.0):
        assert G.ricci_obs(mink, 1.0, b) == 0.0
        assert G.ricci_obs(models.de_sitter(), 0.4, b) == pytest.approx(-3.0, abs=1e-12 * math.cosh(b) ** 2)


def test_hessian_examples():
    es = models.einstein_static()
    f_exp = weight(P.exponential(1.0))
    assert G.hess_f_obs(es, f_exp, 0.5) == pytest.approx(math.exp(0.5), rel=1e-15)
    assert G.hess_f_obs(models.de_sitter(), weight(P.constant(2.0)), 0.5, 1.3) == 0.0
    M = models.warped_exp(4, -1.0)
    assert G.hess_f_obs(M, weight(P.polynomial([0, 0, 1])), 1.0, 0.0) == pytest.approx(2.0)


def test_ric_f_examples():
    es = models.einstein_static()
    w = weight(P.exponential(1.0))
    for t in (0.0, 1.0, 2.5):
        assert G.ric_f_obs(es, w, t) == pytest.approx(math.exp(t), abs=1e-12)
    assert G.ric_f_obs(models.minkowski_torus(), G.zero_weight(), 0.3, 1.0) == 0.0
    for b in (0.0, 1.0, 2.0):
        assert G.ric_f_obs(models.de_sitter(), G.zero_weight(), 0.3, b) == pytest.approx(-3.0, abs=1e-10)


def test_einstein_static_ric_f_lower_bound_on_beta_grid():
    es = models.einstein_static()
    w = weight(P.exponential(1.0))
    for t in np.linspace(-2, 2, 9):
        vals = [G.ric_f_obs(es, w, t, b) for b in np.linspace(0, 4, 17)]
        assert min(vals) >= math.exp(t) * (1 - 1e-14)


def test_mean_curvature_examples():
    assert G.mean_curvature(models.minkowski_torus(), 2.0) == 0.0
    M = models.warped_exp(4, -1.0)
    assert np.allclose(G.mean_curvature(M, np.linspace(-3, 3, 11)), -3.0, atol=1e-15)
    assert G.mean_curvature(models.einstein_de_sitter(), 1.0) == pytest.approx(2.0)


def test_f_mean_curvature_examples():
    es = models.einstein_static()
    for t in (0.0, 1.0):
        assert G.f_mean_curvature(es, weight(P.exponential(1.0)), t) == pytest.approx(-math.exp(t), abs=1e-12)
    ds = models.de_sitter()
    assert G.f_mean_curvature(ds, weight(P.constant(5.0)), 0.7) == G.mean_curvature(ds, 0.7)
    M = models.warped_exp(4, -1.0)
    assert G.f_mean_curvature(M, weight(P.polynomial([0, -1])), 0.2) == pytest.approx(-2.0)
    assert G.normalized_f_mean_curvature(M, G.zero_weight(), 0.2) == pytest.approx(-1.0)


def test_shear_vanishes_for_warped_products():
    for M in (models.de_sitter(), models.lcdm(), models.oscillating()):
        assert np.max(np.abs(G.shear(M, 0.8))) < 1e-15
        K = G.second_fundamental_form(M, 0.8)
        assert np.trace(K) == pytest.approx(G.mean_curvature(M, 0.8))


def test_ric_f_is_affine_in_sinh_squared():
    M, w = models.lcdm(), weight(P.sinusoid(0.0, 0.3))
    A, B = G.ric_f_coefficients(M, w, 1.1)
    for b in (0.0, 0.4, 1.5):
        assert G.ric_f_obs(M, w, 1.1, b) == pytest.approx(A + math.sinh(b) ** 2 * B, rel=1e-13, abs=1e-13)


# finite-difference cross-check ------------------------------------------------------


def test_fd_validate_examples():
    assert G.fd_validate(models.de_sitter(), G.zero_weight(), 0.3) < 1e-6
    assert G.fd_validate(models.minkowski_torus(), G.zero_weight(), 0.3, 1.0) == 0.0
    assert G.fd_validate(models.lcdm(), G.zero_weight(), 1.0) < 1e-6
    with pytest.raises(DomainError):
        G.fd_validate(models.einstein_de_sitter(), G.zero_weight(), 1e-3, h=1e-3)


@settings(max_examples=20, deadline=None)
@given(
    kind=st.sampled_from(["exp", "cosh", "sinusoid", "poly"]),
    c1=st.floats(0.2, 1.5), c2=st.floats(-0.5, 0.5), kappa=st.sampled_from([-1, 0, 1]),
    n=st.integers(2, 5), t=st.floats(0.2, 1.5), beta=st.floats(0.0, 2.0), fc=st.floats(-1.0, 1.0),
)
def test_fd_validate_random_profiles(kind, c1, c2, kappa, n, t, beta, fc):
    a = {"exp": P.exponential(c2, c1), "cosh": P.cosh(c1), "sinusoid": P.sinusoid(1.0, 0.5 * c2, c1),
         "poly": P.polynomial([1.0, c2, 0.3 * c1])}[kind]
    M = WarpedSpacetime(n, a, SpaceForm(n - 1, kappa), P.Interval.closed(0.0, 2.0))
    w = weight(P.sinusoid(0.0, fc, 1.3))
    assert G.fd_validate(M, w, t, beta) < 1e-6


def test_time_reversal_of_spacetime():
    M = models.lcdm()
    R = M.reflected()
    assert G.mean_curvature(R, -1.2) == pytest.approx(-G.mean_curvature(M, 1.2))
    assert G.ricci_obs(R, -1.2, 0.5) == pytest.approx(G.ricci_obs(M, 1.2, 0.5))
