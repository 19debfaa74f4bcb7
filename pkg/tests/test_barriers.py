from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fujitalab.barriers import (EtaBarrier, PhiBarrier, WBarrier, admissible_a1, build_eta, build_gaussian_super,
                                build_phi, build_w, defect_grid, eta_min_lambda, parabolic_defect, relative_defects,
                                stationary_defect)
from fujitalab.errors import ParameterError
from fujitalab.geometry import integrate_radial


# ---------------------------------------------------------------------------
# phi


def test_phi_gluing_values_and_slopes():
    phi = PhiBarrier(2.0, 1.0, 1.0)
    assert phi.a2 == 1.0
    assert phi.C2 == pytest.approx(math.exp(-1.0), rel=1e-15)
    expected = math.exp(-2.0)
    assert phi.inner_value(1.0) == pytest.approx(expected, rel=1e-15)
    assert phi.outer_value(1.0) == pytest.approx(expected, rel=1e-15)
    eps = 1e-9
    assert phi.d1(1.0 - eps) == pytest.approx(-2 * expected, rel=1e-7)
    assert phi.d1(1.0 + eps) == pytest.approx(-2 * expected, rel=1e-7)


@settings(max_examples=50, deadline=None)
@given(a1=st.floats(0.05, 10.0), R0=st.floats(0.1, 10.0), C1=st.floats(0.1, 10.0))
def test_phi_c1_gluing(a1, R0, C1):
    phi = PhiBarrier(a1, R0, C1)
    assert phi.inner_value(R0) == pytest.approx(phi.outer_value(R0), rel=1e-13)
    inner_slope = -2 * phi.a2 * R0 * phi.inner_value(R0)
    outer_slope = -a1 * phi.outer_value(R0)
    assert abs(inner_slope - outer_slope) <= 1e-15 * abs(outer_slope) * 8


def test_phi_interval_hyperbolic(hyp3, no_drift):
    iv = admissible_a1(6.0, 0.0, 1.0, 1.0, 0.0, 3, False, hyp3, no_drift)
    coth1 = 1.0 / math.tanh(1.0)
    assert iv.closed_outer == pytest.approx(6.0 / (2 * coth1), rel=1e-14)
    assert iv.closed_outer == pytest.approx(2.285, abs=1e-3)
    assert iv.closed_inner == pytest.approx(6.0 / (1 + 2 * coth1), rel=1e-14)
    assert not iv.empty
    assert iv.verified_upper >= iv.closed_form
    # grid-verified upper edge for this case (frozen from bisection)
    assert iv.verified_upper == pytest.approx(2.0, rel=1e-12)


def test_phi_certificate_passes(hyp3, no_drift):
    phi = build_phi(hyp3, no_drift, 6.0, R0=1.0)
    assert phi.certificate.passed
    assert phi.certificate.min_relative_defect >= -1e-12


def test_phi_at_verified_edge(hyp3, no_drift):
    iv = admissible_a1(5.0, 0.0, 1.0, 2.0, 0.0, 3, False, hyp3, no_drift)
    rel = relative_defects(PhiBarrier(iv.verified_upper, 2.0), hyp3, no_drift, 5.0, 40.0, 4096)
    assert -1e-12 <= float(np.min(rel)) <= 1e-9


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_phi_needs_lambda_above_c_hat(hyp3, no_drift, lam):
    with pytest.raises(ParameterError):
        build_phi(hyp3, no_drift, lam)


def test_phi_zero_denominator(hyp3, no_drift):
    b0 = -2.0 / math.tanh(1.0)
    with pytest.raises(ParameterError, match="denominator"):
        admissible_a1(6.0, 0.0, 1.0, 1.0, b0, 3, False, hyp3, no_drift)


def test_phi_normalization_and_scaling(hyp3, no_drift):
    phi = build_phi(hyp3, no_drift, 5.0, R0=2.0)
    phi2 = build_phi(hyp3, no_drift, 5.0, R0=2.0, C1=2.0)
    assert phi.certificate.normalizable
    total = integrate_radial(lambda r: phi.normalization * phi.value(r), hyp3, 60.0,
                             breakpoints=phi.breakpoints())
    assert total == pytest.approx(1.0, abs=1e-9)
    r = np.linspace(0, 10, 101)
    np.testing.assert_allclose(phi2.value(r), 2 * phi.value(r), rtol=1e-14)
    assert phi2.normalization == pytest.approx(phi.normalization / 2, rel=1e-12)


# ---------------------------------------------------------------------------
# eta


def test_eta_minimal_lambda(euclid3, no_drift):
    assert eta_min_lambda(0.1, 1.0, 3, 0.0, 0.0) == pytest.approx(0.6, rel=1e-15)
    eta = build_eta(euclid3, no_drift, 0.1, 0.6)
    assert eta.certificate.passed
    # k = (a / pi)^{3/2} for the Gaussian on R^3
    assert eta.normalization == pytest.approx((0.1 / math.pi) ** 1.5, rel=1e-10)


def test_eta_normalization_integral(euclid3, no_drift):
    eta = build_eta(euclid3, no_drift, 0.1, 0.6)
    total = integrate_radial(lambda r: eta.normalization * eta.value(r), euclid3, 30.0)
    assert total == pytest.approx(1.0, abs=1e-9)


def test_eta_errors(euclid3, no_drift):
    with pytest.raises(ParameterError):
        build_eta(euclid3, no_drift, 0.0, 0.6)
    with pytest.raises(ParameterError) as info:
        build_eta(euclid3, no_drift, 0.1, 0.5)
    assert info.value.values["lambda_min"] == pytest.approx(0.6)


def test_eta_on_ricci_decay(ricci3, no_drift):
    eta = build_eta(ricci3, no_drift, 0.05, 10.0)
    assert 0 < eta.normalization < math.inf


def test_eta_defect_grows_in_tail(euclid3, no_drift):
    eta = EtaBarrier(0.1)
    r = np.array([5.0, 10.0, 20.0])
    d = stationary_defect(eta, euclid3, no_drift, 0.6, r) / eta.value(r)
    assert np.all(np.diff(d) > 0) and np.all(d > 0)


# ---------------------------------------------------------------------------
# w


def test_w_defect_at_one(hyp3, no_drift):
    w = build_w(hyp3, no_drift, 0.75, a=1.0)
    assert w.sigma_spectral == 2.0
    assert w.a_roots() == pytest.approx((0.5, 1.5))
    val = float(stationary_defect(w, hyp3, no_drift, 0.75, np.array([1.0]))[0])
    oracle = -math.exp(-1.0) * (1.0 - 2.0 / math.tanh(1.0) + 0.75)
    assert val == pytest.approx(oracle, rel=1e-12)
    assert val == pytest.approx(0.3224, abs=5e-4)
    assert w.certificate.passed


def test_w_lambda_out_of_range(hyp3, no_drift):
    with pytest.raises(ParameterError):
        build_w(hyp3, no_drift, 1.5)


def test_w_small_a_fails_certificate(hyp3, no_drift):
    w = build_w(hyp3, no_drift, 0.75, a=0.1)
    assert not w.certificate.passed
    assert not w.certificate["a_range"].passed


def test_w_default_a_is_vertex(hyp3, no_drift):
    assert build_w(hyp3, no_drift, 0.75).a == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(l1=st.floats(0.05, 0.95), l2=st.floats(0.05, 0.95))
def test_w_margin_monotone_in_lambda(hyp3, no_drift, l1, l2):
    lo, hi = sorted((l1, l2))
    r = defect_grid(30.0, 256)
    w = WBarrier(1.0, 0.75, 2.0)
    d_lo = stationary_defect(w, hyp3, no_drift, lo, r)
    d_hi = stationary_defect(w, hyp3, no_drift, hi, r)
    assert np.all(d_hi <= d_lo + 1e-15)


# ---------------------------------------------------------------------------
# gaussian supersolution


def test_gaussian_super_certificate(euclid3, no_drift):
    g = build_gaussian_super(euclid3, no_drift, 2.0, 0.2)
    assert g.alpha == pytest.approx(1.3)
    assert g.certificate.passed
    r = np.linspace(0.0, 50.0, 401)[None, :]
    t = np.linspace(0.0, 10.0, 41)[:, None]
    assert float(np.min(parabolic_defect(g, euclid3, no_drift, 2.0, r, t))) >= -1e-12


@pytest.mark.parametrize("p, eps", [(5.0 / 3.0, 0.2), (1.5, 0.2), (2.0, 1.5), (2.0, 0.0)])
def test_gaussian_super_errors(euclid3, no_drift, p, eps):
    with pytest.raises(ParameterError):
        build_gaussian_super(euclid3, no_drift, p, eps)


def test_gaussian_super_critical_exponent_message(euclid3, no_drift):
    with pytest.raises(ParameterError, match=r"p > 1 \+ 2/\(n \+ nu\)"):
        build_gaussian_super(euclid3, no_drift, 5.0 / 3.0, 0.2)
