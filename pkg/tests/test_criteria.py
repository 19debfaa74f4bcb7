from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fujitalab.barriers import PhiBarrier, build_phi, build_w
from fujitalab.criteria import (MASS_RTOL, envelope, exponent_ranges, find_small_a, kaplan_threshold, mass_test,
                                ode_blowup_time, ode_blowup_time_numeric, weighted_mass)
from fujitalab.errors import DomainError, ParameterError, UsageError
from fujitalab.geometry import integrate_radial, make_model_manifold
from fujitalab.initial_data import Constant, ConstantOnBall, Gaussian
from fujitalab.verification import random_ode_triples


@pytest.fixture(scope="module")
def phi(hyp3, no_drift):
    return build_phi(hyp3, no_drift, 5.0, R0=2.0)


# ---------------------------------------------------------------------------
# Kaplan threshold and mass test


@pytest.mark.parametrize("lam, p, thr", [(1.0, 2.0, 1.0), (4.0, 3.0, 2.0), (0.6, 2.0, 0.6)])
def test_kaplan_threshold(lam, p, thr):
    assert kaplan_threshold(lam, p) == pytest.approx(thr, rel=1e-15)


@pytest.mark.parametrize("p", [1.0, 0.5])
def test_kaplan_threshold_domain(p):
    with pytest.raises(DomainError):
        kaplan_threshold(1.0, p)


def test_mass_of_threshold_constant(hyp3, phi):
    thr = kaplan_threshold(5.0, 2.0)
    v = mass_test(Constant(thr), phi, hyp3, 5.0, 2.0)
    assert v.mass == pytest.approx(thr, rel=1e-12)
    assert not v.predicts_blowup
    assert v.ode_blowup_time == math.inf


def test_mass_of_twice_threshold(hyp3, phi):
    thr = kaplan_threshold(5.0, 2.0)
    v = mass_test(Constant(2 * thr), phi, hyp3, 5.0, 2.0)
    assert v.predicts_blowup
    assert v.mass == pytest.approx(2 * thr, rel=1e-12)
    assert v.ode_blowup_time == pytest.approx(ode_blowup_time(2 * thr, 5.0, 2.0), rel=1e-10)


def test_verdict_dict(hyp3, phi):
    d = mass_test(Constant(1.0), phi, hyp3, 5.0, 2.0).to_dict()
    assert set(d) == {"mass", "threshold", "predicts_blowup", "ode_blowup_time", "parameters"}
    assert d["ode_blowup_time"] is None
    assert d["parameters"] == {"lambda": 5.0, "p": 2.0}


def test_mass_needs_normalization(hyp3):
    with pytest.raises(UsageError):
        weighted_mass(Constant(1.0), PhiBarrier(2.0, 1.0), hyp3)


def test_gaussian_crossing_amplitude(hyp3, phi):
    thr = kaplan_threshold(5.0, 2.0)
    amps = np.geomspace(1e-2, 1e3, 12)
    masses = [weighted_mass(Gaussian(a), phi, hyp3) for a in amps]
    assert np.all(np.diff(masses) > 0)
    lo, hi = 1e-2, 1e4
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if mass_test(Gaussian(mid), phi, hyp3, 5.0, 2.0).predicts_blowup:
            hi = mid
        else:
            lo = mid
    # independent quadrature: c * int e^{-r^2} phi dmu
    unit = phi.normalization * integrate_radial(lambda r: np.exp(-r * r) * phi.value(r), hyp3, 12.0,
                                                panels=256, breakpoints=phi.breakpoints())
    assert hi == pytest.approx(thr / unit, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(scale=st.floats(0.1, 10.0), amp=st.floats(0.1, 50.0))
def test_mass_scale_invariance(hyp3, no_drift, phi, scale, amp):
    scaled = build_phi(hyp3, no_drift, 5.0, R0=2.0, C1=scale, a1=phi.a1)
    u0 = ConstantOnBall(amp, 3.0)
    assert weighted_mass(u0, scaled, hyp3) == pytest.approx(weighted_mass(u0, phi, hyp3), rel=1e-11)
    assert mass_test(u0, scaled, hyp3, 5.0, 2.0).predicts_blowup == mass_test(u0, phi, hyp3, 5.0, 2.0).predicts_blowup


def test_strict_inequality_tolerance():
    assert 0 < MASS_RTOL <= 1e-10


# ---------------------------------------------------------------------------
# ODE blow-up time


def test_ode_blowup_examples():
    assert ode_blowup_time(1.0, 0.0, 2.0) == pytest.approx(1.0, rel=1e-15)
    assert ode_blowup_time(2.0, 1.0, 2.0) == pytest.approx(math.log(2.0), rel=1e-14)
    assert ode_blowup_time(0.5, 1.0, 2.0) == math.inf
    assert ode_blowup_time_numeric(2.0, 1.0, 2.0) == pytest.approx(0.6931, abs=1e-4)


def test_ode_closed_form_matches_integration():
    worst = max(abs(ode_blowup_time(*t) / ode_blowup_time_numeric(*t) - 1) for t in random_ode_triples())
    assert worst < 5e-3


@settings(max_examples=40, deadline=None)
@given(ratio=st.floats(1.01, 100.0), lam=st.one_of(st.just(0.0), st.floats(1e-3, 10.0)), p=st.floats(1.05, 4.0))
def test_ode_closed_form_property(ratio, lam, p):
    m0 = ratio * (kaplan_threshold(lam, p) if lam > 0 else 1.0)
    assert ode_blowup_time(m0, lam, p) == pytest.approx(ode_blowup_time_numeric(m0, lam, p), rel=5e-3)


# ---------------------------------------------------------------------------
# exponent ranges


def test_exponent_ranges_euclidean_consistency():
    er = exponent_ranges(3, 1.0, 0.0)
    assert er.fujita_nonexistence_upper == 5 / 3
    assert er.existence_lower == 5 / 3
    assert er.euclidean_consistent


def test_exponent_ranges_examples():
    assert exponent_ranges(3, 2.0, 0.0).fujita_nonexistence_upper == pytest.approx(1.4, rel=1e-15)
    assert exponent_ranges(4, 1.0, -1.0).existence_lower == pytest.approx(5 / 3, rel=1e-15)


@pytest.mark.parametrize("args", [(3, 1.0, -3.0), (3, 1.0, 0.5), (1, 1.0, 0.0), (3, 0.5, 0.0)])
def test_exponent_ranges_domain(args):
    with pytest.raises(DomainError):
        exponent_ranges(*args)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 10), gamma=st.floats(1.0, 10.0), frac=st.floats(0.0, 0.99))
def test_exponent_bounds_exceed_one(n, gamma, frac):
    er = exponent_ranges(n, gamma, -frac * n)
    assert er.fujita_nonexistence_upper > 1 and er.existence_lower > 1


# ---------------------------------------------------------------------------
# small-a search


@pytest.mark.parametrize("amp", [1e-2, 1e-1, 1.0])
def test_small_a_certifies_below_fujita(euclid3, amp):
    res = find_small_a(ConstantOnBall(amp, 1.0), euclid3, 0.0, 0.0, 1.0, 1.5, 3, 1.0)
    assert res.certified and res.a > 0
    assert res.verdict.predicts_blowup
    assert res.lam == pytest.approx(2 * res.a * 3, rel=1e-12)


def test_small_a_inconclusive_above_fujita(euclid3):
    res = find_small_a(ConstantOnBall(1e-2, 1.0), euclid3, 0.0, 0.0, 1.0, 1.8, 3, 1.0)
    assert res.status == "inconclusive" and not res.certified


def test_small_a_rejects_zero_datum(euclid3):
    with pytest.raises(DomainError):
        find_small_a(ConstantOnBall(0.0, 1.0), euclid3, 0.0, 0.0, 1.0, 1.5, 3, 1.0)


def test_small_a_needs_zero_c_hat(euclid3):
    with pytest.raises(ParameterError):
        find_small_a(ConstantOnBall(1.0, 1.0), euclid3, 0.0, 0.5, 1.0, 1.5, 3, 1.0)


# ---------------------------------------------------------------------------
# envelope


@pytest.fixture(scope="module")
def w_steep(no_drift):
    return build_w(make_model_manifold("hyperbolic", 3, 1.5), no_drift, 1.0, a=1.5)


def test_envelope_examples(w_steep):
    env = envelope(1.0, 2.0, 0.5, w_steep)
    assert env.xi(0.0) == 1.0
    assert env.xi_inf == pytest.approx(2.0, rel=1e-15)
    r = np.linspace(0, 5, 11)
    np.testing.assert_allclose(env.value(r, 0.0), 0.5 * w_steep.value(r), rtol=1e-15)
    assert env.value(0.0, 50.0) < 1e-20
    assert np.all(np.diff(env.value(r, 3.0)) <= 0)


@pytest.mark.parametrize("c_tilde", [1.0, 1.5, 0.0])
def test_envelope_smallness(w_steep, c_tilde):
    with pytest.raises(ParameterError):
        envelope(1.0, 2.0, c_tilde, w_steep)


def test_envelope_needs_w(hyp3, phi):
    with pytest.raises(UsageError):
        envelope(1.0, 2.0, 0.5, phi)


def test_envelope_supersolution(hyp3, no_drift):
    w = build_w(hyp3, no_drift, 0.75, a=1.0)
    env = envelope(0.75, 2.0, 0.675, w)
    r = np.linspace(1e-3, 30.0, 600)[None, :]
    t = np.linspace(0.0, 10.0, 41)[:, None]
    assert float(np.min(env.supersolution_defect(hyp3, no_drift, r, t))) >= -1e-10


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(0.05, 5.0), p=st.floats(1.1, 4.0), frac=st.floats(0.01, 0.99),
       t1=st.floats(0.0, 50.0), t2=st.floats(0.0, 50.0))
def test_xi_monotone_and_bounded(w_steep, lam, p, frac, t1, t2):
    env = envelope(lam, p, frac * kaplan_threshold(lam, p), w_steep)
    lo, hi = sorted((t1, t2))
    assert env.xi(lo) <= env.xi(hi) * (1 + 1e-14)
    assert env.xi(hi) <= env.xi_inf * (1 + 1e-14)
