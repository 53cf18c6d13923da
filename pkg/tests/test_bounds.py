import math

from hypothesis import given, strategies as st
import mpmath as mp
import numpy as np
import pytest

from anderson_bernoulli.bounds import (evaluate_bounds, finite_lower_bound_coeff,
                                       fit_lifschitz_exponent, log_lower_bound_ids,
                                       log_upper_bound_ids, longest_run_exact_probability,
                                       longest_run_limit_probability, longest_run_threshold,
                                       lower_bound_ids, upper_bound_ids)

mp.mp.dps = 50


def mp_lower(eps, p):
    p, eps = mp.mpf(p), mp.mpf(eps)
    x = mp.pi / mp.sqrt(eps)
    return (1 - p) * p**x / (1 - p**x)


def mp_upper(eps, p, b, C=0):
    p, eps, b = mp.mpf(p), mp.mpf(eps), mp.mpf(b)
    x = mp.pi / mp.sqrt(eps)
    return (1 - p) * p**(x - mp.pi**2 / b) / (p**2 * (1 - p**(x + C * mp.sqrt(eps))))


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.7, 0.95])
@pytest.mark.parametrize("eps", [1e-4, 1e-3, 0.01, 0.1, 0.3, 1.0, math.pi**2])
def test_bounds_match_high_precision(p, eps):
    assert lower_bound_ids(eps, p) == pytest.approx(float(mp_lower(eps, p)), rel=1e-12)
    assert upper_bound_ids(eps, p, b=1.0) == pytest.approx(float(mp_upper(eps, p, 1.0)), rel=1e-12)
    assert upper_bound_ids(eps, p, b=4.0, C=2.5) == pytest.approx(
        float(mp_upper(eps, p, 4.0, 2.5)), rel=1e-12)


def test_log_bounds_survive_underflow():
    eps = 1e-6
    assert lower_bound_ids(eps, 0.5) == 0.0
    exact = mp.log(mp_lower(eps, 0.5))
    assert log_lower_bound_ids(eps, 0.5) == pytest.approx(float(exact), rel=1e-12)
    assert evaluate_bounds([eps], 0.5, 1.0).underflow.tolist() == [True]


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_collapse_at_pi_squared(p):
    assert lower_bound_ids(math.pi**2, p) == pytest.approx(p, rel=1e-14)


def test_monotone_vanishing_at_zero():
    eps = np.geomspace(1e-3, 1.0, 50)
    vals = lower_bound_ids(eps, 0.5)
    assert np.all(np.diff(vals) > 0)
    assert 0.0 < lower_bound_ids(1e-5, 0.5) < 1e-290
    assert lower_bound_ids(1e-6, 0.5) == 0.0


@given(st.floats(1e-3, 9.0), st.floats(0.05, 0.95), st.floats(0.2, 20.0))
def test_upper_lower_ratio(eps, p, b):
    ratio = math.exp(log_upper_bound_ids(eps, p, b=b) - log_lower_bound_ids(eps, p))
    assert ratio == pytest.approx(p ** (-math.pi**2 / b) / p**2, rel=1e-10)


def test_infinite_barrier():
    for eps in [0.01, 0.1, 1.0]:
        assert upper_bound_ids(eps, 0.4, b=math.inf) == pytest.approx(
            lower_bound_ids(eps, 0.4) / 0.4**2, rel=1e-13)


def test_free_lattice_limit():
    # p -> 1: both bounds tend to sqrt(eps)/pi
    for eps in [0.01, 0.2]:
        assert lower_bound_ids(eps, 1.0) == pytest.approx(math.sqrt(eps) / math.pi, rel=1e-14)
        assert lower_bound_ids(eps, 1 - 1e-9) == pytest.approx(math.sqrt(eps) / math.pi, rel=1e-6)


def test_exponent_approach_is_monotone():
    # sqrt(eps) log(bound) = pi log p + sqrt(eps) log(prefactor); the prefactor gap
    # shrinks like sqrt(eps) and the approach is monotone for both bounds.
    p, b = 0.5, 1.0
    eps = np.geomspace(0.3, 1e-6, 40)
    target = math.pi * math.log(p)
    lo_gap = np.abs(np.sqrt(eps) * log_lower_bound_ids(eps, p) - target)
    up_gap = np.abs(np.sqrt(eps) * log_upper_bound_ids(eps, p, b=b) - target)
    assert np.all(np.diff(lo_gap) < 0) and np.all(np.diff(up_gap) < 0)
    # closed-form gaps at eps = 1e-4
    e = 1e-4
    assert np.sqrt(e) * log_lower_bound_ids(e, p) - target == pytest.approx(
        math.sqrt(e) * math.log(1 - p), rel=1e-6)
    assert np.sqrt(e) * log_upper_bound_ids(e, p, b=b) - target == pytest.approx(
        math.sqrt(e) * (math.log(1 - p) - (math.pi**2 / b + 2) * math.log(p)), rel=1e-6)


@pytest.mark.xfail(strict=True, reason="prefactor gap at eps=1e-4 is 0.0069 (lower) and 0.075 "
                                       "(upper) for p=0.5, b=1; see decisions ledger")
def test_exponent_within_1e_3_at_eps_1e_4():
    target = math.pi * math.log(0.5)
    e = 1e-4
    assert abs(math.sqrt(e) * log_lower_bound_ids(e, 0.5) - target) <= 1e-3
    assert abs(math.sqrt(e) * log_upper_bound_ids(e, 0.5, b=1.0) - target) <= 1e-3


@pytest.mark.xfail(strict=True, reason="relative gap at eps=0.1 is sqrt(0.1) log q/(pi log p) "
                                       "= 0.1005 for p=0.5; see decisions ledger")
def test_lower_exponent_within_10_percent_at_eps_0_1():
    val = float(mp.log(mp_lower(0.1, 0.5)))
    assert abs(math.sqrt(0.1) * val / (math.pi * math.log(0.5)) - 1) <= 0.10


def test_finite_lower_coefficient():
    p, eps = 0.5, 0.1
    assert finite_lower_bound_coeff(eps, p, ell0=0) == 0.0
    vals = [finite_lower_bound_coeff(eps, p, ell0=l) for l in range(0, 30)]
    assert np.all(np.diff(vals) >= 0)
    assert vals[-1] == pytest.approx(lower_bound_ids(eps, p) / p, rel=1e-12)
    assert max(vals) <= lower_bound_ids(eps, p) / p * (1 + 1e-15)
    assert finite_lower_bound_coeff(eps, 1.0, ell0=10) == 0.0
    with pytest.raises(ValueError):
        finite_lower_bound_coeff(eps, p, ell0=-1)


def test_longest_run_law():
    assert longest_run_limit_probability(1.0) == pytest.approx(1 - 1 / math.e, rel=1e-15)
    assert longest_run_limit_probability(50.0) == pytest.approx(1.0)
    assert longest_run_threshold(1.0, 10**5, 0.5) == pytest.approx(math.log(1e5) / math.log(2))
    # exact finite-n law by direct evaluation
    thr = longest_run_threshold(1.0, 10**5, 0.5)
    assert longest_run_exact_probability(1.0, 10**5, 0.5) == pytest.approx(
        1 - (1 - 0.5 ** math.floor(thr)) ** 10**5, rel=1e-12)


def test_fit_exact_loglinear():
    eps = np.array([0.05, 0.07, 0.1, 0.15, 0.2, 0.3])
    fit = fit_lifschitz_exponent(epsilons=eps, ids=0.5 ** (math.pi / np.sqrt(eps)))
    assert abs(fit.slope - math.pi * math.log(0.5)) < 1e-10
    assert fit.points == 6


def test_fit_with_prefactor_converges():
    target = math.pi * math.log(0.5)
    errs = []
    for top in [1.0, 0.1, 0.01, 0.001]:
        eps = np.geomspace(top / 10, top, 8)
        errs.append(abs(fit_lifschitz_exponent(epsilons=eps, ids=lower_bound_ids(eps, 0.5)).slope
                        - target))
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_fit_needs_three_points():
    with pytest.raises(ValueError):
        fit_lifschitz_exponent(epsilons=[0.1, 0.2, 0.3], ids=[0.0, 0.1, 0.2])
