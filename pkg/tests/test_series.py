import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import airy

from hyperairy import (AirySpec, Branch, BranchIndex, TruncationTooSmall, eval_series,
                       series_coefficients, series_derivative, series_eval, solution_indices)
from hyperairy.series import (cauchy_product, check_recurrence_exact, derivative_at_zero,
                              exact_derivative_ratios, recurrence_defect, tail_majorant)

from conftest import PI_AI0, gaussian

AI, BI = BranchIndex(1, Branch.MINUS), BranchIndex(1, Branch.PLUS)


def test_value_at_zero_is_pi_ai0():
    v = derivative_at_zero(AirySpec(3, -1), AI, 0)
    assert v == pytest.approx(PI_AI0, rel=1e-15)
    assert v == pytest.approx(math.sin(2 * math.pi / 3) * math.gamma(1 / 3) * 3 ** (-2 / 3), rel=1e-14)


def test_gaussian_coefficients():
    exp = series_coefficients(AirySpec(2, -1), BranchIndex(1, Branch.PLUS), 20)
    # sqrt(2 pi) e^{x^2/2}: only even powers, 1/(2^j j!)
    ref = [math.sqrt(2 * math.pi) / (2 ** (j // 2) * math.factorial(j // 2)) if j % 2 == 0 else 0.0
           for j in range(21)]
    np.testing.assert_allclose(exp.coefficients, ref, rtol=1e-14, atol=1e-300)


@pytest.mark.parametrize("x", [-3.0, -1.0, 0.0, 0.7, 2.5])
def test_against_scipy_airy(x):
    ai, aip, bi, bip = airy(x)
    spec = AirySpec(3, -1)
    assert eval_series(spec, AI, x).value == pytest.approx(math.pi * ai, rel=1e-12, abs=1e-13)
    assert eval_series(spec, BI, x).value == pytest.approx(math.pi * bi, rel=1e-12)
    assert eval_series(spec, AI, x, m=1).value == pytest.approx(math.pi * aip, rel=1e-11, abs=1e-13)


def test_gaussian_series():
    xs = np.linspace(-2, 2, 9)
    vals = [eval_series(AirySpec(2, -1), BranchIndex(1, Branch.PLUS), x).value for x in xs]
    np.testing.assert_allclose(vals, gaussian(xs), rtol=1e-13)


@pytest.mark.parametrize("n,c", [(3, -1), (4, 1), (5, -1), (6, 1), (5, 2)])
def test_recurrence_exact(n, c):
    spec = AirySpec(n, c)
    for idx in solution_indices(spec):
        assert check_recurrence_exact(spec, idx, 40)
        assert recurrence_defect(spec, idx, 40) < 1e-12


def test_exact_ratios_reproduce_floats():
    spec = AirySpec(4, -1)
    idx = BranchIndex(1, Branch.PLUS)
    for j, (rho, r) in enumerate(exact_derivative_ratios(spec, idx, 15)):
        base = derivative_at_zero(spec, idx, r - 1)
        assert float(rho) * base == pytest.approx(derivative_at_zero(spec, idx, j), rel=1e-12, abs=1e-300)


def test_truncation_too_small():
    with pytest.raises(TruncationTooSmall):
        series_coefficients(AirySpec(5, -1), AI, 3)
    exp = series_coefficients(AirySpec(3, -1), AI, 10)
    with pytest.raises(TruncationTooSmall):
        series_derivative(exp, 9)


def test_tail_majorant_bounds_truncation_error():
    spec = AirySpec(3, -1)
    ref = series_eval(series_coefficients(spec, AI, 120), 2.0).value
    for J in (10, 20, 30, 40):
        err = abs(series_eval(series_coefficients(spec, AI, J), 2.0).value - ref)
        assert err <= tail_majorant(spec, J, 2.0) + 1e-14


def test_tail_majorant_decreases():
    spec = AirySpec(4, 1)
    bounds = [tail_majorant(spec, J, 1.5) for J in range(10, 60, 5)]
    assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))


def test_cancellation_flag():
    v = eval_series(AirySpec(3, -1), AI, 12.0)
    assert v.cancellation_ratio > 1e8
    assert v.low_confidence


def test_cauchy_product_matches_pointwise_product():
    spec = AirySpec(3, -1)
    a = series_coefficients(spec, AI, 60)
    b = series_coefficients(spec, BI, 60)
    p = cauchy_product(a, b)
    for x in (-1.0, 0.3, 1.2):
        assert series_eval(p, x).value == pytest.approx(
            series_eval(a, x).value * series_eval(b, x).value, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-3, 3), n=st.integers(3, 6), neg=st.booleans(), pick=st.integers(0, 10))
def test_series_satisfies_ode(x, n, neg, pick):
    spec = AirySpec(n, -1 if neg else 1)
    idxs = solution_indices(spec)
    idx = idxs[pick % len(idxs)]
    y = eval_series(spec, idx, x, 1e-13)
    d = eval_series(spec, idx, x, 1e-13, m=n - 1)
    scale = 1 + abs(y.value) * abs(x) + abs(d.value)
    assert abs(d.value + spec.cf * x * y.value) <= 1e-10 * scale


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-2, 2), m=st.integers(0, 3))
def test_termwise_derivative_commutes(x, m):
    spec = AirySpec(5, -1)
    idx = BranchIndex(2, Branch.PLUS)
    exp = series_coefficients(spec, idx, 80)
    direct = series_eval(series_derivative(exp, m + 1), x).value
    stepwise = series_eval(series_derivative(series_derivative(exp, m), 1), x).value
    assert direct == pytest.approx(stepwise, rel=1e-12, abs=1e-12)
