import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import airy

from hyperairy import (AirySpec, AngleForm, Branch, BranchIndex, EvalMethod, HyperAirySpec,
                       IndexOutOfRange, InvalidSpec, MethodInadmissible, NonConvergent,
                       PreconditionViolated,
                       Side, eval_best, eval_hyper_airy, eval_scorer, eval_solution,
                       halfline_integral, halfline_integral_numeric, integral_base,
                       integral_rotated, solution_indices)
from hyperairy.airy import hyper_airy_as_solution, hyper_airy_at_zero, rotated_admissible

from conftest import AI0, PI_AI0, gaussian

AI, BI = BranchIndex(1, Branch.MINUS), BranchIndex(1, Branch.PLUS)
ROUTES = [EvalMethod.SERIES, EvalMethod.INTEGRAL_BASE, EvalMethod.AUTO]


@pytest.mark.parametrize("method", ROUTES)
def test_gaussian_all_routes(method):
    spec, idx = AirySpec(2, -1), BranchIndex(1, Branch.PLUS)
    for x in np.linspace(-2, 2, 11):
        r = eval_solution(spec, idx, x, method)
        assert r.value == pytest.approx(gaussian(x), rel=1e-11)


@pytest.mark.parametrize("method", ROUTES)
@pytest.mark.parametrize("x", [-2.0, -0.5, 0.0, 1.0, 2.0])
def test_classical_airy_routes(method, x):
    ai, _, bi, _ = airy(x)
    spec = AirySpec(3, -1)
    assert eval_solution(spec, AI, x, method).value == pytest.approx(math.pi * ai, abs=1e-11)
    assert eval_solution(spec, BI, x, method).value == pytest.approx(math.pi * bi, rel=1e-11)


def test_positive_c_is_reflection():
    spec = AirySpec(3, 1)
    for x in (-2.0, 0.5, 1.5):
        ai, _, bi, _ = airy(-x)
        assert eval_best(spec, AI, x) == pytest.approx(math.pi * ai, abs=1e-12)
        assert eval_best(spec, BI, x) == pytest.approx(math.pi * bi, rel=1e-12)


@pytest.mark.parametrize("x", [-30.0, -8.0, 6.0])
def test_eval_best_far_field(x):
    ai, _, bi, _ = airy(x)
    spec = AirySpec(3, -1)
    assert eval_best(spec, AI, x) == pytest.approx(math.pi * ai, abs=1e-11)


def test_rotated_forms():
    spec = AirySpec(3, -1)
    assert rotated_admissible(spec, AI, -3.0, AngleForm.ROTATED_LOWER)
    r = integral_rotated(spec, AI, -3.0, AngleForm.ROTATED_LOWER)
    assert r.value == pytest.approx(math.pi * airy(-3.0)[0], abs=1e-11)
    assert not rotated_admissible(spec, AI, -3.0, AngleForm.ROTATED_UPPER)
    with pytest.raises(MethodInadmissible):
        integral_rotated(spec, AI, -3.0, AngleForm.ROTATED_UPPER)


def test_base_derivative():
    spec = AirySpec(3, -1)
    r = integral_base(spec, AI, 0.8, derivative=1)
    assert r.value == pytest.approx(math.pi * airy(0.8)[1], abs=1e-11)


@pytest.mark.parametrize("n,c", [(4, -1), (4, 1), (5, 1), (6, -1), (6, 1)])
def test_series_and_base_agree(n, c):
    spec = AirySpec(n, c)
    for idx in solution_indices(spec):
        for x in (-1.5, 0.0, 2.0):
            s = eval_solution(spec, idx, x, EvalMethod.SERIES)
            b = eval_solution(spec, idx, x, EvalMethod.INTEGRAL_BASE)
            assert abs(s.value - b.value) <= s.abs_error + b.abs_error + 1e-13


def test_case_b_f_is_complex():
    # n even, c > 0: the plus family carries a complex part
    spec = AirySpec(4, 1)
    v = eval_solution(spec, BranchIndex(1, Branch.PLUS), 0.5, EvalMethod.SERIES).value
    assert isinstance(v, complex)


def test_index_checked():
    with pytest.raises(IndexOutOfRange):
        eval_solution(AirySpec(3, -1), BranchIndex(2, Branch.MINUS), 0.0)


# hyper-Airy

def test_hyper_airy_zero_values():
    assert hyper_airy_at_zero(3) == pytest.approx(AI0, rel=1e-15)
    assert hyper_airy_at_zero(2.5) == pytest.approx(0.32963745067777056, rel=1e-14)
    for route in ("oscillatory", "damped"):
        assert eval_hyper_airy(2.5, 0.0, route=route) == pytest.approx(0.32963745067777056, abs=1e-12)


def test_hyper_airy_fractional_frozen():
    # 20-digit reference from a high-precision oscillatory quadrature
    for route in ("oscillatory", "damped"):
        assert eval_hyper_airy(2.5, 0.7, route=route) == pytest.approx(0.16065066471758005, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(x=st.floats(-4, 4))
def test_hyper_airy_three_is_ai(x):
    assert eval_hyper_airy(3, x) == pytest.approx(airy(x)[0], abs=1e-11)


@pytest.mark.parametrize("alpha", [3, 5, 7])
def test_hyper_airy_is_a_solution(alpha):
    spec, idx, form = hyper_airy_as_solution(alpha)
    for x in (-1.0, 0.0, 1.5):
        assert eval_best(spec, idx, x) == pytest.approx(math.pi * eval_hyper_airy(alpha, x), abs=1e-11)


def test_hyper_airy_validation():
    with pytest.raises(InvalidSpec):
        HyperAirySpec(1.0)
    with pytest.raises(InvalidSpec):
        HyperAirySpec(4)
    assert HyperAirySpec(5).beta == 1 and HyperAirySpec(3).beta == -1


# Scorer-type

@pytest.mark.parametrize("x,f,g", [
    (-1.0, 0.69325401557131113883, 0.36653658073519362302),
    (0.0, 1.2878993168540690872, -0.6439496584270345436),
    (1.0, 3.0542725731775937193, -0.73896052249732478283),
])
def test_scorer_classical(x, f, g):
    spec = AirySpec(3, -1)
    assert eval_scorer(spec, "F", x).value == pytest.approx(f, abs=1e-12)
    assert eval_scorer(spec, "G", x, k=1).value == pytest.approx(g, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_scorer_top_derivative_at_zero_is_one(n):
    v = eval_scorer(AirySpec(n, -1), "F", 0.0, derivative=n - 1).value
    assert v == pytest.approx(1.0, abs=1e-12)


# half-line integrals

@pytest.mark.parametrize("n,c,theta,side,expected", [
    (3, -1, 2 * math.pi / 3, Side.POSITIVE, math.pi / 3),
    (5, -1, 2 * math.pi / 3, Side.POSITIVE, math.pi / 3),
    (3, 1, math.pi / 3, Side.POSITIVE, math.pi / 3),
    (3, -1, math.pi / 3, Side.NEGATIVE, math.pi / 3),
    (3, 2, math.pi / 2, Side.BOTH, math.pi / 2),
])
def test_halfline(n, c, theta, side, expected):
    spec = AirySpec(n, c)
    assert halfline_integral(spec, theta, side) == pytest.approx(expected, rel=1e-15)
    assert halfline_integral_numeric(spec, theta, side, 1e-9) == pytest.approx(expected, abs=1e-7)


def test_halfline_preconditions():
    with pytest.raises(PreconditionViolated):
        halfline_integral(AirySpec(5, -1), 2 * math.pi / 5, Side.POSITIVE)
    with pytest.raises(PreconditionViolated):
        halfline_integral(AirySpec(4, 1), math.pi / 4, Side.POSITIVE)
    with pytest.raises(PreconditionViolated):
        halfline_integral(AirySpec(4, -1), math.pi / 2, Side.NEGATIVE)


def test_explicit_route_reports_failure():
    with pytest.raises(NonConvergent):
        eval_solution(AirySpec(3, -1), AI, -30.0, EvalMethod.INTEGRAL_BASE)


def test_auto_falls_back_to_rotated():
    r = eval_solution(AirySpec(3, -1), AI, -30.0)
    assert r.method in (EvalMethod.INTEGRAL_ROTATED_LOWER, EvalMethod.INTEGRAL_ROTATED_UPPER)
    assert r.value == pytest.approx(math.pi * airy(-30.0)[0], abs=1e-11)
    assert r.abs_error <= 1e-12


def test_quartic_full_line_value():
    # int over R of e^{-w^4/4}
    v = eval_solution(AirySpec(4, -1), BranchIndex(2, Branch.PLUS), 0.0).value
    assert v == pytest.approx(2 * math.gamma(0.25) * 4 ** (-0.75), rel=1e-14)
