import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import airy

from hyperairy import (GridFunction, GridShape, GridTooCoarse, HeatSpec, HeatTerm, InvalidSpec,
                       MomentOverflow, MomentQuery, SignConditionViolated, UnsupportedSpec,
                       heat_convolution_grid, heat_eval, moment_closed_form, moment_numeric,
                       sum_moments)
from hyperairy.heat import (Kernel, SmoothInterpolant, fourier_symbol, grid_transform,
                            moment_of_order, resolvable_frequencies, scaling_eval)

S3 = 3 ** (1 / 3)


def cubic_solution(x, t=1.0):
    """Single third-order term with a = 1: a reflected, rescaled Airy function."""
    s = (3 * t) ** (1 / 3)
    return airy(-x / s)[0] / s


@pytest.mark.parametrize("x", [-3.0, 0.0, 0.5, 2.0])
def test_single_cubic_term(x):
    assert heat_eval(HeatSpec.single(1, 3, 1), x) == pytest.approx(cubic_solution(x), abs=1e-11)


def test_scaling_form_is_reflection():
    for x in (-1.0, 0.5):
        assert scaling_eval(3, 1, x) == pytest.approx(cubic_solution(-x), abs=1e-11)


@pytest.mark.parametrize("t,a", [(0.5, 1.0), (1.0, 2.0), (2.0, 0.25)])
def test_second_order_is_gaussian(t, a):
    spec = HeatSpec((HeatTerm(a, 2),), t)
    for x in (0.0, 0.7, 2.0):
        ref = math.exp(-x * x / (4 * t * a)) / math.sqrt(4 * math.pi * t * a)
        assert heat_eval(spec, x) == pytest.approx(ref, abs=1e-11)


def test_sign_condition():
    with pytest.raises(SignConditionViolated):
        HeatSpec((HeatTerm(-1, 2),), 1)
    with pytest.raises(SignConditionViolated):
        HeatSpec((HeatTerm(1, 4),), 1)
    # only the top even order is constrained by default
    HeatSpec((HeatTerm(-1, 2), HeatTerm(-1, 4)), 1)
    with pytest.raises(SignConditionViolated):
        HeatSpec((HeatTerm(-1, 2), HeatTerm(-1, 4)), 1, strict_even=True)


def test_term_validation():
    with pytest.raises(InvalidSpec):
        HeatTerm(1, 1.0)
    with pytest.raises(InvalidSpec):
        HeatTerm(0, 3)
    with pytest.raises(InvalidSpec):
        HeatTerm(1, 3, beta=1)
    assert HeatTerm(1, 5).beta == 1


def test_kernel_matches_pointwise():
    spec = HeatSpec.single(2, 5, 0.5)
    (al, kappa), = spec.phase_coefficients().items()
    k = Kernel(al, kappa)
    for x in (-2.0, 0.3, 1.7):
        assert k(x) == pytest.approx(heat_eval(spec, x), abs=1e-11)


def test_smooth_interpolant():
    f = SmoothInterpolant(math.sin, -5, 7, 1e-13)
    xs = np.linspace(-5, 7, 301)
    np.testing.assert_allclose(f(xs), np.sin(xs), atol=1e-12)
    with pytest.raises(InvalidSpec):
        f(np.array([8.0]))


def test_convolution_single_kernel():
    spec = HeatSpec.single(1, 3, 1)
    grid = GridShape.span(-4, 4, 0.05)
    g = heat_convolution_grid(spec, grid)
    ref = [cubic_solution(x) for x in g.xs]
    np.testing.assert_allclose(g.values, ref, atol=1e-10)


def test_convolution_fourier_and_mass():
    spec = HeatSpec(((1, 3), (1, 5)), 1)
    work = heat_convolution_grid(spec, GridShape.span(-2, 2, 0.02), return_work=True)
    assert work.work.signed_mass() == pytest.approx(1.0, abs=1e-4)
    gs = resolvable_frequencies(spec)
    assert gs.size > 10
    got = grid_transform(work.work, gs)
    want = np.array([fourier_symbol(spec, g) for g in gs])
    assert np.max(np.abs(got - want)) < 1e-4
    # pointwise route at a few grid points
    for i in (0, 100, 200):
        x = work.output.xs[i]
        assert work.output.values[i] == pytest.approx(heat_eval(spec, x), abs=1e-9)


def test_convolution_rejects_even_and_coarse():
    with pytest.raises(UnsupportedSpec):
        heat_convolution_grid(HeatSpec((HeatTerm(1, 2),), 1), GridShape.span(-1, 1, 0.01))
    with pytest.raises(GridTooCoarse):
        heat_convolution_grid(HeatSpec.single(1, 3, 1), GridShape.span(-1, 1, 0.5))


def test_grid_serialization():
    g = GridFunction(0.0, 0.5, np.array([1.0, 2.0, 3.0]), 1.0)
    assert g.signed_mass() == 3.0
    assert g.to_csv().splitlines() == ["x,value", "0.0,1.0", "0.5,2.0", "1.0,3.0"]
    assert json.loads(g.to_json())["values"] == [1.0, 2.0, 3.0]
    with pytest.raises(InvalidSpec):
        GridShape(0.0, 0.0, 5)


# moments

def test_moment_plug_in_value():
    q = MomentQuery(1, 1, 1, 1, "odd")
    assert moment_closed_form(q, exact=True) == 6
    assert moment_numeric(q.to_heat_spec(), 3, exact=True) == 6


@pytest.mark.parametrize("parity,mmax,kmax", [("odd", 3, 3), ("even", 3, 2)])
def test_moments_closed_equals_numeric(parity, mmax, kmax):
    for m in range(1, mmax + 1):
        for k in range(0, kmax + 1):
            a = 1 if parity == "odd" else (-1) ** (m + 1)
            q = MomentQuery(m, k, Fraction(a), Fraction(1, 2), parity)
            assert moment_closed_form(q, exact=True) == moment_numeric(q.to_heat_spec(), q.order, exact=True)


def test_moments_vanish_off_multiples():
    spec = MomentQuery(2, 1, 1, 1).to_heat_spec()
    for h in range(1, 15):
        if h % 5:
            assert moment_numeric(spec, h, exact=True) == 0
            assert moment_of_order("odd", 2, 1, 1, h) == 0.0


def test_sum_moments_two_cubic_components():
    comps = [HeatSpec.single(-1, 3, 1), HeatSpec.single(-1, 3, 1)]
    assert sum_moments(comps, 3, exact=True) == 12
    assert sum_moments(comps, 6, exact=True) == 1440
    merged = HeatSpec(((-1, 3), (-1, 3)), 1)
    for h in range(10):
        assert sum_moments(comps, h, exact=True) == moment_numeric(merged, h, exact=True)


def test_moment_overflow():
    q = MomentQuery(3, 60, 10, 10, "odd")
    assert moment_closed_form(q, exact=True) > 10 ** 400
    with pytest.raises(MomentOverflow):
        moment_closed_form(q)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 3), k=st.integers(0, 4),
       a=st.fractions(Fraction(-3), Fraction(3)).filter(lambda v: v != 0),
       t=st.fractions(Fraction(1, 10), Fraction(3)))
def test_odd_moments_property(m, k, a, t):
    q = MomentQuery(m, k, a, t, "odd")
    assert moment_closed_form(q, exact=True) == moment_numeric(q.to_heat_spec(), q.order, exact=True)
