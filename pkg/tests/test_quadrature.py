import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import airy

from hyperairy import InvalidSpec, IntegrandSpec, NonConvergent, Shape, Strategy, Trig, integrate
from hyperairy.quadrature import (GAUSS_W, KRONROD_W, NODES, PowerIntegrand, euler_average,
                                  gk_integrate, integrate_power, truncation_point)

from conftest import PI_AI0


def test_rule_weights():
    assert KRONROD_W.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_W.sum() == pytest.approx(2.0, abs=1e-15)
    # K15 integrates polynomials of degree 22 exactly
    assert np.dot(KRONROD_W, NODES ** 22) == pytest.approx(2 / 23, rel=1e-13)


def test_gk_integrate_smooth():
    val, err, _ = gk_integrate(np.exp, 0.0, 1.0, 1e-14)
    assert val == pytest.approx(math.e - 1, rel=1e-15)
    assert err < 1e-13


@pytest.mark.parametrize("q", [0.0, 1.0, 3.5])
def test_damped_gaussian_cosine(q):
    r = integrate(IntegrandSpec(Shape.DAMPED_POWER, A=2.0, n=2.0, q=q), 1e-13)
    assert r.strategy_used is Strategy.TRUNCATED
    assert r.value == pytest.approx(math.sqrt(math.pi) / 2 * math.exp(-q * q / 4), abs=1e-13)


@pytest.mark.parametrize("x", [-4.0, -1.0, 0.0, 1.0, 3.0])
def test_airy_integral(x):
    r = integrate(IntegrandSpec(Shape.OSCILLATORY_POWER, A=1.0, n=3.0, q=x), 1e-12)
    assert r.strategy_used is Strategy.ZEROS_EULER
    assert r.value == pytest.approx(math.pi * airy(x)[0], abs=1e-11)


def test_airy_at_zero_tight():
    r = integrate(IntegrandSpec(Shape.OSCILLATORY_POWER, A=1.0, n=3.0), 1e-13)
    assert r.value == pytest.approx(PI_AI0, abs=1e-13)
    assert r.abs_error_estimate <= 1e-13


def test_exp_trig_is_complex():
    r = integrate(IntegrandSpec(Shape.DAMPED_POWER, A=1.0, n=2.0, q=1.0, trig=Trig.EXP), 1e-12)
    c = integrate(IntegrandSpec(Shape.DAMPED_POWER, A=1.0, n=2.0, q=1.0, trig=Trig.COS), 1e-12)
    s = integrate(IntegrandSpec(Shape.DAMPED_POWER, A=1.0, n=2.0, q=1.0, trig=Trig.SIN), 1e-12)
    assert isinstance(r.value, complex)
    assert r.value == pytest.approx(complex(c.value, s.value), abs=1e-12)


def test_linear_damping_frozen():
    # 30-digit reference from a panel-split high-precision quadrature
    spec = IntegrandSpec(Shape.OSCILLATORY_POWER, A=1.0, n=3.0, p=0.7, q=-2.0, trig=Trig.SIN)
    assert integrate(spec, 1e-12).value == pytest.approx(-0.835919023631596882711546559872, abs=1e-12)


def test_weight_power_matches_derivative():
    # d/dq of int cos(qw + w^3/3) is -int w sin(qw + w^3/3) = pi Ai'(q)
    spec = IntegrandSpec(Shape.OSCILLATORY_POWER, A=1.0, n=3.0, q=0.5, trig=Trig.SIN,
                         weight_power=1)
    assert -integrate(spec, 1e-11).value == pytest.approx(math.pi * airy(0.5)[1], abs=1e-10)


def test_truncation_point_bounds_tail():
    spec = IntegrandSpec(Shape.DAMPED_POWER, A=1.0, n=2.0)
    W = truncation_point(spec, 1e-10)
    tail = math.sqrt(math.pi / 2) * math.erfc(W / math.sqrt(2))
    assert tail < 1e-10


def test_euler_average_alternating():
    s = np.cumsum([(-1) ** k / (k + 1) for k in range(30)])
    est, _ = euler_average(s[-16:])
    assert est == pytest.approx(math.log(2), abs=1e-12)


def test_unreachable_tolerance_raises():
    with pytest.raises(NonConvergent):
        integrate(IntegrandSpec(Shape.OSCILLATORY_POWER, A=1.0, n=3.0, q=-30.0), 1e-16)


@pytest.mark.parametrize("kw", [
    dict(shape=Shape.DAMPED_POWER, A=0.0, n=2.0),
    dict(shape=Shape.OSCILLATORY_POWER, A=1.0, n=1.0),
    dict(shape=Shape.OSCILLATORY_POWER, A=1.0, n=3.0, p=-1.0),
    dict(shape=Shape.OSCILLATORY_POWER, A=1.0, n=3.0, q=math.nan),
])
def test_invalid_integrands(kw):
    with pytest.raises(InvalidSpec):
        IntegrandSpec(**kw)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.2, 3.0), alpha=st.floats(2.0, 4.0))
def test_scaling_identity(a, alpha):
    # int cos(w^alpha a^alpha / alpha) dw = a^{-1} int cos(s^alpha / alpha) ds
    f = PowerIntegrand(phase=((a ** alpha / alpha, alpha),))
    g = PowerIntegrand(phase=((1 / alpha, alpha),))
    lhs = integrate_power(f, 1e-11).value
    rhs = integrate_power(g, 1e-11).value / a
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-10)
