"""Evaluation of the solutions of y^(n-1) + c x y = 0 and related integrals.

Every solution, and every derivative of it, is a combination of integrals

    Re[ lam * (-c w)^d ... ] = rho * int_0^inf w^d e^{-A w^n/n - p w} cos(q w + chi) dw

with ``A = |c|^(n-1)``: the ray direction ``omega`` fixes ``p = c x Re(omega)``
and ``q = -c x Im(omega)`` and the prefactor ``lam (-c omega)^d = rho e^{i chi}``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .core import (AirySpec, AngleForm, Branch, BranchIndex, CaseClass,
                   IndexOutOfRange, InvalidSpec, MethodInadmissible,
                   NonConvergent, PreconditionViolated, angle_coefficients,
                   base_theta, check_index, classify)
from .quadrature import (PowerIntegrand, Trig, gk_integrate, integrate_power)
from .series import CANCELLATION_THRESHOLD, eval_series

EPS = np.finfo(float).eps

PI_AI_SPEC = AirySpec(3, -1)
PI_AI_INDEX = BranchIndex(1, Branch.MINUS)
"""y_1^- for n = 3, c = -1 equals pi * Ai(x) (no 1/pi rescaling is applied)."""


class EvalMethod(enum.Enum):
    SERIES = "series"
    INTEGRAL_BASE = "base"
    INTEGRAL_ROTATED_UPPER = "upper"
    INTEGRAL_ROTATED_LOWER = "lower"
    AUTO = "auto"


class Side(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    BOTH = "both"


@dataclass(frozen=True)
class EvalResult:
    value: float | complex
    abs_error: float
    method: EvalMethod
    diagnostics: dict = field(default_factory=dict)


# ------------------------------------------------------------ ray integrals

@dataclass(frozen=True)
class _Ray:
    """lam * int_0^inf e^{-A w^n/n - c x omega w} dw; real part unless complex."""

    lam: complex
    omega: complex
    take_real: bool = True


def _rays(spec: AirySpec, idx: BranchIndex | None, theta: float | None = None,
          scorer: str | None = None) -> list[tuple[float, _Ray]]:
    """Weighted rays whose sum is the requested function."""
    n = spec.n
    if scorer == "F":
        if classify(spec) is CaseClass.ODD_OR_EVEN_NEG_C:
            return [(1.0, _Ray(1.0, 1.0))]
        e = cmath.exp(1j * math.pi / n)
        return [(1.0, _Ray(e, e, take_real=False))]
    if theta is None:
        theta = base_theta(spec, idx.k)
    om = cmath.exp(-1j * theta)
    g = _Ray(om, om)
    if scorer == "G":
        return [(1.0, g)]
    if idx.branch is Branch.MINUS:
        return [(1.0, _Ray(1j * om, om))]
    return _rays(spec, None, scorer="F") + [(-1.0, g)]


def _ray_integrand(spec: AirySpec, ray: _Ray, x: float, d: int, trig: Trig):
    c = spec.cf
    pref = ray.lam * (-c * ray.omega) ** d
    rho, chi = abs(pref), cmath.phase(pref)
    p = c * x * ray.omega.real
    q = -c * x * ray.omega.imag
    f = PowerIntegrand(phase=((q, 1.0),), phi=chi,
                       damping=((spec.damping / spec.n, float(spec.n)), (p, 1.0)),
                       trig=trig, weight_power=d)
    return rho, f


def _ray_value(spec: AirySpec, ray: _Ray, x: float, d: int, tol: float):
    trig = Trig.COS if ray.take_real else Trig.EXP
    rho, f = _ray_integrand(spec, ray, x, d, trig)
    if rho == 0:
        return 0.0, 0.0, 0
    r = integrate_power(f, tol / rho)
    return rho * r.value, rho * r.abs_error_estimate, r.evaluations


def _sum_rays(spec, rays, x, d, tol):
    total, err, nev = 0.0, 0.0, 0
    share = tol / max(1, len(rays))
    for w, ray in rays:
        v, e, k = _ray_value(spec, ray, x, d, share)
        total = total + w * v
        err += abs(w) * e
        nev += k
    return total, err, nev


def integral_base(spec: AirySpec, idx: BranchIndex, x: float, tol: float = 1e-12,
                  derivative: int = 0) -> EvalResult:
    """Base (damped) integral form of y_k^(+/-) or its derivative."""
    check_index(spec, idx)
    v, e, nev = _sum_rays(spec, _rays(spec, idx), float(x), derivative, tol)
    return EvalResult(v, e, EvalMethod.INTEGRAL_BASE, {"evaluations": nev})


def rotated_admissible(spec: AirySpec, idx: BranchIndex, x: float, form: AngleForm) -> bool:
    try:
        ac = angle_coefficients(spec, idx, form)
    except IndexOutOfRange:
        return False
    return spec.cf * ac.a * x >= 0 or abs(ac.a) < 1e-15


def integral_rotated(spec: AirySpec, idx: BranchIndex, x: float, form: AngleForm,
                     tol: float = 1e-12) -> EvalResult:
    """Rotated-ray forms (oscillatory chirp with linear damping)."""
    check_index(spec, idx)
    if form is AngleForm.BASE:
        raise InvalidSpec("use integral_base for the base form")
    if not rotated_admissible(spec, idx, x, form):
        raise MethodInadmissible(
            f"rotated form {form.value} needs k < n/2, n odd or c<0, and c*a*x >= 0")
    ac = angle_coefficients(spec, idx, form)
    A, n, c = spec.damping, spec.n, spec.cf
    p = max(0.0, c * x * ac.a)
    q = c * x * ac.b
    chirp = 1.0 if form is AngleForm.ROTATED_UPPER else -1.0
    trig = Trig.SIN if idx.branch is Branch.MINUS else Trig.COS
    f = PowerIntegrand(phase=((q, 1.0), (chirp * A / n, float(n))), phi=-ac.theta,
                       damping=((p, 1.0),), trig=trig)
    share = tol / 2 if idx.branch is Branch.PLUS else tol
    r = integrate_power(f, share)
    if idx.branch is Branch.MINUS:
        value, err = -r.value, r.abs_error_estimate
    else:
        fv, fe, _ = _sum_rays(spec, _rays(spec, idx, scorer="F"), x, 0, share)
        value, err = fv - r.value, fe + r.abs_error_estimate
    method = (EvalMethod.INTEGRAL_ROTATED_UPPER if form is AngleForm.ROTATED_UPPER
              else EvalMethod.INTEGRAL_ROTATED_LOWER)
    return EvalResult(value, err, method,
                      {"evaluations": r.evaluations, "strategy": r.strategy_used.value})


def eval_solution(spec: AirySpec, idx: BranchIndex, x: float,
                  method: EvalMethod = EvalMethod.AUTO, tol: float = 1e-12,
                  derivative: int = 0) -> EvalResult:
    """y_k^(+/-)(x), or its ``derivative``-th derivative, by the chosen route.

    Raises NonConvergent when the route's error estimate exceeds ``tol``.
    ``AUTO`` takes the series when its cancellation is acceptable, otherwise
    the first integral form (base, then admissible rotated ones) that meets
    ``tol``.
    """
    check_index(spec, idx)
    x = float(x)
    if method is EvalMethod.AUTO:
        return _eval_auto(spec, idx, x, tol, derivative)
    r = _eval_raw(spec, idx, x, method, tol, derivative)
    if not r.abs_error <= tol:
        raise NonConvergent(f"{method.value} route reached error {r.abs_error:.3g} > tol {tol:.3g}")
    return r


def _eval_raw(spec, idx, x, method, tol, derivative) -> EvalResult:
    if method is EvalMethod.SERIES:
        sv = eval_series(spec, idx, x, tol, derivative)
        return EvalResult(sv.value, sv.error_estimate, EvalMethod.SERIES,
                          {"cancellation_ratio": sv.cancellation_ratio, "J": sv.J,
                           "low_confidence": sv.low_confidence})
    if method is EvalMethod.INTEGRAL_BASE:
        return integral_base(spec, idx, x, tol, derivative)
    if derivative:
        raise MethodInadmissible("rotated forms evaluate the function only")
    form = (AngleForm.ROTATED_UPPER if method is EvalMethod.INTEGRAL_ROTATED_UPPER
            else AngleForm.ROTATED_LOWER)
    return integral_rotated(spec, idx, x, form, tol)


def _eval_auto(spec, idx, x, tol, derivative) -> EvalResult:
    sv = _eval_raw(spec, idx, x, EvalMethod.SERIES, tol, derivative)
    if sv.diagnostics["cancellation_ratio"] < CANCELLATION_THRESHOLD and sv.abs_error <= tol:
        return sv
    tried = [sv]
    candidates = [EvalMethod.INTEGRAL_BASE]
    if not derivative:
        candidates += [m for m, f in ((EvalMethod.INTEGRAL_ROTATED_LOWER, AngleForm.ROTATED_LOWER),
                                      (EvalMethod.INTEGRAL_ROTATED_UPPER, AngleForm.ROTATED_UPPER))
                       if rotated_admissible(spec, idx, x, f)]
    for m in candidates:
        if m is EvalMethod.INTEGRAL_BASE and base_cancellation(spec, x, derivative, idx) * EPS > tol:
            continue
        try:
            r = _eval_raw(spec, idx, x, m, tol, derivative)
        except NonConvergent:
            continue
        if r.abs_error <= tol:
            return r
        tried.append(r)
    best = min(tried, key=lambda r: r.abs_error)
    raise NonConvergent(f"no route met tol {tol:.3g} at x={x}; best was {best.method.value} "
                        f"with error {best.abs_error:.3g}")


def base_cancellation(spec: AirySpec, x: float, derivative: int = 0,
                      idx: BranchIndex | None = None) -> float:
    """Rough ratio of the largest integrand value to O(1) in the base form at x.

    A ray with p = c x Re(omega) < 0 grows like e^{|p| w} until the w^n
    damping wins; the peak is at w* = (|p|/A)^(1/(n-1)).
    """
    n, A, c = spec.n, spec.damping, spec.cf
    if idx is None:
        omegas = [cmath.exp(-1j * base_theta(spec, k)) for k in range(n)]
    else:
        omegas = [ray.omega for _, ray in _rays(spec, idx)]
    worst = 0.0
    for om in omegas:
        p = c * x * om.real
        if p < 0:
            w = (-p / A) ** (1 / (n - 1))
            worst = max(worst, -p * w * (1 - 1 / n) + derivative * math.log(max(w, 1.0)))
    return math.exp(worst)


def eval_best(spec: AirySpec, idx: BranchIndex, x: float, tol: float = 1e-12) -> float:
    """Most accurate available value of y_k^(+/-)(x).

    Order of preference: the series when its cancellation is mild, the base
    integral when its growing exponential is mild, then a rotated form.
    """
    sv = eval_series(spec, idx, x, tol)
    if sv.cancellation_ratio < 1e4 and sv.error_estimate <= tol:
        return sv.value
    if base_cancellation(spec, x, idx=idx) < 1e3:
        return integral_base(spec, idx, x, tol).value
    for form in (AngleForm.ROTATED_LOWER, AngleForm.ROTATED_UPPER):
        if rotated_admissible(spec, idx, x, form):
            for t in (tol, 10 * tol, 100 * tol):
                try:
                    return integral_rotated(spec, idx, x, form, t).value
                except NonConvergent:
                    pass
    return integral_base(spec, idx, x, tol).value


# ---------------------------------------------------------------- hyper-Airy

@dataclass(frozen=True)
class HyperAirySpec:
    """A_alpha(x) = (1/pi) int_0^inf cos(x w + w^alpha/alpha) dw.

    ``beta`` is the sign with which an order-alpha term enters a heat
    operator: (-1)^m for alpha = 2m+1, 1 for non-integer alpha.
    """

    alpha: float
    beta: int | None = None

    def __post_init__(self):
        a = float(self.alpha)
        if not (math.isfinite(a) and a > 1):
            raise InvalidSpec(f"alpha must be > 1, got {self.alpha!r}")
        expected = default_beta(a)
        if self.beta is None:
            object.__setattr__(self, "beta", expected)
        elif self.beta != expected:
            raise InvalidSpec(f"beta must be {expected} for alpha={a}")


def default_beta(alpha: float) -> int:
    if float(alpha).is_integer():
        a = int(alpha)
        if a % 2 == 0:
            raise InvalidSpec("even integer orders have no hyper-Airy sign")
        return (-1) ** ((a - 1) // 2)
    return 1


def hyper_airy_at_zero(alpha: float) -> float:
    """Closed form A_alpha(0) = alpha^(1/alpha-1) Gamma(1/alpha) cos(pi/(2 alpha)) / pi."""
    a = float(alpha)
    return math.exp((1 / a - 1) * math.log(a) + gammaln(1 / a)) * math.cos(math.pi / (2 * a)) / math.pi


def eval_hyper_airy(h: HyperAirySpec | float, x: float, tol: float = 1e-12,
                    route: str = "oscillatory") -> float:
    """A_alpha(x).

    ``route="oscillatory"`` integrates the cosine directly (zeros + Euler);
    ``route="damped"`` rotates the ray by pi/(2 alpha), which turns the chirp
    into the damping exp(-s^alpha/alpha).
    """
    if not isinstance(h, HyperAirySpec):
        h = HyperAirySpec(float(h))
    a, x = float(h.alpha), float(x)
    if route == "oscillatory":
        f = PowerIntegrand(phase=((x, 1.0), (1 / a, a)))
        return integrate_power(f, tol * math.pi).value / math.pi
    if route == "damped":
        phi = math.pi / (2 * a)
        f = PowerIntegrand(phase=((x * math.cos(phi), 1.0),), phi=phi,
                           damping=((1 / a, a), (x * math.sin(phi), 1.0)))
        return integrate_power(f, tol * math.pi).value / math.pi
    raise InvalidSpec(f"unknown route {route!r}")


def hyper_airy_as_solution(alpha: int) -> tuple[AirySpec, BranchIndex, AngleForm]:
    """Solution whose value is pi * A_alpha for odd integer alpha = 2m+1."""
    if alpha < 3 or alpha % 2 == 0:
        raise InvalidSpec("alpha must be an odd integer >= 3")
    m = (alpha - 1) // 2
    if m % 2 == 0:
        return AirySpec(alpha, 1), BranchIndex(m // 2, Branch.MINUS), AngleForm.ROTATED_UPPER
    return AirySpec(alpha, -1), BranchIndex((m + 1) // 2, Branch.MINUS), AngleForm.ROTATED_LOWER


# ------------------------------------------------------------------ Scorer

def _check_scorer(spec: AirySpec, which: str, k: int | None):
    if which == "F":
        return
    if which != "G":
        raise InvalidSpec("which must be 'F' or 'G'")
    n = spec.n
    if classify(spec) is CaseClass.ODD_OR_EVEN_NEG_C:
        lo, hi = 1, n // 2
    else:
        lo, hi = 0, n // 2 - 1
    if k is None or not lo <= k <= hi:
        raise IndexOutOfRange(f"G(k) needs {lo} <= k <= {hi} for this spec")


def eval_scorer(spec: AirySpec, which: str, x: float, k: int | None = None,
                tol: float = 1e-12, derivative: int = 0) -> EvalResult:
    """Scorer-type solutions f (``which="F"``) and g_k (``which="G"``)."""
    _check_scorer(spec, which, k)
    if which == "F":
        rays = _rays(spec, None, scorer="F")
    else:
        rays = _rays(spec, None, theta=base_theta(spec, k), scorer="G")
    v, e, nev = _sum_rays(spec, rays, float(x), derivative, tol)
    return EvalResult(v, e, EvalMethod.INTEGRAL_BASE, {"evaluations": nev})


# -------------------------------------------------------- half-line integrals

def _halfline_check(spec: AirySpec, theta: float, side: Side):
    c = spec.cf
    if classify(spec) is not CaseClass.ODD_OR_EVEN_NEG_C:
        raise PreconditionViolated("half-line integrals need n odd or c < 0")
    if not 0 <= theta <= math.pi:
        raise PreconditionViolated("theta must lie in [0, pi]")
    a = math.cos(theta)
    if abs(a) < 1e-15:
        a = 0.0
    if side is Side.POSITIVE and c * a < 0:
        raise PreconditionViolated("positive side needs c*cos(theta) >= 0")
    if side is Side.NEGATIVE:
        if spec.n % 2 == 0:
            raise PreconditionViolated("negative side needs n odd")
        if c * a > 0:
            raise PreconditionViolated("negative side needs c*cos(theta) <= 0")
    if side is Side.BOTH:
        if a != 0:
            raise PreconditionViolated("full line needs cos(theta) = 0")
        if spec.n % 2 == 0:
            raise PreconditionViolated("full line needs n odd")


def halfline_integral(spec: AirySpec, theta: float, side: Side) -> float:
    """Closed-form integral over a half-line (or the line) of

        F_theta(x) = -int_0^inf e^{-A w^n/n - c w x cos(theta)} sin(c w x sin(theta) - theta) dw.
    """
    _halfline_check(spec, theta, side)
    c = spec.cf
    if side is Side.BOTH:
        return math.pi / abs(c)
    if side is Side.POSITIVE:
        return (math.pi - theta) / -c if c < 0 else theta / c
    return (math.pi - theta) / c if c > 0 else theta / -c


def damped_sine(spec: AirySpec, theta: float, x: float, tol: float = 1e-13) -> float:
    """F_theta(x); equals y_k^- when theta is the base angle of index k."""
    ray = _Ray(1j * cmath.exp(-1j * theta), cmath.exp(-1j * theta))
    return _ray_value(spec, ray, float(x), 0, tol)[0]


def _asymptotic_tail(spec: AirySpec, theta: float, s: int, X: float):
    """int_X^inf F_theta(s x) dx from the large-x expansion.

    F_theta(x) ~ -sum_m (-A/n)^m (nm)!/m! sin(n m theta) / (c x)^(nm+1);
    summed while terms decrease. Returns (value, size of first omitted term).
    """
    n, A, c = spec.n, spec.damping, spec.cf * s
    total, m = 0.0, 1
    last = math.inf
    while m < 60:
        logmag = m * math.log(A / n) + gammaln(n * m + 1) - gammaln(m + 1)
        mag = math.exp(logmag - (n * m + 1) * math.log(abs(c))) / (n * m * X ** (n * m))
        if mag > last:
            break
        sgn = (-1) ** m * math.copysign(1.0, c) ** (n * m + 1)
        total += -sgn * math.sin(n * m * theta) * mag
        last = mag
        m += 1
    return total, last


def halfline_integral_numeric(spec: AirySpec, theta: float, side: Side,
                              tol: float = 1e-8) -> float:
    """Numerical value of :func:`halfline_integral` by quadrature of F_theta."""
    _halfline_check(spec, theta, side)
    if side is Side.BOTH:
        return (_half_numeric(spec, theta, 1, tol / 2)
                + _half_numeric(spec, theta, -1, tol / 2))
    return _half_numeric(spec, theta, 1 if side is Side.POSITIVE else -1, tol)


def _half_numeric(spec: AirySpec, theta: float, s: int, tol: float) -> float:
    inner = 1e-3 * tol

    def f(xs):
        xs = np.asarray(xs)
        flat = [damped_sine(spec, theta, s * v, inner) for v in xs.ravel()]
        return np.array(flat).reshape(xs.shape)

    X = 8.0
    while True:
        tail, omitted = _asymptotic_tail(spec, theta, s, X)
        if omitted < 0.05 * tol:
            # the expansion must already describe F_theta at X
            h = 1e-4 * X
            fx = float(f(np.array([X]))[0])
            d_tail = (_asymptotic_tail(spec, theta, s, X - h)[0]
                      - _asymptotic_tail(spec, theta, s, X + h)[0]) / (2 * h)
            if abs(fx - d_tail) * X < 0.05 * tol:
                break
        X *= 1.5
        if X > 1e4:
            raise NonConvergent("half-line tail did not settle")
    panels = int(max(8, 2 * X))
    value, err, _ = gk_integrate(f, 0.0, X, tol=0.5 * tol, panels=panels)
    if err > tol:
        raise NonConvergent(f"half-line quadrature error {err:.3g} above tol")
    return float(value + tail)
