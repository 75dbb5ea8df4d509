"""Taylor series at 0 of the solutions of y^(n-1) + c x y = 0.

The j-th derivative at the origin of every solution family has the closed form

    D_j = (-c)^j * M_j * T_j,   M_j = (1/n) Gamma((j+1)/n) (A/n)^(-(j+1)/n)

with ``A = |c|^(n-1)`` and a bounded trigonometric factor ``T_j`` depending on
the branch (see :func:`trig_factor`).  Coefficients are assembled in log space
so that large ``j`` neither overflows nor underflows prematurely.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import (AirySpec, Branch, BranchIndex, CaseClass, InvalidSpec,
                   TruncationTooSmall, base_theta, check_index, classify)

EPS = np.finfo(float).eps
CANCELLATION_THRESHOLD = 1e8
MAX_ORDER = 600


def trig_factor(spec: AirySpec, idx: BranchIndex, j: int) -> complex | float:
    """Bounded factor T_j of the j-th derivative at 0 (|T_j| <= 2)."""
    n = spec.n
    theta = base_theta(spec, idx.k)
    s = (j + 1) * theta
    if idx.branch is Branch.MINUS:
        return math.sin(s)
    if classify(spec) is CaseClass.ODD_OR_EVEN_NEG_C:
        return 1.0 - math.cos(s)
    return cmath.exp(1j * math.pi * (j + 1) / n) - math.cos(s)


def _log_scale(spec: AirySpec, j: int, m: int = 0) -> float:
    """log of Gamma((j+m+1)/n) (n|c|)^((j+m+1)/n - 1) / j!."""
    n = spec.n
    z = (j + m + 1) / n
    return math.lgamma(z) + (z - 1.0) * math.log(n * abs(spec.cf)) - math.lgamma(j + 1)


def _coefficient(spec: AirySpec, idx: BranchIndex, j: int, m: int = 0):
    """D_(j+m) / j!: coefficient of x^j in the m-th derivative series."""
    t = trig_factor(spec, idx, j + m)
    if t == 0:
        return 0.0 * t
    sign = (-1.0 if spec.cf > 0 else 1.0) ** (j + m)
    # exp of the log-scale; fold in the j! of the derivative shift
    logs = _log_scale(spec, j, m)
    return sign * t * math.exp(logs)


def _coef_relerr(spec: AirySpec, j: int, m: int) -> float:
    n = spec.n
    z = (j + m + 1) / n
    mag = abs(math.lgamma(z)) + abs((z - 1) * math.log(n * abs(spec.cf))) + math.lgamma(j + 1)
    return EPS * (8.0 + mag)


def derivative_at_zero(spec: AirySpec, idx: BranchIndex, j: int):
    """Closed-form j-th derivative of the solution at x = 0."""
    check_index(spec, idx)
    if j < 0:
        raise InvalidSpec("derivative order must be >= 0")
    t = trig_factor(spec, idx, j)
    if t == 0:
        return 0.0 * t
    return (-1.0 if spec.cf > 0 else 1.0) ** j * t * _magnitude(spec, j)


def _magnitude(spec: AirySpec, j: int) -> float:
    """|c|^j Gamma((j+1)/n) / (n (A/n)^((j+1)/n)): |D_j| without the trig factor."""
    n = spec.n
    z = (j + 1) / n
    return math.exp(j * math.log(abs(spec.cf)) + math.lgamma(z) - math.log(n)
                    - z * math.log(spec.damping / n))


@dataclass(frozen=True)
class SeriesExpansion:
    """Truncated Taylor series at 0.

    ``order`` is the number of derivatives already applied to the underlying
    solution; it selects the tail majorant. Series built from products of
    solutions carry ``spec = None`` and a caller-supplied ``tail`` function.
    """

    coefficients: np.ndarray
    J: int
    spec: AirySpec | None = None
    idx: BranchIndex | None = None
    order: int = 0
    coef_relerr: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.coefficients)

    def tail_bound(self, x: float) -> float:
        """Bound on |sum_{j>J} c_j x^j| from the Gamma-ratio majorant."""
        if self.spec is None:
            return math.nan
        return tail_majorant(self.spec, self.J, x, self.order)


def tail_majorant(spec: AirySpec, J: int, x: float, m: int = 0) -> float:
    """Bound on sum_{j>J} 2 Gamma((j+m+1)/n)(n|c|)^((j+m+1)/n-1) |x|^j / j!.

    Uses Gamma(z+s)/Gamma(z) <= z^s (0 < s < 1), which makes the term ratio
    bounded by a decreasing sequence, so the tail is dominated by a geometric
    series once that ratio drops below one.
    """
    ax = abs(x)
    if ax == 0:
        return 0.0
    n = spec.n
    j = J + 1
    ratio = ((j + m + 1) / n) ** (1 / n) * (n * abs(spec.cf)) ** (1 / n) * ax / (j + 1)
    if ratio >= 1:
        return math.inf
    log_env = math.log(2.0) + _log_scale(spec, j, m) + j * math.log(ax)
    return math.exp(log_env) / (1 - ratio)


def series_coefficients(spec: AirySpec, idx: BranchIndex, J: int) -> SeriesExpansion:
    check_index(spec, idx)
    if J < spec.n:
        raise TruncationTooSmall(f"J={J} must be >= n={spec.n}")
    return _expansion(spec, idx, J, 0)


@lru_cache(maxsize=256)
def _expansion(spec: AirySpec, idx: BranchIndex, J: int, m: int) -> SeriesExpansion:
    coefs = [_coefficient(spec, idx, j, m) for j in range(J + 1)]
    dtype = complex if any(isinstance(c, complex) for c in coefs) else float
    arr = np.array(coefs, dtype=dtype)
    arr.setflags(write=False)
    rel = np.array([_coef_relerr(spec, j, m) for j in range(J + 1)])
    rel.setflags(write=False)
    return SeriesExpansion(arr, J, spec, idx, m, rel)


@dataclass(frozen=True)
class SeriesValue:
    value: float | complex
    error_estimate: float
    cancellation_ratio: float
    low_confidence: bool
    J: int


def _fsum(terms: np.ndarray):
    if np.iscomplexobj(terms):
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    return math.fsum(terms)


def series_eval(exp: SeriesExpansion, x: float,
                threshold: float = CANCELLATION_THRESHOLD) -> SeriesValue:
    """Sum the series at ``x`` with exactly rounded (fsum) accumulation.

    The error estimate adds the truncation majorant to a rounding bound
    derived from the per-coefficient relative error and the term magnitudes.
    """
    x = float(x)
    c = exp.coefficients
    with np.errstate(over="ignore", invalid="ignore"):
        powers = np.power(x, np.arange(c.size, dtype=float))
        terms = c * powers
    if not np.all(np.isfinite(terms)):
        return SeriesValue(math.nan, math.inf, math.inf, True, exp.J)
    value = _fsum(terms)
    absum = math.fsum(np.abs(terms))
    rel = exp.coef_relerr if exp.coef_relerr is not None else np.full(c.size, 8 * EPS)
    rounding = math.fsum(np.abs(terms) * (rel + EPS * np.arange(1, c.size + 1)))
    rounding += EPS * abs(value)
    tail = exp.tail_bound(x) if exp.spec is not None else 0.0
    if absum == 0:
        ratio = 1.0
    elif value == 0:
        ratio = math.inf
    else:
        ratio = absum / abs(value)
    return SeriesValue(value, tail + rounding, ratio, ratio > threshold, exp.J)


def series_derivative(exp: SeriesExpansion, m: int) -> SeriesExpansion:
    """Termwise m-fold derivative: c'_j = c_(j+m) (j+1)...(j+m)."""
    if m < 0:
        raise InvalidSpec("m must be >= 0")
    n = exp.spec.n if exp.spec is not None else 2
    if m > exp.J - n:
        raise TruncationTooSmall(f"m={m} exceeds J - n = {exp.J - n}")
    if m == 0:
        return exp
    J = exp.J - m
    j = np.arange(J + 1, dtype=float)
    scale = np.ones(J + 1)
    for i in range(1, m + 1):
        scale = scale * (j + i)
    coefs = exp.coefficients[m:] * scale
    coefs.setflags(write=False)
    rel = None
    if exp.coef_relerr is not None:
        rel = exp.coef_relerr[m:] + m * EPS
    return SeriesExpansion(coefs, J, exp.spec, exp.idx, exp.order + m, rel)


def adaptive_order(spec: AirySpec, x: float, tol: float, m: int = 0,
                   cap: int = MAX_ORDER) -> int:
    """Smallest J >= n + m whose tail majorant at ``x`` is below ``tol``.

    Returns ``cap`` if no such J exists below it.
    """
    J = spec.n + m
    while J < cap:
        if tail_majorant(spec, J, x, m) < tol:
            return J
        J += max(1, J // 8)
    return cap


def eval_series(spec: AirySpec, idx: BranchIndex, x: float, tol: float = 1e-12,
                m: int = 0) -> SeriesValue:
    """m-th derivative of the solution at ``x`` by adaptive truncation."""
    check_index(spec, idx)
    J = adaptive_order(spec, x, 0.1 * tol, m)
    exp = _expansion(spec, idx, max(J, spec.n), m)
    return series_eval(exp, x)


# ------------------------------------------------------------- exact mode

def exact_derivative_ratios(spec: AirySpec, idx: BranchIndex, J: int):
    """Rational multipliers rho_j with D_j = rho_j * D_(r-1), j+1 = q n + r.

    Built from Gamma(z+q) = Gamma(z) prod_{i<q}(z+i) and the n-periodicity
    of the trig factor (up to a sign in the EvenPosC case); requires a
    rational ``c``. Returns a list of (rho_j, r).
    """
    check_index(spec, idx)
    c = Fraction(spec.c)
    n = spec.n
    A = abs(c) ** (n - 1)
    sigma = 1 if classify(spec) is CaseClass.ODD_OR_EVEN_NEG_C else -1
    out = []
    for j in range(J + 1):
        q, r = divmod(j + 1, n)
        if r == 0:
            q, r = q - 1, n
        rho = Fraction(1)
        for i in range(q):
            rho *= (-c) ** n * (Fraction(r, n) + i) * (Fraction(n) / A) * sigma
        out.append((rho, r))
    return out


def check_recurrence_exact(spec: AirySpec, idx: BranchIndex, J: int) -> bool:
    """D_(n+m-1) = -c m D_(m-1) for all m with n+m-1 <= J, in rationals."""
    rat = exact_derivative_ratios(spec, idx, J)
    c = Fraction(spec.c)
    n = spec.n
    for m in range(1, J - n + 2):
        (r1, b1), (r0, b0) = rat[n + m - 1], rat[m - 1]
        if b1 != b0 or r1 != -c * m * r0:
            return False
    return True


def recurrence_defect(spec: AirySpec, idx: BranchIndex, J: int) -> float:
    """Max defect of the recurrence using floating coefficients, relative to |D_j|
    without its trig factor (which may vanish up to rounding)."""
    worst = 0.0
    n, c = spec.n, spec.cf
    for m in range(1, J - n + 2):
        hi = derivative_at_zero(spec, idx, n + m - 1)
        lo = -c * m * derivative_at_zero(spec, idx, m - 1)
        worst = max(worst, abs(hi - lo) / _magnitude(spec, n + m - 1))
    return worst


def cauchy_product(a: SeriesExpansion, b: SeriesExpansion) -> SeriesExpansion:
    """Product series truncated at min(J_a, J_b) (exact up to that order)."""
    J = min(a.J, b.J)
    coefs = np.convolve(a.coefficients[:J + 1], b.coefficients[:J + 1])[:J + 1]
    coefs.setflags(write=False)
    return SeriesExpansion(coefs, J)
