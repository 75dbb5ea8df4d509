"""Residual oracles and cross-route checks.

Every check returns a :class:`ResidualReport` whose ``passed`` flag is exactly
``max_abs_residual <= tolerance_used``.
"""

from __future__ import annotations

import enum
import json
import math
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .airy import (EvalMethod, _eval_raw, Side, base_cancellation, eval_best, eval_scorer, eval_solution,
                   halfline_integral, halfline_integral_numeric, integral_base,
                   integral_rotated, rotated_admissible)
from .core import (AngleForm, AirySpec, Branch, BranchIndex, CaseClass,
                   GridTooCoarse, InvalidSpec, MethodInadmissible,
                   PreconditionViolated, TruncationTooSmall, base_theta,
                   check_index, classify, solution_indices)
from .heat import (GridShape, HeatSpec, MomentQuery, SmoothInterpolant, _conv, _threads,
                   heat_convolution_grid, heat_eval, heat_eval_many, moment_closed_form,
                   moment_numeric, sum_moments)
from .series import (_expansion, adaptive_order, cauchy_product,
                     series_derivative, series_eval, tail_majorant)


@dataclass(frozen=True)
class ResidualReport:
    max_abs_residual: float
    grid: list
    per_point: list
    tolerance_used: float
    passed: bool
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def build(cls, xs, residuals, tol: float, **diagnostics) -> "ResidualReport":
        res = [float(abs(r)) for r in residuals]
        worst = max(res) if res else 0.0
        if any(math.isnan(r) for r in res):
            worst = math.inf
        return cls(worst, [float(x) for x in xs], res, float(tol), worst <= tol, diagnostics)

    def to_json(self) -> str:
        d = asdict(self)
        d["max_abs_residual"] = _finite_or_str(d["max_abs_residual"])
        d["per_point"] = [_finite_or_str(v) for v in d["per_point"]]
        return json.dumps(d)


def _finite_or_str(v):
    return v if math.isfinite(v) else str(v)


# --------------------------------------------------------- series residuals

def _series_order(spec: AirySpec, xs, tol: float, m: int) -> int:
    xmax = max(abs(float(x)) for x in xs) if len(xs) else 0.0
    return adaptive_order(spec, xmax, 1e-4 * tol, m) + m


def _check_order(spec: AirySpec, J: int, xs, tol: float, m: int):
    xmax = max(abs(float(x)) for x in xs)
    if J < spec.n + m or tail_majorant(spec, J - m, xmax, m) > tol:
        raise TruncationTooSmall(f"J={J} cannot reach tol={tol} at |x|={xmax}")


def airy_ode_residual(spec: AirySpec, idx: BranchIndex, xs: Sequence[float],
                      tol: float = 1e-10, J: int | None = None) -> ResidualReport:
    """y^(n-1) + c x y from the series and its (n-1)-fold derivative."""
    check_index(spec, idx)
    n = spec.n
    if J is None:
        J = _series_order(spec, xs, tol, n - 1)
    _check_order(spec, J, xs, tol, n - 1)
    exp = _expansion(spec, idx, J, 0)
    d = series_derivative(exp, n - 1)
    res = [series_eval(d, x).value + spec.cf * x * series_eval(exp, x).value for x in xs]
    return ResidualReport.build(xs, res, tol, J=J)


def derivative_eq_residual(spec: AirySpec, idx: BranchIndex, m: int, xs: Sequence[float],
                           tol: float = 1e-8, J: int | None = None) -> ResidualReport:
    """g = f^(m) against g^(n-1) + c x g = -m c f^(m-1)."""
    check_index(spec, idx)
    if m < 1:
        raise InvalidSpec("m must be >= 1")
    n, c = spec.n, spec.cf
    if J is None:
        J = _series_order(spec, xs, tol, n - 1 + m)
    _check_order(spec, J, xs, tol, n - 1 + m)
    exp = _expansion(spec, idx, J, 0)
    g = series_derivative(exp, m)
    gd = series_derivative(exp, m + n - 1)
    fm1 = series_derivative(exp, m - 1)
    res = [series_eval(gd, x).value + c * x * series_eval(g, x).value
           + m * c * series_eval(fm1, x).value for x in xs]
    return ResidualReport.build(xs, res, tol, J=J)


def scorer_residual(spec: AirySpec, which: str, xs: Sequence[float], k: int | None = None,
                    tol: float = 1e-7) -> ResidualReport:
    """y^(n-1) + c x y - 1, differentiating under the integral sign."""
    n, c = spec.n, spec.cf
    res = []
    for x in xs:
        d = eval_scorer(spec, which, x, k, tol=1e-3 * tol, derivative=n - 1).value
        v = eval_scorer(spec, which, x, k, tol=1e-3 * tol).value
        res.append(d + c * x * v - 1.0)
    return ResidualReport.build(xs, res, tol, which=which, k=k)


# ----------------------------------------------------------- product ODEs

class ProductCase(enum.Enum):
    TWO_FACTOR_3 = "TwoFactor3"
    THREE_FACTOR_3 = "ThreeFactor3"
    FOUR_FACTOR_3 = "FourFactor3"
    FOUR_FACTOR_3_CORRECTED = "FourFactor3Corrected"
    TWO_FACTOR_4 = "TwoFactor4"


def _ode_two3(d, x):
    return d[3] - 4 * x * d[1] - 2 * d[0]


def _ode_three3(d, x):
    return d[4] - (-9 * x ** 2 * d[0] + 10 * d[1] + 10 * x * d[2])


def _ode_four3(d, x):
    return d[5] - (-64 * x * d[0] - 64 * x ** 2 * d[1] + 30 * x * d[2] + 20 * x * d[3])


def _ode_four3_fixed(d, x):
    return d[5] - (-64 * x * d[0] - 64 * x ** 2 * d[1] + 30 * d[2] + 20 * x * d[3])


def _ode_two4(d, x):
    return (x * d[6] - d[5] - 7 * x ** 2 * d[3] - 7 * x * d[2] + 7 * d[1]
            - 8 * x ** 3 * d[0])


_PRODUCT_TABLE = {
    ProductCase.TWO_FACTOR_3: (AirySpec(3, -1), 2, 3, _ode_two3),
    ProductCase.THREE_FACTOR_3: (AirySpec(3, -1), 3, 4, _ode_three3),
    ProductCase.FOUR_FACTOR_3: (AirySpec(3, -1), 4, 5, _ode_four3),
    ProductCase.FOUR_FACTOR_3_CORRECTED: (AirySpec(3, -1), 4, 5, _ode_four3_fixed),
    ProductCase.TWO_FACTOR_4: (AirySpec(4, -1), 2, 6, _ode_two4),
}


def product_series(idxs: Sequence[BranchIndex], spec: AirySpec, J: int):
    exps = [_expansion(spec, i, J, 0) for i in idxs]
    out = exps[0]
    for e in exps[1:]:
        out = cauchy_product(out, e)
    return out


def product_eq_residual(case: ProductCase | str, xs: Sequence[float], tol: float = 1e-7,
                        J: int = 120, factors: Sequence[Sequence[BranchIndex]] | None = None
                        ) -> ResidualReport:
    """Residual of the product equation over every multiset of basis solutions."""
    case = ProductCase(case) if not isinstance(case, ProductCase) else case
    spec, count, order, ode = _PRODUCT_TABLE[case]
    if J < order + spec.n:
        raise TruncationTooSmall(f"J={J} too small for order {order}")
    basis = solution_indices(spec)
    if factors is None:
        factors = list(_multisets(basis, count))
    worst_per_x = np.zeros(len(xs))
    for combo in factors:
        prod = product_series(combo, spec, J)
        derivs = [series_derivative(prod, m) for m in range(order + 1)]
        for i, x in enumerate(xs):
            d = [series_eval(e, x).value for e in derivs]
            worst_per_x[i] = max(worst_per_x[i], abs(ode(d, x)))
    return ResidualReport.build(xs, worst_per_x, tol, case=case.value,
                                products=[[str(i) for i in f] for f in factors])


def _multisets(items, r, start=0):
    if r == 0:
        yield ()
        return
    for i in range(start, len(items)):
        for rest in _multisets(items, r - 1, i):
            yield (items[i],) + rest


# ------------------------------------------------------ convolution ODE

def default_decaying_branch(spec: AirySpec) -> BranchIndex:
    """Branch that is pi times a hyper-Airy function (decays for x -> +inf)."""
    from .airy import hyper_airy_as_solution
    n = spec.n
    if n % 2 == 1 and n >= 3:
        ref, idx, _ = hyper_airy_as_solution(n)
        if ref.c * spec.cf > 0:
            return idx
    raise InvalidSpec(f"no default decaying branch for {spec}; pass idxs explicitly")


def _decay_cutoff(f: Callable[[float], float], eps: float = 1e-14, start: float = 2.0) -> float:
    L = start
    while L < 200:
        if abs(f(L)) < eps and abs(f(L + 1)) < eps:
            return L
        L += 1.0
    raise GridTooCoarse("factor does not decay on the positive side")


def _fd_weights_eval(y: np.ndarray, d: int, s: int):
    """Central difference of order d with step s (in lattice units), O(h^2).

    Odd orders use doubled spacing so that all nodes stay on the lattice.
    Returns (values at centres, half-width in lattice units).
    """
    sp = s if d % 2 == 0 else 2 * s
    offs = [((d - 2 * k) * sp) // 2 for k in range(d + 1)]
    half = max(abs(o) for o in offs)
    n = y.size
    out = np.zeros(n - 2 * half)
    for k, o in enumerate(offs):
        out += (-1) ** k * comb(d, k) * y[half + o: n - half + o]
    return out, half


def _richardson(y: np.ndarray, d: int, dx: float, s: int, margin: int):
    """Richardson-extrapolated d-th derivative on y[margin:-margin]."""
    h1 = s * dx if d % 2 == 0 else 2 * s * dx
    a, ha = _fd_weights_eval(y, d, s)
    b, hb = _fd_weights_eval(y, d, 2 * s)
    a = a[margin - ha: a.size - (margin - ha)] / h1 ** d
    b = b[margin - hb: b.size - (margin - hb)] / (2 * h1) ** d
    ext = (4 * a - b) / 3
    return ext, np.abs(ext - a)


def convolution_eq_residual(specs: Sequence[AirySpec], xs: Sequence[float] | None = None,
                            tol: float = 5e-5, idxs: Sequence[BranchIndex] | None = None,
                            dx: float = 0.005, mode: str = "fd",
                            out_range: tuple[float, float] = (-5.0, 5.0)) -> ResidualReport:
    """Residual of sum_j y^(n_j - 1) prod_{i != j} c_i + x y prod c_i = 0
    for the convolution y of one solution per spec.

    ``mode="fd"``: derivatives of the gridded convolution by central
    differences with Richardson extrapolation. ``mode="analytic"``: the
    derivative is moved onto the factor whose base integral form is
    well conditioned and computed by quadrature. ``xs`` must lie on the
    lattice ``out_range[0] + j dx``; it defaults to the central 80%.
    """
    N = len(specs)
    if N == 0 or N > 3:
        raise InvalidSpec("need 1 to 3 factors")
    if idxs is None:
        idxs = [default_decaying_branch(s) for s in specs]
    for s, i in zip(specs, idxs):
        check_index(s, i)
    lo_out, hi_out = out_range
    if xs is None:
        span = hi_out - lo_out
        a, b = lo_out + 0.1 * span, hi_out - 0.1 * span
        xs = lo_out + dx * np.arange(int(round((a - lo_out) / dx)), int(round((b - lo_out) / dx)) + 1)
    xs = np.asarray(xs, dtype=float)
    if N == 1:
        return airy_ode_residual(specs[0], idxs[0], list(xs), tol)
    jx = (xs - lo_out) / dx
    if np.any(np.abs(jx - np.round(jx)) > 1e-6) or jx.min() < 0 or xs.max() > hi_out + 1e-9:
        raise InvalidSpec("xs must lie on the output lattice inside out_range")
    jx = np.round(jx).astype(int)

    funcs = [(lambda v, s=s, i=i: float(np.real(eval_best(s, i, v, 1e-12))))
             for s, i in zip(specs, idxs)]
    cuts = [dx * math.ceil(_decay_cutoff(f) / dx) for f in funcs]
    orders = sorted({s.n - 1 for s in specs})
    smax = 4 if max(orders) >= 3 else 1
    margin = 0 if mode == "analytic" else 2 * (2 * smax) * 2 + 2
    lo_ext = lo_out - margin * dx
    n_out = int(round((hi_out - lo_out) / dx)) + 1 + 2 * margin

    def lattice(j):
        others = sum(cuts) - cuts[j]
        if j < N - 1:
            start = -dx * math.ceil((others - lo_ext) / dx)
        else:
            start = lo_ext - dx * math.ceil(others / dx)
        count = int(round((cuts[j] - start) / dx)) + 1
        return start + dx * np.arange(count)

    grids = [lattice(j) for j in range(N)]
    # one interpolant per distinct factor, covering all lattices it is used on
    interps = {}
    for j in range(N):
        key = (specs[j], idxs[j])
        lo = min(grids[i][0] for i in range(N) if (specs[i], idxs[i]) == key)
        hi = max(grids[i][-1] for i in range(N) if (specs[i], idxs[i]) == key)
        if key not in interps:
            interps[key] = SmoothInterpolant(funcs[j], lo, hi, 1e-12)
    samples = [interps[(specs[j], idxs[j])](grids[j]) for j in range(N)]

    def convolve(arrs):
        acc = arrs[0]
        for a in arrs[1:]:
            acc = _conv(acc, a) * dx
        return acc

    base0 = sum(g[0] for g in grids)
    off = int(round((lo_ext - base0) / dx))

    def window(full):
        w = full[off: off + n_out]
        if off < 0 or w.size != n_out:
            raise GridTooCoarse("output range exceeds the working lattice")
        return w

    y = window(convolve(samples))
    cprod = math.prod(s.cf for s in specs)
    diag = {"mode": mode, "dx": dx, "cutoffs": cuts, "factors": [str(i) for i in idxs]}
    derivs = {}
    fd_spread = np.zeros(len(xs))
    if mode == "fd":
        core = slice(margin, n_out - margin)
        for d in orders:
            s = 1 if d <= 2 else 4
            val, spread = _richardson(y, d, dx, s, margin)
            derivs[d] = val[jx]
            fd_spread = np.maximum(fd_spread, spread[jx])
        yv = y[core][jx]
        diag["richardson_spread"] = float(fd_spread.max())
    elif mode == "analytic":
        # put the derivative on the factor with the best-conditioned base form
        scores = [max(base_cancellation(specs[j], g[0], max(orders), idxs[j]),
                      base_cancellation(specs[j], g[-1], max(orders), idxs[j]))
                  for j, g in enumerate(grids)]
        jd = int(np.argmin(scores))
        if scores[jd] * 1e-16 > 1e-3 * tol:
            raise MethodInadmissible("no factor has a well-conditioned base form on its lattice")
        diag["derivative_factor"] = jd
        for d in orders:
            fd = lambda v, d=d: float(np.real(integral_base(specs[jd], idxs[jd], v, 1e-12, d).value))
            arrs = list(samples)
            arrs[jd] = SmoothInterpolant(fd, grids[jd][0], grids[jd][-1], 1e-11)(grids[jd])
            derivs[d] = window(convolve(arrs))[jx]
        yv = y[jx]
    else:
        raise InvalidSpec(f"unknown mode {mode!r}")
    res = np.zeros(len(xs))
    for s in specs:
        res += derivs[s.n - 1] * (cprod / s.cf)
    res += cprod * xs * yv
    return ResidualReport.build(xs, res, tol, **diag)


# ---------------------------------------------------- Gamma expectation

@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    std_error: float
    samples: int
    seed: int
    reference: float | None = None

    @property
    def z_score(self) -> float:
        if self.reference is None:
            return math.nan
        if self.std_error == 0:
            # degenerate estimator: only rounding separates it from the reference
            close = abs(self.estimate - self.reference) <= 1e-12 * max(1.0, abs(self.reference))
            return 0.0 if close else math.inf
        return abs(self.estimate - self.reference) / self.std_error


MC_CHUNK = 1 << 16


def gamma_expectation_check(spec: AirySpec, idx: BranchIndex, x: float,
                            samples: int = 10 ** 6, seed: int = 0,
                            reference: float | None = None) -> MonteCarloResult:
    """Monte Carlo estimate of y_k^- as a Gamma expectation.

    With Y ~ Gamma(shape 1/n, scale n/A), A = |c|^(n-1):

        y_k^-(x) = -Gamma(1/n) (n|c|)^(1/n - 1) E[e^{-c Y^(1/n) x a} sin(c Y^(1/n) x b - theta)].

    Samples come in chunks of 2^16 drawn from PCG64 streams spawned from
    ``SeedSequence(seed)`` in chunk order, so the result depends only on
    (seed, samples).
    """
    if classify(spec) is not CaseClass.ODD_OR_EVEN_NEG_C or idx.branch is not Branch.MINUS:
        raise PreconditionViolated("needs n odd or c < 0, and the minus branch")
    check_index(spec, idx)
    if samples < 10 ** 4:
        raise InvalidSpec("samples must be >= 10^4")
    n, c = spec.n, spec.cf
    theta = base_theta(spec, idx.k)
    a, b = math.cos(theta), math.sin(theta)
    scale = n / spec.damping
    pref = -math.exp(gammaln(1 / n) + (1 / n - 1) * math.log(n * abs(c)))
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    g0 = math.sin(-theta)

    def chunk(i):
        rng = np.random.Generator(np.random.PCG64(children[i]))
        w = rng.gamma(1 / n, scale, sizes[i]) ** (1 / n)
        g = np.exp(-c * w * x * a) * np.sin(c * w * x * b - theta) - g0
        return math.fsum(g), math.fsum(g * g)

    with ThreadPoolExecutor(_threads()) as ex:
        parts = list(ex.map(chunk, range(len(sizes))))
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(0.0, s2 / samples - mean * mean) * samples / (samples - 1)
    est = pref * (g0 + mean)
    se = abs(pref) * math.sqrt(var / samples)
    return MonteCarloResult(est, se, samples, seed, reference)


# --------------------------------------------------------- cross routes

def cross_route_report(spec: AirySpec, idx: BranchIndex, xs: Sequence[float],
                       tol: float = 1e-12) -> ResidualReport:
    """Series vs base integral (and admissible rotated forms).

    ``per_point`` holds |difference| / (sum of the two error estimates), so
    the tolerance is 1.
    """
    ratios = []
    for x in xs:
        s = _eval_raw(spec, idx, x, EvalMethod.SERIES, tol, 0)
        others = [_eval_raw(spec, idx, x, EvalMethod.INTEGRAL_BASE, tol, 0)]
        for form in (AngleForm.ROTATED_UPPER, AngleForm.ROTATED_LOWER):
            if rotated_admissible(spec, idx, x, form):
                others.append(integral_rotated(spec, idx, x, form, tol))
        r = 0.0
        for o in others:
            budget = s.abs_error + o.abs_error
            diff = abs(s.value - o.value)
            r = max(r, diff / budget if budget > 0 else (0.0 if diff == 0 else math.inf))
        ratios.append(r)
    return ResidualReport.build(xs, ratios, 1.0, kind="agreement-ratio")


def halfline_report(spec: AirySpec, theta: float, side: Side, tol: float = 1e-6) -> ResidualReport:
    closed = halfline_integral(spec, theta, side)
    num = halfline_integral_numeric(spec, theta, side, 0.01 * tol)
    return ResidualReport.build([theta], [num - closed], tol, closed=closed, numeric=num,
                                side=side.value)


# ------------------------------------------------------ heat identities

def heat_route_report(spec: HeatSpec, x0: float = -10.0, x1: float = 10.0, dx: float = 0.01,
                      tol: float = 1e-5, mass_tol: float = 1e-4, stride: int = 10) -> ResidualReport:
    """Pointwise cosine integral vs kernel convolution on the central 80% of a grid.

    The pointwise route is evaluated on every ``stride``-th grid point; the
    grid's signed mass must also be within ``mass_tol`` of 1. A mass miss
    is reported as an infinite residual.
    """
    grid = GridShape.span(x0, x1, dx)
    work = heat_convolution_grid(spec, grid, return_work=True)
    g = work.output
    xs = g.xs
    span = x1 - x0
    core = np.nonzero((xs >= x0 + 0.1 * span - 1e-9) & (xs <= x1 - 0.1 * span + 1e-9))[0][::stride]
    pts = xs[core]
    ref = heat_eval_many(spec, pts)
    res = list(np.abs(g.values[core] - ref))
    mass = work.work.signed_mass()
    if abs(mass - 1.0) > mass_tol:
        res.append(math.inf)
    return ResidualReport.build(pts, res, tol, signed_mass=mass)


def heat_airy_report(t: float, xs: Sequence[float], tol: float = 1e-6) -> ResidualReport:
    """n t pi u(t, x) for a single order-3 term (a = 1) vs the matching Airy-type solution."""
    n = 3
    spec = HeatSpec.single(1, n, t)
    aspec = AirySpec(n, Fraction(1) / (n * Fraction(t)))
    idx = BranchIndex(1, Branch.MINUS)
    res = [n * t * math.pi * heat_eval(spec, x) - eval_best(aspec, idx, x) for x in xs]
    return ResidualReport.build(xs, res, tol, t=t)


def moment_report(queries: Sequence[MomentQuery]) -> ResidualReport:
    """Closed form against the symbol expansion, in exact rationals.

    The residual of each query is 0 on exact equality and 1 otherwise.
    """
    res = [0.0 if moment_closed_form(q, exact=True) == moment_numeric(q.to_heat_spec(), q.order,
                                                                      exact=True) else 1.0
           for q in queries]
    return ResidualReport.build(list(range(len(queries))), res, 0.0,
                                queries=[(q.parity, q.m, q.k) for q in queries])


def multinomial_report(specs: Sequence[HeatSpec], max_order: int) -> ResidualReport:
    """sum_moments vs the moments of the merged operator, exactly, for orders 0..max_order."""
    merged = HeatSpec(tuple(tm for s in specs for tm in s.terms), specs[0].t)
    res = [0.0 if sum_moments(specs, h, exact=True) == moment_numeric(merged, h, exact=True) else 1.0
           for h in range(max_order + 1)]
    return ResidualReport.build(list(range(max_order + 1)), res, 0.0)


def mc_report(spec: AirySpec, idx: BranchIndex, xs: Sequence[float], samples: int = 10 ** 6,
              seed: int = 0, z_max: float = 4.0) -> ResidualReport:
    """Monte Carlo z-scores against the series value; tolerance is ``z_max``."""
    zs = []
    for x in xs:
        ref = eval_best(spec, idx, x)
        zs.append(gamma_expectation_check(spec, idx, x, samples, seed, ref).z_score)
    return ResidualReport.build(xs, zs, z_max, kind="z-score", seed=seed, samples=samples)
