"""Fundamental solutions of du/dt = sum_k a_k D^{alpha_k} u.

With Fourier transform ``F u(gamma) = int e^{i gamma x} u dx`` the solution has
symbol

    exp(-i t sgn(gamma) sum_odd a beta |gamma|^alpha) * exp(t sum_even (-1)^(alpha/2) a gamma^alpha)

so that ``u(t, x) = (1/pi) int_0^inf cos(gamma x + t sum a beta gamma^alpha) e^{...} dgamma``.
Without even orders, u is the convolution of one rescaled hyper-Airy kernel
per term.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.signal import fftconvolve
from scipy.special import erfc

from .airy import default_beta, eval_hyper_airy
from .core import (GridTooCoarse, InvalidSpec, MomentOverflow, NonConvergent,
                   SignConditionViolated, UnsupportedSpec)
from .quadrature import PowerIntegrand, integrate_power


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HYPERAIRY_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class HeatTerm:
    a: float
    alpha: float
    beta: int | None = None

    def __post_init__(self):
        al = float(self.alpha)
        if not (math.isfinite(al) and al > 1):
            raise InvalidSpec(f"alpha must be > 1, got {self.alpha!r}")
        if self.a == 0 or not math.isfinite(float(self.a)):
            raise InvalidSpec("coefficient a must be finite and nonzero")
        if self.even:
            if self.beta is not None:
                raise InvalidSpec("even orders carry no beta")
            return
        expected = default_beta(al)
        if self.beta is None:
            object.__setattr__(self, "beta", expected)
        elif self.beta != expected:
            raise InvalidSpec(f"beta must be {expected} for alpha={al}")

    @property
    def even(self) -> bool:
        al = float(self.alpha)
        return al.is_integer() and int(al) % 2 == 0


@dataclass(frozen=True)
class HeatSpec:
    """Operator sum a_k D^{alpha_k} at time t.

    ``strict_even`` requires every even-order term (not only the highest)
    to be damping, as needed for a convolution of kernels.
    """

    terms: tuple[HeatTerm, ...]
    t: float
    strict_even: bool = False

    def __post_init__(self):
        terms = tuple(tm if isinstance(tm, HeatTerm) else HeatTerm(*tm) for tm in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise InvalidSpec("at least one term is required")
        if not (math.isfinite(float(self.t)) and self.t >= 0):
            raise InvalidSpec("t must be >= 0")
        evens = self.even_coefficients()
        if evens:
            top = max(evens)
            checked = list(evens) if self.strict_even else [top]
            for al in checked:
                m = int(al) // 2
                if (-1) ** m * evens[al] >= 0:
                    raise SignConditionViolated(
                        f"even order {int(al)} needs (-1)^{m} a < 0, got a={evens[al]}")

    @classmethod
    def single(cls, a: float, alpha: float, t: float) -> "HeatSpec":
        return cls((HeatTerm(a, alpha),), t)

    def even_coefficients(self) -> dict[float, float]:
        out: dict[float, float] = {}
        for tm in self.terms:
            if tm.even:
                out[float(tm.alpha)] = out.get(float(tm.alpha), 0.0) + float(tm.a)
        return out

    def phase_coefficients(self) -> dict[float, float]:
        """kappa_alpha = t * sum beta a over non-even terms of equal order."""
        out: dict[float, float] = {}
        for tm in self.terms:
            if not tm.even:
                out[float(tm.alpha)] = out.get(float(tm.alpha), 0.0) + float(self.t) * tm.beta * float(tm.a)
        return out

    def damping_coefficients(self) -> dict[float, float]:
        """d_alpha with envelope exp(-sum d_alpha gamma^alpha)."""
        return {al: -float(self.t) * (-1) ** (int(al) // 2) * a
                for al, a in self.even_coefficients().items()}


@dataclass(frozen=True)
class GridShape:
    x0: float
    dx: float
    count: int

    def __post_init__(self):
        if not self.dx > 0:
            raise InvalidSpec("dx must be positive")
        if self.count < 2:
            raise InvalidSpec("grid needs at least 2 points")

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.count)

    @classmethod
    def span(cls, x0: float, x1: float, dx: float) -> "GridShape":
        count = int(round((x1 - x0) / dx)) + 1
        return cls(x0, dx, count)


@dataclass(frozen=True)
class GridFunction:
    x0: float
    dx: float
    values: np.ndarray
    t: float

    def __post_init__(self):
        if not self.dx > 0:
            raise InvalidSpec("dx must be positive")
        if len(self.values) < 2:
            raise InvalidSpec("grid needs at least 2 points")

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(len(self.values))

    def signed_mass(self) -> float:
        return float(math.fsum(self.values) * self.dx)

    def to_csv(self) -> str:
        lines = ["x,value"]
        lines += [f"{x!r},{v!r}" for x, v in zip(self.xs.tolist(), np.asarray(self.values).tolist())]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"x0": self.x0, "dx": self.dx, "t": self.t,
                           "values": np.asarray(self.values).tolist()})


# ---------------------------------------------------------- pointwise routes

def heat_integrand(spec: HeatSpec, x: float) -> PowerIntegrand:
    phase = [(float(x), 1.0)] + [(k, al) for al, k in spec.phase_coefficients().items()]
    damp = [(d, al) for al, d in spec.damping_coefficients().items()]
    return PowerIntegrand(phase=tuple(phase), damping=tuple(damp))


def heat_eval(spec: HeatSpec, x: float, tol: float = 1e-11) -> float:
    """u(t, x) by direct quadrature of the cosine integral."""
    if not spec.t > 0:
        raise InvalidSpec("heat_eval needs t > 0")
    r = integrate_power(heat_integrand(spec, x), tol * math.pi)
    return r.value / math.pi


def heat_eval_many(spec: HeatSpec, xs: Iterable[float], tol: float = 1e-11) -> np.ndarray:
    xs = list(map(float, xs))
    with ThreadPoolExecutor(_threads()) as ex:
        return np.array(list(ex.map(lambda v: heat_eval(spec, v, tol), xs)))


def scaling_eval(alpha: float, t: float, x: float, tol: float = 1e-12) -> float:
    """(alpha t)^(-1/alpha) A_alpha(x (alpha t)^(-1/alpha))."""
    if not t > 0:
        raise InvalidSpec("t must be positive")
    s = (alpha * t) ** (1 / alpha)
    return eval_hyper_airy(alpha, x / s, tol * s) / s


def fourier_symbol(spec: HeatSpec, gamma: float) -> complex:
    g = float(gamma)
    sg = math.copysign(1.0, g) if g != 0 else 0.0
    ph = sum(k * abs(g) ** al for al, k in spec.phase_coefficients().items())
    dm = sum(d * abs(g) ** al for al, d in spec.damping_coefficients().items())
    return cmath.exp(-1j * sg * ph) * math.exp(-dm)


# ------------------------------------------------------------ kernel grids

@dataclass(frozen=True)
class Kernel:
    """K(x) = A_alpha(sgn(kappa) x / s) / s with s = (alpha |kappa|)^(1/alpha).

    This is the fundamental solution of a single term with phase
    coefficient kappa = t beta a.
    """

    alpha: float
    kappa: float

    @property
    def scale(self) -> float:
        return (self.alpha * abs(self.kappa)) ** (1 / self.alpha)

    def __call__(self, x: float, tol: float = 1e-13) -> float:
        s = self.scale
        return eval_hyper_airy(self.alpha, math.copysign(1.0, self.kappa) * x / s, tol * s) / s

    def max_frequency(self, L: float) -> float:
        """Local angular frequency of the oscillating tail at distance L."""
        s = self.scale
        return (L / s) ** (1 / (self.alpha - 1)) / s


def _cheb_segment(f, lo: float, hi: float, tol: float, deg: int = 24):
    while True:
        fit = C.Chebyshev.interpolate(f, deg, domain=[lo, hi])
        tail = np.max(np.abs(fit.coef[-4:]))
        if tail < tol or deg >= 192:
            if tail >= tol:
                raise NonConvergent(f"kernel interpolation stalled on [{lo}, {hi}]")
            return fit
        deg *= 2


class SmoothInterpolant:
    """Piecewise Chebyshev interpolant of a smooth scalar function on [lo, hi].

    Each segment is fitted from direct values at Chebyshev points; the degree
    doubles until the trailing coefficients are below ``tol``.
    """

    def __init__(self, f, lo: float, hi: float, tol: float = 1e-12, segment: float = 2.0):
        nseg = max(1, int(math.ceil((hi - lo) / segment)))
        self.edges = np.linspace(lo, hi, nseg + 1)

        def vec(z):
            return np.array([f(v) for v in np.atleast_1d(z)])

        def fit(i):
            return _cheb_segment(vec, self.edges[i], self.edges[i + 1], tol)

        with ThreadPoolExecutor(_threads()) as ex:
            self.fits = list(ex.map(fit, range(nseg)))

    def __call__(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if xs.min() < self.edges[0] - 1e-9 or xs.max() > self.edges[-1] + 1e-9:
            raise InvalidSpec("interpolation outside the fitted range")
        nseg = len(self.fits)
        which = np.clip(np.searchsorted(self.edges, xs, side="right") - 1, 0, nseg - 1)
        out = np.empty_like(xs)
        for i, ft in enumerate(self.fits):
            sel = which == i
            if sel.any():
                out[sel] = ft(xs[sel])
        return out


def sample_smooth(f, xs: np.ndarray, tol: float = 1e-12, segment: float = 2.0) -> np.ndarray:
    """Values of a smooth scalar function on a fine grid (see SmoothInterpolant)."""
    xs = np.asarray(xs, dtype=float)
    return SmoothInterpolant(f, float(xs.min()), float(xs.max()), tol, segment)(xs)


# pointwise quadrature cannot go much below this (oscillatory rounding floor)
POINT_TOL_FLOOR = 1e-13


def sample_kernel(kernel: Kernel, xs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    point_tol = max(0.01 * tol, POINT_TOL_FLOOR)
    return sample_smooth(lambda v: kernel(v, point_tol), xs, tol)


def taper(x: np.ndarray, center: float = 50.0, width: float = 6.0) -> np.ndarray:
    """Smooth cutoff 0.5 erfc((|x| - center)/width): 1 near 0, 0 far out.

    Its derivative is Gaussian, so truncating an oscillatory tail with local
    frequency w costs about exp(-(w width)^2 / 4).
    """
    return 0.5 * erfc((np.abs(x) - center) / width)


@dataclass(frozen=True)
class ConvolutionWork:
    output: GridFunction
    work: GridFunction
    kernels: tuple[Kernel, ...]


def heat_convolution_grid(spec: HeatSpec, grid: GridShape, tol: float = 1e-11,
                          center: float = 50.0, width: float = 6.0,
                          return_work: bool = False):
    """u(t, .) on ``grid`` as the discrete convolution of the term kernels.

    Kernels are sampled on a padded lattice, multiplied by a smooth taper,
    and convolved (zero-padded FFT, direct sum for short arrays) with one
    factor dx per convolution.
    """
    if not spec.t > 0:
        raise InvalidSpec("t must be positive")
    if spec.even_coefficients():
        raise UnsupportedSpec("the convolution form applies to non-even orders only")
    kernels = tuple(Kernel(al, k) for al, k in sorted(spec.phase_coefficients().items())
                    if k != 0)
    if not kernels:
        raise UnsupportedSpec("all phase coefficients cancel")
    dx = grid.dx
    reach = center + 6 * width
    M = int(math.ceil(reach / dx))
    for kn in kernels:
        if kn.max_frequency(reach) * dx > 1.0:
            raise GridTooCoarse(f"dx={dx} does not resolve the alpha={kn.alpha} kernel tail")
    if len(kernels) == 1:
        xs = grid.xs
        vals = sample_kernel(kernels[0], xs, tol)
        out = GridFunction(grid.x0, dx, vals, spec.t)
        if not return_work:
            return out
        lattice = dx * np.arange(-M, M + 1)
        wvals = sample_kernel(kernels[0], lattice, tol) * taper(lattice, center, width)
        work = GridFunction(float(lattice[0]), dx, wvals, spec.t)
        return ConvolutionWork(out, work, kernels)
    lattice = dx * np.arange(-M, M + 1)
    w = taper(lattice, center, width)
    acc = None
    for kn in kernels[:-1]:
        v = sample_kernel(kn, lattice, tol) * w
        acc = v if acc is None else _conv(acc, v) * dx
    # last factor on the output lattice offset so results land on the grid
    last_x = grid.x0 + dx * np.arange(-M, M + 1)
    last = sample_kernel(kernels[-1], last_x, tol) * taper(last_x, center, width)
    full = _conv(acc, last) * dx
    nacc = acc.size
    # full[i] sits at lattice[0]*... : first point = -(nacc-1)/2 dx + last_x[0]
    start = -((nacc - 1) // 2) * dx + last_x[0]
    offset = int(round((grid.x0 - start) / dx))
    vals = full[offset:offset + grid.count]
    if offset < 0 or vals.size != grid.count:
        raise GridTooCoarse("output grid extends beyond the working lattice")
    out = GridFunction(grid.x0, dx, vals, spec.t)
    if not return_work:
        return out
    work = GridFunction(start, dx, full, spec.t)
    return ConvolutionWork(out, work, kernels)


def _conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size * b.size < 4096 * 64:
        return np.convolve(a, b)
    return fftconvolve(a, b)


def resolvable_frequencies(spec: HeatSpec, gmax: float = 2.0, count: int = 41,
                           center: float = 50.0, width: float = 6.0,
                           leak: float = 1e-6) -> np.ndarray:
    """Frequencies in [-gmax, gmax] that the tapered kernels carry faithfully.

    A frequency gamma is carried by the kernel near x = -d(phase)/d(gamma);
    that position must satisfy |x| <= center - 4 width. The taper also
    smears the local tail frequency w_c at |x| = center by about
    exp(-((w_c - gamma) width)^2 / 4), so gamma must stay below w_c by a
    margin that pushes this leakage under ``leak``.
    """
    limit = center - 4 * width
    gs = np.linspace(-gmax, gmax, count)
    coefs = spec.phase_coefficients()
    pos = np.array([sum(al * abs(k) * abs(g) ** (al - 1) for al, k in coefs.items()) for g in gs])
    margin = 2 * math.sqrt(math.log(1 / leak)) / width
    top = min((Kernel(al, k).max_frequency(center) for al, k in coefs.items() if k != 0),
              default=math.inf)
    return gs[(pos <= limit) & (np.abs(gs) <= top - margin)]


def grid_transform(g: GridFunction, gammas: Sequence[float]) -> np.ndarray:
    """sum_j u(x_j) e^{i gamma x_j} dx."""
    xs = g.xs
    return np.array([np.sum(g.values * np.exp(1j * gm * xs)) * g.dx for gm in gammas])


# ---------------------------------------------------------------- moments

@dataclass(frozen=True)
class MomentQuery:
    """Signed moment of order (2m+1)k (odd) or 2mk (even).

    ``a`` is the coefficient of the symbol: exp(-i a t gamma^(2m+1)) for odd
    parity, exp(a t gamma^(2m)) up to the sign (-1)^m for even parity.
    """

    m: int
    k: int
    a: float | Fraction
    t: float | Fraction
    parity: str = "odd"

    def __post_init__(self):
        if self.m < 1 or self.k < 0:
            raise InvalidSpec("need m >= 1 and k >= 0")
        if self.a == 0:
            raise InvalidSpec("a must be nonzero")
        if self.t < 0:
            raise InvalidSpec("t must be >= 0")
        if self.parity not in ("odd", "even"):
            raise InvalidSpec("parity must be 'odd' or 'even'")

    @property
    def alpha(self) -> int:
        return 2 * self.m + 1 if self.parity == "odd" else 2 * self.m

    @property
    def order(self) -> int:
        return self.alpha * self.k

    def to_heat_spec(self) -> HeatSpec:
        """Single-term operator whose fundamental solution has these moments."""
        if self.parity == "odd":
            return HeatSpec((HeatTerm((-1) ** self.m * self.a, self.alpha),), self.t)
        return HeatSpec((HeatTerm(self.a, self.alpha),), self.t)


def _exact(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def moment_closed_form(q: MomentQuery, exact: bool = False):
    """(-1)^((m+1)k) (a t)^k ((2m+1)k)!/k! (odd) or (a t)^k (2mk)!/k! (even)."""
    a, t = _exact(q.a), _exact(q.t)
    val = Fraction(math.factorial(q.order), math.factorial(q.k)) * (a * t) ** q.k
    if q.parity == "odd":
        val *= (-1) ** ((q.m + 1) * q.k)
    return val if exact else _to_float(val)


def moment_of_order(parity: str, m: int, a, t, h: int, exact: bool = False):
    """Moment of arbitrary order h: zero unless alpha divides h."""
    alpha = 2 * m + 1 if parity == "odd" else 2 * m
    if h % alpha:
        return Fraction(0) if exact else 0.0
    return moment_closed_form(MomentQuery(m, h // alpha, a, t, parity), exact)


def _to_float(v: Fraction) -> float:
    try:
        return float(v)
    except OverflowError as e:
        raise MomentOverflow("moment exceeds the float range; use exact mode") from e


class _GaussRational:
    """Exact complex rational x + i y."""

    __slots__ = ("re", "im")

    def __init__(self, re=Fraction(0), im=Fraction(0)):
        self.re, self.im = Fraction(re), Fraction(im)

    def __add__(self, o):
        return _GaussRational(self.re + o.re, self.im + o.im)

    def __mul__(self, o):
        if isinstance(o, _GaussRational):
            return _GaussRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        return _GaussRational(self.re * o, self.im * o)


MOMENT_ORDER_CAP = 200


def moment_numeric(spec: HeatSpec, order: int, tol: float = 0.0, exact: bool = False):
    """h-th moment as i^(-h) h! [gamma^h] of the exponential symbol.

    The symbol exp(P(gamma)) is expanded exactly with
    e_h = (1/h) sum_j j p_j e_(h-j) over Gaussian rationals.
    """
    if order < 0 or order > MOMENT_ORDER_CAP:
        raise InvalidSpec(f"order must lie in 0..{MOMENT_ORDER_CAP}")
    poly: dict[int, _GaussRational] = {}
    t = _exact(spec.t)
    for tm in spec.terms:
        al = float(tm.alpha)
        if not al.is_integer():
            raise UnsupportedSpec("moments need integer orders")
        d = int(al)
        a = _exact(tm.a)
        if tm.even:
            coef = _GaussRational((-1) ** (d // 2) * a * t)
        else:
            coef = _GaussRational(0, -tm.beta * a * t)
        poly[d] = poly.get(d, _GaussRational()) + coef
    e = [_GaussRational(1)]
    for h in range(1, order + 1):
        s = _GaussRational()
        for j, pj in poly.items():
            if j <= h:
                s = s + pj * e[h - j] * j
        e.append(s * Fraction(1, h))
    val = e[order] * math.factorial(order)
    # multiply by i^(-h)
    for _ in range(order % 4):
        val = _GaussRational(val.im, -val.re)
    if val.im != 0:
        raise NonConvergent("moment came out non-real")
    return val.re if exact else _to_float(val.re)


def sum_moments(specs: Sequence[HeatSpec], order: int, exact: bool = False):
    """Moment of a sum of independent components by the multinomial expansion."""
    N = len(specs)
    if N == 0:
        raise InvalidSpec("need at least one component")
    comp = [[moment_numeric(s, h, exact=True) for h in range(order + 1)] for s in specs]
    total = Fraction(0)
    for parts in iproduct(range(order + 1), repeat=N - 1):
        last = order - sum(parts)
        if last < 0:
            continue
        hs = list(parts) + [last]
        term = Fraction(math.factorial(order))
        for i, h in enumerate(hs):
            term = term / math.factorial(h) * comp[i][h]
        total += term
    return total if exact else _to_float(total)
