"""Quadrature for the two integrand shapes that the solution formulas produce.

``DampedPower``::

    w^d exp(-A w^n/n - p w) * trig(q w + phi)

``OscillatoryPower``::

    w^d exp(-p w) * trig(q w + chirp * A w^n/n + phi)

Both are special cases of :class:`PowerIntegrand`, whose phase and damping are
arbitrary sums of powers; the heat-kernel integrals use that directly.

Strategies
----------
* super-linear damping, or ``p > 0`` with few oscillations before the
  envelope dies: truncate at ``W`` and run vectorized adaptive G7/K15 panels;
* otherwise: split at stationary points of the phase, put panel edges on the
  zeros of the trig factor, sum the half-waves and accelerate the alternating
  tail by iterated averaging of partial sums (Euler transform).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import InvalidSpec, NonConvergent

EPS = np.finfo(float).eps
SAFETY = 0.1

# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class Shape(enum.Enum):
    DAMPED_POWER = "DampedPower"
    OSCILLATORY_POWER = "OscillatoryPower"


class Trig(enum.Enum):
    SIN = "sin"
    COS = "cos"
    EXP = "exp"


class Strategy(enum.Enum):
    TRUNCATED = "truncated-gk"
    ZEROS_EULER = "zeros-euler"


@dataclass(frozen=True)
class IntegrandSpec:
    shape: Shape
    A: float
    n: float
    p: float = 0.0
    q: float = 0.0
    phi: float = 0.0
    trig: Trig = Trig.COS
    chirp: int = 1
    weight_power: int = 0

    def __post_init__(self):
        for name in ("A", "n", "p", "q", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpec(f"{name} must be finite")
        if self.A < 0:
            raise InvalidSpec("A must be >= 0")
        if self.n <= 1:
            raise InvalidSpec("power n must exceed 1")
        if self.shape is Shape.DAMPED_POWER and self.A <= 0:
            raise InvalidSpec("DampedPower needs A > 0")
        if self.shape is Shape.OSCILLATORY_POWER:
            if self.p < 0:
                raise InvalidSpec("OscillatoryPower needs p >= 0")
            if self.A <= 0 and self.p == 0:
                raise InvalidSpec("OscillatoryPower with p = 0 needs A > 0")
            if self.chirp not in (1, -1):
                raise InvalidSpec("chirp must be +1 or -1")
        if self.weight_power < 0:
            raise InvalidSpec("weight_power must be >= 0")

    def integrand(self) -> "PowerIntegrand":
        if self.shape is Shape.DAMPED_POWER:
            return PowerIntegrand(
                phase=((self.q, 1.0),), phi=self.phi,
                damping=((self.A / self.n, self.n), (self.p, 1.0)),
                trig=self.trig, weight_power=self.weight_power)
        return PowerIntegrand(
            phase=((self.q, 1.0), (self.chirp * self.A / self.n, self.n)),
            phi=self.phi, damping=((self.p, 1.0),),
            trig=self.trig, weight_power=self.weight_power)


@dataclass(frozen=True)
class QuadratureResult:
    value: float | complex
    abs_error_estimate: float
    strategy_used: Strategy
    evaluations: int


@dataclass(frozen=True)
class PowerIntegrand:
    """``w^d exp(-sum d_k w^e_k) trig(phi + sum s_k w^e_k)`` on (0, inf)."""

    phase: tuple[tuple[float, float], ...]
    phi: float = 0.0
    damping: tuple[tuple[float, float], ...] = ()
    trig: Trig = Trig.COS
    weight_power: int = 0
    _phase: tuple = field(init=False, repr=False, compare=False)
    _damp: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ph = tuple((float(s), float(e)) for s, e in self.phase if s != 0)
        dm = tuple((float(d), float(e)) for d, e in self.damping if d != 0)
        object.__setattr__(self, "_phase", ph)
        object.__setattr__(self, "_damp", dm)

    @property
    def superlinear_damping(self) -> bool:
        return any(d > 0 and e > 1 for d, e in self._damp) and \
            all(e <= max(ee for dd, ee in self._damp if dd > 0)
                for d, e in self._damp if d < 0)

    @property
    def linear_rate(self) -> float:
        return sum(d for d, e in self._damp if e == 1.0)

    def psi(self, w):
        out = np.full(np.shape(w), self.phi, dtype=float)
        for s, e in self._phase:
            out = out + s * np.power(w, e)
        return out

    def dpsi(self, w):
        out = np.zeros(np.shape(w))
        for s, e in self._phase:
            out = out + s * e * np.power(w, e - 1.0)
        return out

    def log_envelope(self, w):
        out = np.zeros(np.shape(w))
        for d, e in self._damp:
            out = out - d * np.power(w, e)
        if self.weight_power:
            with np.errstate(divide="ignore"):
                out = out + self.weight_power * np.log(w)
        return out

    def envelope(self, w):
        return np.exp(self.log_envelope(w))

    def __call__(self, w, trig: Trig | None = None):
        trig = trig or self.trig
        w = np.asarray(w, dtype=float)
        env = self.envelope(w)
        arg = self.psi(w)
        if trig is Trig.COS:
            return env * np.cos(arg)
        if trig is Trig.SIN:
            return env * np.sin(arg)
        return env * np.exp(1j * arg)


# ---------------------------------------------------------------- GK panels

def _gk15(f, a, b):
    """Kronrod values, |K - G| and |f| integrals on panels [a_i, b_i]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    w = mid[:, None] + half[:, None] * NODES[None, :]
    fv = f(w)
    k = (fv @ KRONROD_W) * half
    g = (fv @ GAUSS_W) * half
    absint = (np.abs(fv) @ KRONROD_W) * np.abs(half)
    return k, np.abs(k - g), absint


def gk_panels(f: Callable, a, b, tol: float, max_rounds: int = 40):
    """Adaptive G7/K15 on each panel [a_i, b_i] (vectorized over panels).

    Returns per-panel (values, errors, abs-integrals) and the number of
    integrand evaluations. Panels are bisected until the summed error is
    below ``tol``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    owner = np.arange(a.size)
    k, err, absint = _gk15(f, a, b)
    nevals = 15 * a.size
    for _ in range(max_rounds):
        total_err = err.sum()
        roundoff = 50 * EPS * absint.sum()
        if total_err <= max(tol, roundoff) or a.size > 200000:
            break
        bad = err > max(tol, roundoff) / (2 * err.size)
        bad &= err > 50 * EPS * absint
        if not bad.any():
            break
        m = 0.5 * (a[bad] + b[bad])
        na = np.concatenate([a[bad], m])
        nb = np.concatenate([m, b[bad]])
        no = np.concatenate([owner[bad], owner[bad]])
        nk, nerr, nabs = _gk15(f, na, nb)
        nevals += 15 * na.size
        keep = ~bad
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        owner = np.concatenate([owner[keep], no])
        k = np.concatenate([k[keep], nk])
        err = np.concatenate([err[keep], nerr])
        absint = np.concatenate([absint[keep], nabs])
    n_out = int(owner.max()) + 1 if owner.size else 0
    vals = np.zeros(n_out, dtype=k.dtype)
    errs = np.zeros(n_out)
    abss = np.zeros(n_out)
    np.add.at(vals, owner, k)
    np.add.at(errs, owner, err)
    np.add.at(abss, owner, absint)
    return vals, errs, abss, nevals


def gk_integrate(f: Callable, a: float, b: float, tol: float = 1e-12,
                 panels: int = 8):
    """Adaptive G7/K15 integral of a vectorized ``f`` over [a, b]."""
    edges = np.linspace(a, b, panels + 1)
    vals, errs, abss, nev = gk_panels(f, edges[:-1], edges[1:], tol)
    value = vals.sum()
    err = errs.sum() + 50 * EPS * abss.sum()
    return value, err, nev


# ------------------------------------------------------------ truncation

def _truncation_point(f: PowerIntegrand, tol: float, step: float = 0.25) -> float:
    """Smallest grid point W past the envelope peak with envelope <= tol*SAFETY.

    The grid is {step * j}; since the log-envelope is eventually decreasing,
    W is monotone nonincreasing in ``tol``.
    """
    target = math.log(tol * SAFETY)
    # past the peak: double until the log-envelope is decreasing and below target
    w = step
    for _ in range(200):
        le = float(f.log_envelope(np.array(w)))
        slope = float(f.log_envelope(np.array(w * 1.001)) - le)
        if le <= target and slope < 0:
            break
        w *= 2
    else:
        raise NonConvergent("integrand envelope does not decay")
    lo, hi = w / 2, w
    # bisection on the grid index; monotone beyond the peak
    jlo, jhi = math.floor(lo / step), math.ceil(hi / step)
    while jhi - jlo > 1:
        jm = (jlo + jhi) // 2
        wm = jm * step
        le = float(f.log_envelope(np.array(wm)))
        slope = float(f.log_envelope(np.array(wm * 1.001)) - le)
        if le <= target and slope < 0:
            jhi = jm
        else:
            jlo = jm
    return max(jhi, 1) * step


def _tail_bound(f: PowerIntegrand, W: float) -> float:
    """Bound on int_W^inf envelope for a log-concave decreasing tail."""
    le = float(f.log_envelope(np.array(W)))
    h = 1e-6 * max(W, 1.0)
    slope = float(f.log_envelope(np.array(W + h)) - le) / h
    if slope >= 0:
        return math.inf
    return math.exp(le) / -slope


def _integrate_truncated(f: PowerIntegrand, tol: float, W: float | None = None):
    if W is None:
        W = _truncation_point(f, tol)
    # enough panels to resolve the oscillation up-front
    swing = abs(float(f.psi(np.array(W)) - f.phi)) + abs(
        float(f.dpsi(np.array(W)))) * W
    panels = int(min(4096, max(8, 4 * W, swing / math.pi)))
    value, err, nev = gk_integrate(f, 0.0, W, tol=SAFETY * tol, panels=panels)
    err += _tail_bound(f, W)
    return value, err, nev


# -------------------------------------------------- zeros + Euler transform

def _stationary_points(f: PowerIntegrand) -> list[float]:
    terms = [(s * e, e - 1.0) for s, e in f._phase]
    lead_c, lead_e = max(terms, key=lambda t: t[1])
    if lead_e <= 0:
        raise InvalidSpec("phase must contain a power > 1 for the zeros strategy")
    others = [(c, e) for c, e in terms if (c, e) != (lead_c, lead_e)]
    wdom = 1.0
    for c, e in others:
        wdom = max(wdom, (2 * (len(others) + 1) * abs(c) / abs(lead_c)) ** (1 / (lead_e - e)))
    grid = np.linspace(0.0, wdom, 4001)[1:]
    d = f.dpsi(grid)
    roots = []
    sgn = np.sign(d)
    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        roots.append(brentq(lambda w: float(f.dpsi(np.array(w))), grid[i], grid[i + 1],
                            xtol=1e-15, rtol=4 * EPS))
    return roots


def _solve_monotone(f: PowerIntegrand, targets: np.ndarray, lo: float, hi: float):
    """Solve psi(w) = target for each target on a piece where psi is monotone."""
    a = np.full(targets.shape, lo)
    b = np.full(targets.shape, hi)
    inc = f.psi(np.array(hi)) > f.psi(np.array(lo))
    for _ in range(200):
        m = 0.5 * (a + b)
        above = f.psi(m) > targets
        if not inc:
            above = ~above
        b = np.where(above, m, b)
        a = np.where(above, a, m)
        if np.all(b - a <= 4 * EPS * np.maximum(1.0, b)):
            break
    return 0.5 * (a + b)


def _zero_targets(start: float, end: float, offset: float) -> np.ndarray:
    lo, hi = min(start, end), max(start, end)
    j0 = math.ceil((lo - offset) / math.pi)
    j1 = math.floor((hi - offset) / math.pi)
    t = offset + math.pi * np.arange(j0, j1 + 1)
    t = t[(t > lo) & (t < hi)]
    return t if end >= start else t[::-1]


def euler_average(partial_sums: np.ndarray):
    """Iterated averaging of the partial sums of an alternating series.

    Returns (estimate, error estimate); the error is the spread of the last
    two averaging levels.
    """
    t = np.asarray(partial_sums, dtype=float)
    prev = t[-1]
    best = t[-1]
    levels = []
    while t.size > 1:
        t = 0.5 * (t[:-1] + t[1:])
        levels.append(t[-1])
    if not levels:
        return best, math.inf
    best = levels[-1]
    prev = levels[-2] if len(levels) > 1 else partial_sums[-1]
    return best, abs(best - prev)


def _oscillatory_real(f: PowerIntegrand, trig: Trig, tol: float,
                      first_terms: int = 24, max_terms: int = 1536):
    offset = math.pi / 2 if trig is Trig.COS else 0.0
    fn = (lambda w: f(w, trig))
    breaks = [0.0] + _stationary_points(f)
    edges = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        t = _zero_targets(float(f.psi(np.array(lo))), float(f.psi(np.array(hi))), offset)
        edges.append(np.concatenate([[lo], _solve_monotone(f, t, lo, hi)]))
    last = breaks[-1]
    psi_last = float(f.psi(np.array(last)))
    direction = 1.0 if float(f.dpsi(np.array(last + 1e-9 + 1e-9 * last))) > 0 else -1.0
    if last == 0.0:
        direction = 1.0 if float(f.dpsi(np.array(1e3))) > 0 else -1.0
    # first zero strictly beyond the last break
    if direction > 0:
        j0 = math.floor((psi_last - offset) / math.pi) + 1
    else:
        j0 = math.ceil((psi_last - offset) / math.pi) - 1
    finite = np.concatenate(edges + [[last]]) if edges else np.array([last])
    nevals = 0

    def tail_edges(count):
        targets = offset + math.pi * (j0 + direction * np.arange(count))
        hi = max(last, 1.0) * 2
        while direction * (float(f.psi(np.array(hi))) - targets[-1]) < 0:
            hi *= 2
        return _solve_monotone(f, targets, last, hi)

    count = first_terms
    estimate_prev = None
    while True:
        z = tail_edges(count + 1)
        pts = np.concatenate([finite, z])
        vals, errs, abss, nev = gk_panels(fn, pts[:-1], pts[1:], SAFETY * tol / 4)
        nevals += nev
        nfin = finite.size  # panels up to and including [last, z0]
        head = vals[:nfin].sum()
        tail_terms = vals[nfin:]
        s = head + np.cumsum(tail_terms)
        # average over the later half only; early terms need not be regular
        m = max(4, s.size // 2)
        est, accel_err = euler_average(s[-m:])
        quad_err = errs.sum() + 50 * EPS * abss.sum()
        err = accel_err + quad_err
        if estimate_prev is not None:
            err = max(err, abs(est - estimate_prev))
            if err <= tol:
                return est, err, nevals
            # rounding floor reached: more terms will not help
            stalled = count >= 4 * first_terms and err > 0.5 * err_prev
        else:
            stalled = False
        estimate_prev, err_prev = est, err
        count *= 2
        if count > max_terms or stalled:
            raise NonConvergent(
                f"alternating-tail acceleration stalled at error {err:.3g} > tol {tol:.3g}")


def integrate_power(f: PowerIntegrand, tol: float = 1e-10,
                    max_oscillations: float = 400.0) -> QuadratureResult:
    """Integrate a :class:`PowerIntegrand` over (0, inf)."""
    if not tol > 0:
        raise InvalidSpec("tol must be positive")
    has_phase_power = any(e > 1 for _, e in f._phase)
    use_trunc = f.superlinear_damping
    W = None
    if not use_trunc and f.linear_rate > 0:
        W = _truncation_point(f, tol)
        swing = abs(float(f.psi(np.array(W)) - f.phi))
        use_trunc = swing <= max_oscillations * math.pi or not has_phase_power
    if use_trunc:
        value, err, nev = _integrate_truncated(f, tol, W)
        return QuadratureResult(_as_scalar(value), float(err), Strategy.TRUNCATED, nev)
    if not has_phase_power:
        raise InvalidSpec("integral does not converge absolutely and has no chirp")
    if f.trig is Trig.EXP:
        re, e1, n1 = _oscillatory_real(f, Trig.COS, tol / 2)
        im, e2, n2 = _oscillatory_real(f, Trig.SIN, tol / 2)
        return QuadratureResult(complex(re, im), e1 + e2, Strategy.ZEROS_EULER, n1 + n2)
    value, err, nev = _oscillatory_real(f, f.trig, tol)
    return QuadratureResult(float(value), float(err), Strategy.ZEROS_EULER, nev)


def _as_scalar(v):
    v = complex(v) if np.iscomplexobj(v) else float(v)
    return v


def integrate(spec: IntegrandSpec, tol: float = 1e-10) -> QuadratureResult:
    return integrate_power(spec.integrand(), tol)


def truncation_point(spec: IntegrandSpec, tol: float) -> float:
    if spec.shape is Shape.OSCILLATORY_POWER and spec.p == 0:
        raise InvalidSpec("no truncation point for an undamped oscillatory integrand")
    return _truncation_point(spec.integrand(), tol)


def integrate_many(specs: Sequence[IntegrandSpec], tol: float = 1e-10) -> list[QuadratureResult]:
    return [integrate(s, tol) for s in specs]
