"""Named batches of residual checks used by ``hyperairy verify``."""

from __future__ import annotations

import math
from typing import Callable, Iterator

import numpy as np

from .airy import Side
from .core import AirySpec, Branch, BranchIndex, solution_indices
from .heat import HeatSpec, MomentQuery
from .verify import (ProductCase, ResidualReport, airy_ode_residual, convolution_eq_residual,
                     cross_route_report, derivative_eq_residual, halfline_report,
                     heat_airy_report, heat_route_report, mc_report, moment_report,
                     multinomial_report, product_eq_residual, scorer_residual)

Check = tuple[str, Callable[[], ResidualReport]]


def fixture_specs() -> list[AirySpec]:
    return [AirySpec(n, c) for n in (3, 4, 5, 6) for c in (-1, 1)]


def _grid(a: float, b: float, count: int) -> list[float]:
    return list(np.linspace(a, b, count))


def _ode(seed: int) -> Iterator[Check]:
    yield "ode n=2 c=-1 (1,+)", lambda: airy_ode_residual(
        AirySpec(2, -1), BranchIndex(1, Branch.PLUS), _grid(-2, 2, 41), 1e-10)
    for s in fixture_specs():
        for idx in solution_indices(s):
            yield (f"ode n={s.n} c={s.c} {idx}",
                   lambda s=s, idx=idx: airy_ode_residual(s, idx, _grid(-2, 2, 21), 1e-8))


def _derivative(seed: int) -> Iterator[Check]:
    for s in fixture_specs():
        for idx in solution_indices(s):
            for m in (1, 2):
                yield (f"derivative m={m} n={s.n} c={s.c} {idx}",
                       lambda s=s, idx=idx, m=m: derivative_eq_residual(
                           s, idx, m, _grid(-2, 2, 21), 1e-8))


def _scorer(seed: int) -> Iterator[Check]:
    for n in (3, 4):
        s = AirySpec(n, -1)
        for which in ("F", "G"):
            yield (f"scorer {which} n={n} c=-1",
                   lambda s=s, which=which: scorer_residual(
                       s, which, _grid(-1, 1, 5), k=1 if which == "G" else None, tol=1e-7))


def _product(seed: int) -> Iterator[Check]:
    for case in ProductCase:
        yield f"product {case.value}", lambda case=case: product_eq_residual(
            case, _grid(-1.5, 1.5, 13), 1e-7)


HALFLINE_FIXTURES = [
    # (n, c, theta / pi, side)
    (3, -1, 2 / 3, Side.POSITIVE),
    (5, -1, 2 / 3, Side.POSITIVE),
    (5, -1, 4 / 5, Side.POSITIVE),
    (3, 1, 1 / 3, Side.POSITIVE),
    (5, 1, 1 / 3, Side.POSITIVE),
    (3, -1, 1 / 3, Side.NEGATIVE),
    (5, -1, 1 / 3, Side.NEGATIVE),
    (3, 1, 2 / 3, Side.NEGATIVE),
    (3, -1, 1 / 2, Side.BOTH),
    (4, -1, 2 / 4, Side.POSITIVE),
]


def _halfline(seed: int) -> Iterator[Check]:
    for n, c, th, side in HALFLINE_FIXTURES:
        yield (f"halfline n={n} c={c} theta={th:.4g}pi {side.value}",
               lambda n=n, c=c, th=th, side=side: halfline_report(
                   AirySpec(n, c), th * math.pi, side, 1e-6))


def _crossroute(seed: int) -> Iterator[Check]:
    for s in fixture_specs():
        for idx in solution_indices(s):
            yield (f"crossroute n={s.n} c={s.c} {idx}",
                   lambda s=s, idx=idx: cross_route_report(s, idx, _grid(-3, 3, 21)))


def _heat(seed: int) -> Iterator[Check]:
    for terms in (((1, 3),), ((1, 5),), ((1, 3), (1, 5))):
        label = "+".join(f"D{al}" for _, al in terms)
        yield f"heat routes {label}", lambda terms=terms: heat_route_report(HeatSpec(terms, 1))
    for t in (0.5, 1, 2):
        yield f"heat-airy t={t}", lambda t=t: heat_airy_report(t, _grid(-3, 3, 13))


def _moments(seed: int) -> Iterator[Check]:
    qs = [MomentQuery(m, k, 1, 1, "odd") for m in (1, 2, 3) for k in (1, 2, 3)]
    qs += [MomentQuery(m, k, (-1) ** (m + 1), 1, "even") for m in (1, 2, 3) for k in (1, 2)]
    yield "moments closed form", lambda: moment_report(qs)
    pair = [HeatSpec.single(-1, 3, 1), HeatSpec.single(-1, 3, 1)]
    yield "moments multinomial", lambda: multinomial_report(pair, 9)


def _mc(seed: int) -> Iterator[Check]:
    s, idx = AirySpec(3, -1), BranchIndex(1, Branch.MINUS)
    yield "mc n=3 c=-1 (1,-)", lambda: mc_report(s, idx, [0.0, 0.5, 1.0], seed=seed)


def _convolution(seed: int) -> Iterator[Check]:
    yield "convolution (3,3)", lambda: convolution_eq_residual([AirySpec(3, -1), AirySpec(3, -1)])
    yield "convolution (3,5)", lambda: convolution_eq_residual([AirySpec(3, -1), AirySpec(5, 1)])


def _quick(seed: int) -> Iterator[Check]:
    s = AirySpec(3, -1)
    yield "ode n=3 c=-1 (1,-)", lambda: airy_ode_residual(
        s, BranchIndex(1, Branch.MINUS), _grid(-2, 2, 21), 1e-9)
    yield "derivative m=1 n=3 c=-1 (1,-)", lambda: derivative_eq_residual(
        s, BranchIndex(1, Branch.MINUS), 1, _grid(-2, 2, 21), 1e-8)
    yield "product TwoFactor3", lambda: product_eq_residual(
        ProductCase.TWO_FACTOR_3, _grid(-1.5, 1.5, 13), 1e-8)
    yield from list(_halfline(seed))[:2]
    yield "crossroute n=3 c=-1 (1,-)", lambda: cross_route_report(
        s, BranchIndex(1, Branch.MINUS), _grid(-3, 3, 21))
    yield from _moments(seed)


SUITES: dict[str, Callable[[int], Iterator[Check]]] = {
    "quick": _quick,
    "ode": _ode,
    "derivative": _derivative,
    "scorer": _scorer,
    "product": _product,
    "halfline": _halfline,
    "crossroute": _crossroute,
    "heat": _heat,
    "moments": _moments,
    "mc": _mc,
    "convolution": _convolution,
}


def _all(seed: int) -> Iterator[Check]:
    for name, gen in SUITES.items():
        if name not in ("quick", "all"):
            yield from gen(seed)


SUITES["all"] = _all


def run_suite(name: str, seed: int = 0) -> list[tuple[str, ResidualReport]]:
    """Run every check of a suite, in a fixed order."""
    return [(label, check()) for label, check in SUITES[name](seed)]
