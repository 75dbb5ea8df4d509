"""Domain types and case classification for y^(n-1) + c x y = 0."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Real = Union[int, float, Fraction]


class HyperAiryError(Exception):
    """Base class; ``code`` is the machine-readable name used by the CLI."""

    code = "ERROR"


class InvalidSpec(HyperAiryError, ValueError):
    code = "InvalidSpec"


class IndexOutOfRange(HyperAiryError, ValueError):
    code = "IndexOutOfRange"


class TruncationTooSmall(HyperAiryError, ValueError):
    code = "TruncationTooSmall"


class MethodInadmissible(HyperAiryError, ValueError):
    code = "MethodInadmissible"


class PreconditionViolated(HyperAiryError, ValueError):
    code = "PreconditionViolated"


class SignConditionViolated(HyperAiryError, ValueError):
    code = "SignConditionViolated"


class UnsupportedSpec(HyperAiryError, ValueError):
    code = "UnsupportedSpec"


class NumericalFailure(HyperAiryError, ArithmeticError):
    """Base for failures of a numerical route (CLI exit status 2)."""

    code = "NumericalFailure"


class NonConvergent(NumericalFailure):
    code = "NonConvergent"


class GridTooCoarse(NumericalFailure):
    code = "GridTooCoarse"


class MomentOverflow(NumericalFailure, OverflowError):
    code = "Overflow"


class CaseClass(enum.Enum):
    ODD_OR_EVEN_NEG_C = "OddOrEvenNegC"
    EVEN_POS_C = "EvenPosC"


class Branch(enum.Enum):
    PLUS = "+"
    MINUS = "-"

    @classmethod
    def parse(cls, text: str) -> "Branch":
        t = text.strip().lower()
        if t in ("+", "plus", "p"):
            return cls.PLUS
        if t in ("-", "minus", "m"):
            return cls.MINUS
        raise ValueError(f"unknown branch {text!r}")


class AngleForm(enum.Enum):
    BASE = "base"
    ROTATED_UPPER = "upper"
    ROTATED_LOWER = "lower"


@dataclass(frozen=True)
class AirySpec:
    """The ODE y^(n-1) + c x y = 0; ``n`` is one more than the ODE order."""

    n: int
    c: Real

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise InvalidSpec(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.n < 2:
            raise InvalidSpec(f"n must be >= 2, got {self.n}")
        if not math.isfinite(float(self.c)) or self.c == 0:
            raise InvalidSpec(f"c must be finite and nonzero, got {self.c!r}")

    @property
    def cf(self) -> float:
        return float(self.c)

    @property
    def case(self) -> CaseClass:
        return classify(self)

    @property
    def damping(self) -> float:
        """|c|^(n-1): strength of the w^n/n damping in the integral forms."""
        return abs(self.cf) ** (self.n - 1)

    @property
    def gaussian(self) -> bool:
        return self.n == 2


@dataclass(frozen=True)
class BranchIndex:
    k: int
    branch: Branch

    def __str__(self):
        return f"({self.k},{self.branch.value})"


@dataclass(frozen=True)
class AngleCoefficients:
    a: float
    b: float
    theta: float


def classify(spec: AirySpec) -> CaseClass:
    if spec.n % 2 == 1 or spec.c < 0:
        return CaseClass.ODD_OR_EVEN_NEG_C
    return CaseClass.EVEN_POS_C


def solution_indices(spec: AirySpec) -> list[BranchIndex]:
    n = spec.n
    if classify(spec) is CaseClass.ODD_OR_EVEN_NEG_C:
        out = []
        for k in range(1, n // 2 + 1):
            out.append(BranchIndex(k, Branch.PLUS))
            if 2 * k != n:
                out.append(BranchIndex(k, Branch.MINUS))
        return out
    plus = [BranchIndex(k, Branch.PLUS) for k in range(1, n // 2)]
    minus = [BranchIndex(k, Branch.MINUS) for k in range(0, n // 2)]
    return plus + minus


def check_index(spec: AirySpec, idx: BranchIndex) -> None:
    n, k = spec.n, idx.k
    if classify(spec) is CaseClass.ODD_OR_EVEN_NEG_C:
        if not 1 <= k <= n // 2:
            raise IndexOutOfRange(f"k={k} outside 1..{n // 2} for n={n}")
        if idx.branch is Branch.MINUS and 2 * k == n:
            # y_{n/2}^- vanishes identically
            raise IndexOutOfRange(f"(k={k}, minus) is the zero function for n={n}")
    else:
        lo = 1 if idx.branch is Branch.PLUS else 0
        if not lo <= k <= n // 2 - 1:
            raise IndexOutOfRange(
                f"k={k} outside {lo}..{n // 2 - 1} for n={n}, c>0, branch {idx.branch.value}")


def base_theta(spec: AirySpec, k: int) -> float:
    if classify(spec) is CaseClass.ODD_OR_EVEN_NEG_C:
        return 2 * k * math.pi / spec.n
    return (2 * k + 1) * math.pi / spec.n


def angle_coefficients(spec: AirySpec, idx: BranchIndex,
                       form: AngleForm = AngleForm.BASE) -> AngleCoefficients:
    check_index(spec, idx)
    n, k = spec.n, idx.k
    if form is AngleForm.BASE:
        theta = base_theta(spec, k)
    else:
        if classify(spec) is not CaseClass.ODD_OR_EVEN_NEG_C:
            raise IndexOutOfRange("rotated forms exist only for n odd or c < 0")
        if 2 * k >= n:
            raise IndexOutOfRange(f"rotated forms need k < n/2, got k={k}, n={n}")
        sign = 1 if form is AngleForm.ROTATED_UPPER else -1
        theta = (4 * k + sign) * math.pi / (2 * n)
    theta = math.fmod(theta, 2 * math.pi)
    return AngleCoefficients(math.cos(theta), math.sin(theta), theta)
