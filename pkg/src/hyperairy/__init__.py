"""Generalized Airy functions, hyper-Airy kernels and higher-order heat equations."""

__version__ = "0.1.0"

from .core import (AirySpec, AngleCoefficients, AngleForm, Branch, BranchIndex, CaseClass,
                   GridTooCoarse, HyperAiryError, IndexOutOfRange, InvalidSpec,
                   MethodInadmissible, MomentOverflow, NonConvergent, NumericalFailure,
                   PreconditionViolated, SignConditionViolated, TruncationTooSmall,
                   UnsupportedSpec, angle_coefficients, classify, solution_indices)
from .series import eval_series, series_coefficients, series_derivative, series_eval
from .quadrature import IntegrandSpec, QuadratureResult, Shape, Strategy, Trig, integrate
from .airy import (EvalMethod, EvalResult, HyperAirySpec, Side, eval_best, eval_hyper_airy,
                   eval_scorer, eval_solution, halfline_integral, halfline_integral_numeric,
                   integral_base, integral_rotated)
from .heat import (GridFunction, GridShape, HeatSpec, HeatTerm, MomentQuery, heat_convolution_grid,
                   heat_eval, moment_closed_form, moment_numeric, sum_moments)
from .verify import (ResidualReport, airy_ode_residual, convolution_eq_residual,
                     derivative_eq_residual, gamma_expectation_check, product_eq_residual,
                     scorer_residual)

__all__ = [
    "__version__",
    "AirySpec",
    "AngleCoefficients",
    "AngleForm",
    "Branch",
    "BranchIndex",
    "CaseClass",
    "EvalMethod",
    "EvalResult",
    "GridFunction",
    "GridShape",
    "GridTooCoarse",
    "HeatSpec",
    "HeatTerm",
    "HyperAiryError",
    "HyperAirySpec",
    "IndexOutOfRange",
    "IntegrandSpec",
    "InvalidSpec",
    "MethodInadmissible",
    "MomentOverflow",
    "MomentQuery",
    "NonConvergent",
    "NumericalFailure",
    "PreconditionViolated",
    "QuadratureResult",
    "ResidualReport",
    "Shape",
    "Side",
    "SignConditionViolated",
    "Strategy",
    "Trig",
    "TruncationTooSmall",
    "UnsupportedSpec",
    "airy_ode_residual",
    "angle_coefficients",
    "classify",
    "convolution_eq_residual",
    "derivative_eq_residual",
    "eval_best",
    "eval_hyper_airy",
    "eval_scorer",
    "eval_series",
    "eval_solution",
    "gamma_expectation_check",
    "halfline_integral",
    "halfline_integral_numeric",
    "heat_convolution_grid",
    "heat_eval",
    "integral_base",
    "integral_rotated",
    "integrate",
    "moment_closed_form",
    "moment_numeric",
    "product_eq_residual",
    "scorer_residual",
    "series_coefficients",
    "series_derivative",
    "series_eval",
    "solution_indices",
    "sum_moments",
]
