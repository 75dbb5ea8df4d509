"""Command-line front end.

Every subcommand writes CSV (default) or JSON to stdout or ``--out``.  CSV
starts with ``#``-prefixed metadata lines carrying the full configuration,
followed by a header row.  Exit status: 0 success, 1 invalid input,
2 numerical failure, 3 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .airy import (EvalMethod, Side, eval_hyper_airy, eval_scorer,
                   eval_solution, halfline_integral, halfline_integral_numeric)
from .core import (AirySpec, Branch, BranchIndex, HyperAiryError, InvalidSpec,
                   NumericalFailure, base_theta, check_index, solution_indices)
from .heat import (GridShape, HeatSpec, HeatTerm, MomentQuery, heat_convolution_grid,
                   heat_eval, moment_closed_form)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def rational(text: str) -> Fraction:
    """Parse an exact rational such as ``-1``, ``0.5`` or ``-3/2``."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from e


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


# ----------------------------------------------------------------- output

class Table:
    def __init__(self, command: str, config: dict, columns: list[str]):
        self.command = command
        self.config = config
        self.columns = columns
        self.rows: list[list] = []

    def add(self, *row):
        self.rows.append(list(row))

    def csv(self) -> str:
        lines = [f"# hyperairy {__version__} {self.command}"]
        for k in sorted(self.config):
            lines.append(f"# {k}={self.config[k]}")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows([_fmt(v) for v in r] for r in self.rows)
        return "\n".join(lines) + "\n" + buf.getvalue()

    def json(self) -> str:
        def conv(v):
            if isinstance(v, Fraction):
                return str(v) if v.denominator != 1 else int(v)
            if isinstance(v, float) and not math.isfinite(v):
                return str(v)
            return v
        body = {"command": self.command, "config": self.config,
                "columns": self.columns,
                "rows": [[conv(v) for v in r] for r in self.rows]}
        return json.dumps(body, sort_keys=True) + "\n"


def _xs(args) -> list[float]:
    if args.x is not None:
        return [float(args.x)]
    if args.x0 is None or args.x1 is None:
        raise InvalidSpec("give --x or both --x0 and --x1")
    if args.steps < 2:
        raise InvalidSpec("--steps must be >= 2")
    x0, x1 = Fraction(args.x0), Fraction(args.x1)
    if not x1 > x0:
        raise InvalidSpec("--x1 must exceed --x0")
    # exact grid, rounded once
    return [float(x0 + (x1 - x0) * Fraction(i, args.steps - 1)) for i in range(args.steps)]


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "out", "format") or v is None:
            continue
        if isinstance(v, list):
            v = " ".join(str(x) for x in v)
        out[k] = str(v)
    return out


def _add_x(p):
    p.add_argument("--x", type=rational)
    p.add_argument("--x0", type=rational)
    p.add_argument("--x1", type=rational)
    p.add_argument("--steps", type=int, default=21)


def _add_common(p):
    p.add_argument("--tol", type=rational, default=Fraction(1, 10 ** 12))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")


def _check_tol(args):
    if hasattr(args, "tol") and not 0 < args.tol < 1:
        raise InvalidSpec("--tol must lie in (0, 1)")


def _airy_spec(args) -> AirySpec:
    return AirySpec(args.n, args.c)


def _value_columns(values) -> bool:
    return any(isinstance(v, complex) for v in values)


# ------------------------------------------------------------- commands

def cmd_eval(args) -> Table:
    spec = _airy_spec(args)
    idx = BranchIndex(args.k, Branch.parse(args.branch))
    check_index(spec, idx)
    xs = _xs(args)
    res = [eval_solution(spec, idx, x, EvalMethod(args.method), float(args.tol), args.derivative)
           for x in xs]
    vals = [r.value for r in res]
    if _value_columns(vals):
        t = Table("eval", _config(args), ["x", "value_re", "value_im", "abs_err"])
        for x, r in zip(xs, res):
            v = complex(r.value)
            t.add(x, v.real, v.imag, r.abs_error)
    else:
        t = Table("eval", _config(args), ["x", "value", "abs_err"])
        for x, r in zip(xs, res):
            t.add(x, r.value, r.abs_error)
    return t


def cmd_hyperairy(args) -> Table:
    xs = _xs(args)
    t = Table("hyperairy", _config(args), ["x", "value"])
    for x in xs:
        t.add(x, eval_hyper_airy(float(args.alpha), x, float(args.tol), args.route))
    return t


def cmd_scorer(args) -> Table:
    spec = _airy_spec(args)
    xs = _xs(args)
    res = [eval_scorer(spec, args.which, x, args.k, float(args.tol), args.derivative) for x in xs]
    if _value_columns([r.value for r in res]):
        t = Table("scorer", _config(args), ["x", "value_re", "value_im", "abs_err"])
        for x, r in zip(xs, res):
            v = complex(r.value)
            t.add(x, v.real, v.imag, r.abs_error)
    else:
        t = Table("scorer", _config(args), ["x", "value", "abs_err"])
        for x, r in zip(xs, res):
            t.add(x, r.value, r.abs_error)
    return t


def _parse_term(text: str) -> HeatTerm:
    try:
        a, alpha = text.split(":")
    except ValueError as e:
        raise InvalidSpec(f"term must look like a:alpha, got {text!r}") from e
    return HeatTerm(float(rational(a)), float(rational(alpha)))


def cmd_heat(args) -> Table:
    spec = HeatSpec(tuple(_parse_term(s) for s in args.term), float(args.t))
    t = Table("heat", _config(args), ["x", "value"])
    if args.route == "pointwise":
        for x in _xs(args):
            t.add(x, heat_eval(spec, x, float(args.tol)))
        return t
    if args.x is not None:
        raise InvalidSpec("the convolution route needs a grid (--x0 --x1 --steps)")
    xs = _xs(args)
    grid = GridShape(xs[0], float((Fraction(args.x1) - Fraction(args.x0)) / (len(xs) - 1)), len(xs))
    g = heat_convolution_grid(spec, grid, float(args.tol))
    for x, v in zip(xs, g.values.tolist()):
        t.add(x, v)
    return t


def cmd_moments(args) -> Table:
    q = MomentQuery(args.m, args.k, args.a, args.t, args.parity)
    t = Table("moments", _config(args), ["order", "value"])
    t.add(q.order, moment_closed_form(q, exact=not args.float))
    return t


def cmd_halfline(args) -> Table:
    spec = _airy_spec(args)
    if (args.theta is None) == (args.theta_k is None):
        raise InvalidSpec("give exactly one of --theta and --theta-k")
    theta = float(args.theta) * math.pi if args.theta is not None else base_theta(spec, args.theta_k)
    side = Side(args.side)
    closed = halfline_integral(spec, theta, side)
    if args.numeric:
        num = halfline_integral_numeric(spec, theta, side, float(args.tol))
        t = Table("halfline", _config(args), ["theta", "value", "numeric"])
        t.add(theta, closed, num)
    else:
        t = Table("halfline", _config(args), ["theta", "value"])
        t.add(theta, closed)
    return t


def cmd_table(args) -> Table:
    spec = _airy_spec(args)
    idxs = solution_indices(spec)
    xs = _xs(args)
    cols = ["x"]
    complex_cols = []
    values = []
    for idx in idxs:
        vs = [eval_solution(spec, idx, x, EvalMethod(args.method), float(args.tol)).value for x in xs]
        values.append(vs)
        name = f"y_{idx.k}{'p' if idx.branch is Branch.PLUS else 'm'}"
        if _value_columns(vs):
            cols += [name + "_re", name + "_im"]
            complex_cols.append(True)
        else:
            cols.append(name)
            complex_cols.append(False)
    t = Table("table", _config(args), cols)
    for i, x in enumerate(xs):
        row = [x]
        for vs, cx in zip(values, complex_cols):
            if cx:
                row += [complex(vs[i]).real, complex(vs[i]).imag]
            else:
                row.append(vs[i])
        t.add(*row)
    return t


def cmd_verify(args) -> Table:
    from .suites import SUITES, run_suite
    if args.suite not in SUITES:
        raise InvalidSpec(f"unknown suite {args.suite!r}")
    t = Table("verify", _config(args), ["check", "passed", "max_abs_residual", "tolerance"])
    for name, rep in run_suite(args.suite, seed=args.seed):
        t.add(name, int(rep.passed), rep.max_abs_residual, rep.tolerance_used)
    t.failed = any(not r[1] for r in t.rows)
    return t


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperairy", description="Generalized Airy functions, "
                "hyper-Airy kernels and higher-order heat-type equations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate a solution y_k^(+/-)")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--c", type=rational, required=True)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--branch", required=True)
    e.add_argument("--method", choices=[m.value for m in EvalMethod], default="auto")
    e.add_argument("--derivative", type=int, default=0)
    _add_x(e)
    _add_common(e)
    e.set_defaults(func=cmd_eval)

    h = sub.add_parser("hyperairy", help="hyper-Airy function A_alpha")
    h.add_argument("--alpha", type=rational, required=True)
    h.add_argument("--route", choices=("oscillatory", "damped"), default="oscillatory")
    _add_x(h)
    _add_common(h)
    h.set_defaults(func=cmd_hyperairy)

    s = sub.add_parser("scorer", help="Scorer-type solutions f and g_k")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c", type=rational, required=True)
    s.add_argument("--which", choices=("F", "G"), required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--derivative", type=int, default=0)
    _add_x(s)
    _add_common(s)
    s.set_defaults(func=cmd_scorer)

    ht = sub.add_parser("heat", help="fundamental solution u(t, x)")
    ht.add_argument("--term", action="append", required=True,
                    help="a:alpha, repeatable (e.g. --term 1:3 --term 1:5)")
    ht.add_argument("--t", type=rational, required=True)
    ht.add_argument("--route", choices=("pointwise", "convolution"), default="pointwise")
    _add_x(ht)
    _add_common(ht)
    ht.set_defaults(func=cmd_heat)

    m = sub.add_parser("moments", help="closed-form signed moments")
    m.add_argument("--parity", choices=("odd", "even"), required=True)
    m.add_argument("--m", type=int, required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--a", type=rational, required=True)
    m.add_argument("--t", type=rational, required=True)
    m.add_argument("--float", action="store_true", help="floating output instead of exact")
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.add_argument("--out")
    m.set_defaults(func=cmd_moments)

    hl = sub.add_parser("halfline", help="half-line integrals of the damped-sine family")
    hl.add_argument("--n", type=int, required=True)
    hl.add_argument("--c", type=rational, required=True)
    hl.add_argument("--theta", type=rational, help="angle as a multiple of pi")
    hl.add_argument("--theta-k", type=int, help="use the base angle of index k")
    hl.add_argument("--side", choices=[s.value for s in Side], required=True)
    hl.add_argument("--numeric", action="store_true")
    hl.add_argument("--tol", type=rational, default=Fraction(1, 10 ** 8))
    hl.add_argument("--format", choices=("csv", "json"), default="csv")
    hl.add_argument("--out")
    hl.set_defaults(func=cmd_halfline)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="quick")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--format", choices=("csv", "json"), default="csv")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    tb = sub.add_parser("table", help="tabulate all independent solutions")
    tb.add_argument("--n", type=int, required=True)
    tb.add_argument("--c", type=rational, required=True)
    tb.add_argument("--method", choices=[m.value for m in EvalMethod], default="auto")
    _add_x(tb)
    _add_common(tb)
    tb.set_defaults(func=cmd_table)
    return p


def _fail(code: str, msg: str, status: int) -> int:
    msg = msg.replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")
    print(f'code={code} msg="{msg}"', file=sys.stderr)
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_tol(args)
        table = args.func(args)
    except _UsageError as e:
        return _fail("Usage", str(e), EXIT_INVALID)
    except NumericalFailure as e:
        return _fail(e.code, str(e), EXIT_NUMERIC)
    except HyperAiryError as e:
        return _fail(e.code, str(e), EXIT_INVALID)
    except (ValueError, argparse.ArgumentTypeError) as e:
        return _fail("InvalidSpec", str(e), EXIT_INVALID)
    text = table.json() if args.format == "json" else table.csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if getattr(table, "failed", False):
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
