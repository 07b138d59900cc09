"""Command-line front end: ``python -m sntail <command> ...`` or ``sntail <command>``.

Every command emits a table (CSV with a header row, or JSON as an array of
flat objects with the same keys).  Floats are written with 17 significant
digits.  Probability levels are passed as ``log10(u)``.

Exit status is 0 on success, 1 on numerical non-convergence or a failed
verification suite, and 2 on invalid arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import specfun as sf
from .bivariate import METHODS, BivSkewNormalLaw, joint_diag_log_cdf, sample
from .errors import ConvergenceError, DomainError, SNTailError
from .quadrature import DEFAULT_QUAD, QuadSpec
from .taildep import (
    conditional_tail_derivative,
    de_haan_check,
    fit_tail_order,
    kappa_target,
    lambda_l_exact,
    lambda_u_exact,
)
from .univariate import (
    SkewNormalLaw,
    capitanio_bounds,
    sn_cdf,
    sn_log_cdf,
    sn_quantile,
    sn_quantile_asymptotic,
    sn_quantile_lambert,
    sn_tail_asymptotic,
)
from .verify import SUITES, run_suites

LOG10 = math.log(10.0)
COMMANDS = ("eval", "quantile", "taildep-table", "verify", "sample", "tail-order")
EVAL_OPS = ("sn-cdf", "sn-log-cdf", "sn-tail-asymptotic", "capitanio", "normal-log-cdf",
            "owen-t", "lambert-w", "joint-log-cdf", "lambda-l", "lambda-u",
            "tail-derivative", "de-haan")
TABLE_HEADER = ("u", "x_u", "lambda_l_exact", "lambda_l_asym", "ratio", "branch")
UPPER_HEADER = ("one_minus_u", "x_u", "lambda_u_exact", "lambda_u_asym", "ratio", "branch")


class UsageError(Exception):
    """Invalid combination of arguments; maps to exit status 2."""


@dataclass
class RunConfig:
    command: str
    theta: float | None = None
    rho: float | None = None
    lam: float | None = None
    log10_u: float | None = None
    log10_u_min: float = -12.0
    log10_u_max: float = -4.0
    steps: int = 5
    n: int = 1000
    seed: int = 0
    start: int = 0
    fmt: str = "csv"
    out: str | None = None
    method: str | None = None
    op: str | None = None
    x: float | None = None
    h: float | None = None
    a: float | None = None
    tail: str = "lower"
    loglog: bool = True
    suites: tuple = ()
    quad: dict = field(default_factory=dict)

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.fmt not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.steps < 1:
            raise UsageError("--steps must be >= 1")
        if self.command in ("taildep-table", "tail-order"):
            if not self.log10_u_min <= self.log10_u_max < 0:
                raise UsageError("need log10u-min <= log10u-max < 0")
        if self.command == "sample" and self.n < 1:
            raise UsageError("--n must be >= 1")
        if self.log10_u is not None and not self.log10_u < 0:
            raise UsageError("--log10u must be negative")
        return self

    def quad_spec(self):
        try:
            return QuadSpec(**{**_quad_defaults(), **self.quad})
        except DomainError as exc:
            raise UsageError(str(exc)) from exc

    def biv_law(self):
        if self.theta is None or self.rho is None:
            raise UsageError(f"{self.command} needs --theta and --rho")
        return BivSkewNormalLaw(self.theta, self.rho, self.quad_spec())

    def uni_law(self):
        if self.lam is not None:
            return SkewNormalLaw(self.lam, self.quad_spec())
        if self.theta is not None and self.rho is not None:
            return self.biv_law().marginal()
        raise UsageError(f"{self.command} needs --lambda (or --theta and --rho for the margin)")

    def log_u(self):
        if self.log10_u is None:
            raise UsageError(f"{self.command} needs --log10u")
        return self.log10_u * LOG10

    def log10_u_grid(self):
        if self.steps == 1:
            return np.array([self.log10_u_max])
        # descending u: the tail deepens down the table
        return np.linspace(self.log10_u_max, self.log10_u_min, self.steps)


def _quad_defaults():
    return {f.name: getattr(DEFAULT_QUAD, f.name) for f in fields(QuadSpec)}


# ---------------------------------------------------------------------------
# commands; each returns (status, header, rows)


def _need(value, flag):
    if value is None:
        raise UsageError(f"--{flag} is required")
    return value


def _cmd_eval(cfg):
    op = _need(cfg.op, "op")
    row = {"op": op}
    if op in ("sn-cdf", "sn-log-cdf", "sn-tail-asymptotic", "capitanio"):
        law = cfg.uni_law()
        x = _need(cfg.x, "x")
        row.update(lam=law.lam, x=x)
        if op == "sn-cdf":
            row["value"] = sn_cdf(law, x)
        elif op == "sn-log-cdf":
            row["value"] = sn_log_cdf(law, x)
        elif op == "sn-tail-asymptotic":
            row["value"] = sn_tail_asymptotic(law, x)
        else:
            row["log_lower"], row["log_upper"] = capitanio_bounds(law, x)
            row["value"] = sn_log_cdf(law, x)
    elif op == "normal-log-cdf":
        row.update(x=_need(cfg.x, "x"))
        row["value"] = sf.log_std_normal_cdf(cfg.x)
    elif op == "owen-t":
        row.update(h=_need(cfg.h, "h"), a=_need(cfg.a, "a"))
        row["value"] = sf.owen_t(cfg.h, cfg.a)
    elif op == "lambert-w":
        row.update(x=_need(cfg.x, "x"))
        row["value"] = sf.lambert_w0(cfg.x)
    elif op == "joint-log-cdf":
        law = cfg.biv_law()
        x = _need(cfg.x, "x")
        row.update(theta=law.theta, rho=law.rho, x=x, method=cfg.method or "auto")
        row["value"] = joint_diag_log_cdf(law, x, method=cfg.method or "auto")
    elif op in ("lambda-l", "lambda-u"):
        law = cfg.biv_law()
        fn = lambda_l_exact if op == "lambda-l" else lambda_u_exact
        p = fn(law, cfg.log_u())
        row.update(theta=law.theta, rho=law.rho, log10u=cfg.log10_u, x_u=p.x_u,
                   value=p.lambda_exact, asymptotic=p.lambda_asym, ratio=p.ratio,
                   branch=p.branch)
    elif op == "tail-derivative":
        law = cfg.biv_law()
        x = _need(cfg.x, "x")
        row.update(theta=law.theta, rho=law.rho, x=x, value=conditional_tail_derivative(law, x))
    elif op == "de-haan":
        law = cfg.biv_law()
        chk = de_haan_check(law, cfg.log_u())
        row.update(theta=law.theta, rho=law.rho, log10u=cfg.log10_u,
                   log_lambda=chk.lhs, log_average=chk.rhs, gap=chk.gap)
    else:
        raise UsageError(f"unknown --op {op!r}; choose from {', '.join(EVAL_OPS)}")
    return 0, list(row), [row]


def _cmd_quantile(cfg):
    law = cfg.uni_law()
    lu = cfg.log_u()
    method = cfg.method or "both"
    if method not in ("exact", "asymptotic", "lambert", "both"):
        raise UsageError("quantile --method is exact, asymptotic, lambert or both")
    row = {"lambda": law.lam, "log10u": cfg.log10_u}
    if method in ("exact", "both"):
        row["exact"] = sn_quantile(law, lu)
    if method in ("asymptotic", "both"):
        row["asymptotic"] = sn_quantile_asymptotic(law, lu)
    if method == "lambert":
        row["lambert"] = sn_quantile_lambert(law, lu)
    if method == "both":
        row["ratio"] = row["exact"] / row["asymptotic"]
    return 0, list(row), [row]


def _cmd_table(cfg):
    law = cfg.biv_law()
    upper = cfg.tail == "upper"
    header = UPPER_HEADER if upper else TABLE_HEADER
    fn = lambda_u_exact if upper else lambda_l_exact
    rows = []
    for e in cfg.log10_u_grid():
        p = fn(law, e * LOG10)
        rows.append(dict(zip(header, (10.0**e, p.x_u, p.lambda_exact, p.lambda_asym,
                                      p.ratio, p.branch))))
    return 0, list(header), rows


def _cmd_verify(cfg):
    results = run_suites(cfg.suites)
    rows = [r.row() for r in results]
    status = 0 if all(r.status == "pass" for r in results) else 1
    header = ["suite", "module", "status", "measured", "threshold", "detail", "seconds"]
    return status, header, rows


def _cmd_sample(cfg):
    law = cfg.biv_law()
    batch = sample(law, cfg.n, cfg.seed, start=cfg.start)
    rows = [{"x1": float(a), "x2": float(b)} for a, b in batch.rows]
    return 0, ["x1", "x2"], rows


def _cmd_tail_order(cfg):
    law = cfg.biv_law()
    fit = fit_tail_order(law, cfg.log10_u_grid() * LOG10, loglog=cfg.loglog)
    target = kappa_target(law)
    row = {"theta": law.theta, "rho": law.rho, "kappa_hat": fit.kappa_hat,
           "kappa_target": target, "rel_gap": fit.kappa_hat / target - 1.0,
           "slope_se": fit.slope_se, "loglog_coef": fit.loglog_coef,
           "intercept": fit.intercept, "points": len(fit.grid)}
    return 0, list(row), [row]


HANDLERS = {"eval": _cmd_eval, "quantile": _cmd_quantile, "taildep-table": _cmd_table,
            "verify": _cmd_verify, "sample": _cmd_sample, "tail-order": _cmd_tail_order}


def run(config: RunConfig):
    """Execute ``config``; returns ``(exit_status, header, rows)``.

    Non-convergence yields status 1 and a single diagnostic row; argument
    problems raise :class:`UsageError`.
    """
    config.validate()
    try:
        return HANDLERS[config.command](config)
    except ConvergenceError as exc:
        row = {"error": type(exc).__name__, "message": str(exc),
               "diagnostics": json.dumps(exc.diagnostics, default=str)}
        return 1, list(row), [row]
    except DomainError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from exc
    except SNTailError as exc:
        row = {"error": type(exc).__name__, "message": str(exc), "diagnostics": "{}"}
        return 1, list(row), [row]


# ---------------------------------------------------------------------------
# serialization


def format_float(v):
    return "%.17g" % v


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def to_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(k, "")) for k in header])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        # JSON has no non-finite numbers
        return format_float(v) if math.isfinite(v) else json.dumps(format_float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return json.dumps(str(v))


def to_json(header, rows):
    objs = []
    for row in rows:
        body = ", ".join(f"{json.dumps(k)}: {_json_value(row.get(k, ''))}" for k in header)
        objs.append("{" + body + "}")
    return "[" + ",\n ".join(objs) + "]\n"


def render(header, rows, fmt):
    return to_csv(header, rows) if fmt == "csv" else to_json(header, rows)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    q = common.add_argument_group("quadrature overrides")
    q.add_argument("--rel-tol", type=float)
    q.add_argument("--abs-log-tol", type=float)
    q.add_argument("--max-nodes", type=int)
    q.add_argument("--bracket-margin", type=float)

    law = argparse.ArgumentParser(add_help=False)
    law.add_argument("--theta", type=float)
    law.add_argument("--rho", type=float)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--log10u-min", dest="log10_u_min", type=float, default=-12.0)
    grid.add_argument("--log10u-max", dest="log10_u_max", type=float, default=-4.0)
    grid.add_argument("--steps", type=int, default=5)

    parser = argparse.ArgumentParser(prog="sntail", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common, law], help="evaluate one operation")
    p.add_argument("--op", required=True, choices=EVAL_OPS)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--log10u", dest="log10_u", type=float)
    p.add_argument("--method", choices=METHODS)

    p = sub.add_parser("quantile", parents=[common, law], help="SN quantile at log10(u)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--log10u", dest="log10_u", type=float, required=True)
    p.add_argument("--method", choices=("exact", "asymptotic", "lambert", "both"),
                   default="both")

    p = sub.add_parser("taildep-table", parents=[common, law, grid],
                       help="exact vs asymptotic tail dependence on a log-spaced grid")
    p.add_argument("--tail", choices=("lower", "upper"), default="lower")

    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    p.add_argument("--suite", dest="suites", action="append", choices=sorted(SUITES),
                   default=[])

    p = sub.add_parser("sample", parents=[common, law], help="draw SN2(theta, R) rows")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", type=int, default=0, help="index of the first row")

    p = sub.add_parser("tail-order", parents=[common, law, grid],
                       help="fit the lower tail order from exact C(u, u)")
    p.add_argument("--no-loglog", dest="loglog", action="store_false")
    return parser


def config_from_args(ns) -> RunConfig:
    names = {f.name for f in fields(RunConfig)} - {"quad"}
    values = {k: v for k, v in vars(ns).items() if k in names}
    values["suites"] = tuple(values.get("suites", ()))
    quad = {k: getattr(ns, k) for k in ("rel_tol", "abs_log_tol", "max_nodes", "bracket_margin")
            if getattr(ns, k, None) is not None}
    return RunConfig(quad=quad, **values)


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        status, header, rows = run(config_from_args(ns))
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    text = render(header, rows, ns.fmt)
    if ns.out:
        with open(ns.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
