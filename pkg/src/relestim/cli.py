"""Command-line interface: fit a dataset, run a Monte Carlo scenario, or
reproduce the Belgium phone-calls case study.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Seeded commands print byte-identical output on repeat runs regardless of
the worker-thread count; timing goes to standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .classical import m_fit, ols_fit, residual_scale
from .data import TabularSource, belgium_dataset, read_dataset
from .exceptions import DataError, EstimationError
from .inner import Classical, ClassicalWithVariance, Robust
from .kernels import PsiKernel, fixed_scale
from .outer import el_fit, fit_report
from .simulate import ESTIMATOR_ORDER, ErrorModel, ScenarioSpec, run_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

THREADS_ENV = "REL_ESTIM_THREADS"

_METHODS = ("ols", "m-huber", "m-tukey", "el", "el-huber", "el-tukey")
_CANONICAL_ESTIMATORS = {name.lower(): name for name in ESTIMATOR_ORDER}


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_with(message))

    def exit_with(self, message):
        print(f"{self.prog}: usage error: {message}", file=sys.stderr)
        return EXIT_USAGE


def _estimator_list(text: str) -> tuple:
    names = []
    for item in text.split(","):
        key = item.strip().lower()
        if key not in _CANONICAL_ESTIMATORS:
            raise argparse.ArgumentTypeError(
                f"unknown estimator {item.strip()!r}; choose from "
                f"{', '.join(ESTIMATOR_ORDER)}"
            )
        names.append(_CANONICAL_ESTIMATORS[key])
    return tuple(dict.fromkeys(names))


def _response_column(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relestim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[], help="fit one dataset from a delimited file")
    fit.add_argument("csv", help="path to the delimited data file")
    fit.add_argument("--method", required=True, choices=_METHODS)
    fit.add_argument("--sigma", type=float, default=None,
                     help="fixed residual scale; for --method el this switches on "
                          "the known-variance constraint")
    fit.add_argument("--tuning", type=float, default=None, help="kernel tuning constant")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", choices=("table", "json", "csv"), default="table")
    fit.add_argument("--multistart", type=int, default=0,
                     help="extra seeded random starts for the outer search")
    fit.add_argument("--delimiter", default=",")
    fit.add_argument("--no-header", action="store_true")
    fit.add_argument("--response", type=_response_column, default=None,
                     help="response column name or 0-based index (default: last)")
    fit.add_argument("--no-intercept", action="store_true")
    fit.set_defaults(handler=_cmd_fit)

    sim = sub.add_parser("simulate", help="run one seeded Monte Carlo scenario")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--k", type=int, required=True)
    sim.add_argument("--contam", type=float, default=0.0,
                     help="outlier mixture weight (paper design: 0 or 0.1)")
    sim.add_argument("--reps", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--estimators", type=_estimator_list, default=ESTIMATOR_ORDER)
    sim.add_argument("--out", choices=("table", "json", "csv"), default="table")
    sim.add_argument("--threads", type=int, default=None,
                     help=f"worker threads (default: ${THREADS_ENV} or up to 4)")
    sim.add_argument("--el-constraint", choices=("classical", "variance"), default="classical",
                     help="constraint set for the EL estimator; 'variance' adds the "
                          "over-identifying known-variance row")
    sim.add_argument("--el-sigma", type=float, default=None,
                     help="known scale for --el-constraint variance "
                          "(default: the error model's nominal scale)")
    sim.add_argument("--truth-mean", type=float, default=0.0)
    sim.add_argument("--truth-scale", type=float, default=1.0)
    sim.add_argument("--redraw-truth", action="store_true",
                     help="draw a fresh truth vector per replication")
    sim.set_defaults(handler=_cmd_simulate)

    bel = sub.add_parser("belgium", help="the Belgium phone-calls case study")
    bel.add_argument("--method", choices=_METHODS, default=None,
                     help="fit one method instead of the four-estimator table")
    bel.add_argument("--sigma", type=float, default=None)
    bel.add_argument("--tuning", type=float, default=None)
    bel.add_argument("--seed", type=int, default=0)
    bel.add_argument("--out", choices=("table", "json", "csv"), default="table")
    bel.set_defaults(handler=_cmd_belgium)

    return parser


def _kernel(kind: str, tuning) -> PsiKernel:
    if kind == "huber":
        return PsiKernel.huber(tuning) if tuning else PsiKernel.huber()
    return PsiKernel.tukey(tuning) if tuning else PsiKernel.tukey()


def _fit_with_method(data, method, sigma=None, tuning=None, seed=0, multistart=0):
    """Dispatch one of the six fitting methods and return its report dict."""
    if method == "ols":
        return fit_report(ols_fit(data), data)
    if method in ("m-huber", "m-tukey"):
        scale = fixed_scale(sigma) if sigma is not None else None
        fit = m_fit(data, _kernel(method.removeprefix("m-"), tuning), scale=scale)
        return fit_report(fit, data)
    if method == "el":
        mode = ClassicalWithVariance(sigma) if sigma is not None else Classical()
    else:
        scale = (
            fixed_scale(sigma)
            if sigma is not None
            else residual_scale(ols_fit(data).residuals)
        )
        mode = Robust(_kernel(method.removeprefix("el-"), tuning), scale)
    fit = el_fit(data, mode, seed=seed, extra_starts=multistart)
    return fit_report(fit, data)


def _flatten_report(report: dict):
    """(key, value) rows with vector entries expanded, in sorted key order."""
    for key in sorted(report):
        value = report[key]
        if isinstance(value, dict):
            for sub in sorted(value):
                yield f"{key}.{sub}", value[sub]
        elif isinstance(value, list):
            for i, item in enumerate(value):
                yield f"{key}_{i}", item
        else:
            yield key, value


def _emit_fit(report: dict, names, out: str) -> None:
    if out == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
        return
    if out == "csv":
        print("field,value")
        for key, value in _flatten_report(report):
            print(f"{key},{value}")
        return
    print(f"method: {report['method']}    n={report['n']}  k={report['k']}")
    for name, value in zip(names, report["coefficients"]):
        print(f"  {name:<12} {value: .6g}")
    if "sigma" in report:
        print(f"  sigma        {report['sigma']: .6g}  ({report['sigma_method']})")
    if "log_el" in report:
        print(f"  log-EL       {report['log_el']: .10g}")
    print(f"  converged    {report['converged']}")


def _cmd_fit(args) -> None:
    src = TabularSource(
        path=args.csv,
        delimiter=args.delimiter,
        has_header=not args.no_header,
        response=args.response,
        intercept=not args.no_intercept,
    )
    data = read_dataset(src)
    report = _fit_with_method(
        data, args.method, sigma=args.sigma, tuning=args.tuning,
        seed=args.seed, multistart=args.multistart,
    )
    _emit_fit(report, data.names, args.out)


def _resolve_threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else None


def _cmd_simulate(args) -> None:
    spec = ScenarioSpec(
        n=args.n,
        k=args.k,
        error_model=ErrorModel(contamination=args.contam),
        replications=args.reps,
        seed=args.seed,
        estimators=args.estimators,
        truth_mean=args.truth_mean,
        truth_scale=args.truth_scale,
        redraw_truth=args.redraw_truth,
        el_constraint=args.el_constraint,
        el_sigma=args.el_sigma,
    )
    report = run_scenario(spec, threads=_resolve_threads(args))
    print(f"simulate: {spec.replications} replications in {report.runtime:.2f}s",
          file=sys.stderr)
    if args.out == "json":
        print(json.dumps(report.to_json_dict(), sort_keys=True, indent=2))
    elif args.out == "csv":
        print("\n".join(report.csv_lines()))
    else:
        names = [e for e in ESTIMATOR_ORDER if e in spec.estimators]
        print(f"scenario: n={spec.n} k={spec.k} "
              f"contamination={spec.error_model.contamination} "
              f"replications={spec.replications} seed={spec.seed}")
        print(f"{'estimator':<10} {'MSE':>12} {'RE':>12} {'excluded':>9}")
        for name in names:
            mse_txt = f"{report.mse[name]:.6g}" if report.mse[name] is not None else "-"
            re_txt = f"{report.re[name]:.6g}" if report.re[name] is not None else "-"
            print(f"{name:<10} {mse_txt:>12} {re_txt:>12} {report.failures[name]:>9}")


_BELGIUM_TABLE_METHODS = ("ols", "el", "el-huber", "el-tukey")
_BELGIUM_LABELS = {"ols": "OLS", "el": "EL", "el-huber": "EL-Huber", "el-tukey": "EL-Tukey"}


def _cmd_belgium(args) -> None:
    data = belgium_dataset()
    if args.method is not None:
        report = _fit_with_method(
            data, args.method, sigma=args.sigma, tuning=args.tuning, seed=args.seed
        )
        _emit_fit(report, data.names, args.out)
        return

    estimates = {}
    for method in _BELGIUM_TABLE_METHODS:
        report = _fit_with_method(
            data, method, sigma=args.sigma, tuning=args.tuning, seed=args.seed
        )
        estimates[_BELGIUM_LABELS[method]] = report["coefficients"]

    if args.out == "json":
        print(json.dumps({"schema_version": 1, "estimates": estimates},
                         sort_keys=True, indent=2))
    elif args.out == "csv":
        print("estimator," + ",".join(data.names))
        for label, beta in estimates.items():
            print(label + "," + ",".join(repr(v) for v in beta))
    else:
        labels = list(estimates)
        print(f"{'':<12}" + "".join(f"{label:>12}" for label in labels))
        for j, name in enumerate(data.names):
            row = "".join(f"{estimates[label][j]:>12.4f}" for label in labels)
            print(f"{name:<12}" + row)


def cli_main(argv=None) -> int:
    """Run the CLI; returns the process exit code instead of raising."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else int(exc.code)

    stage = args.command
    try:
        args.handler(args)
    except (DataError, OSError) as exc:
        print(f"{stage}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"{stage}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EstimationError as exc:
        print(f"{stage}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
