"""Seeded Monte Carlo comparison of OLS, EL, and robust-EL estimators.

Replications are independent tasks seeded by (scenario seed, replication,
purpose), so serial and parallel runs produce bit-identical reports.

The EL estimator uses the plain classical constraint set by default.  Its
profile maximum coincides with the OLS root (just-identified moments), so
the EL column reproduces OLS exactly; this is a property of the estimator,
not of the optimizer.  ``el_constraint="variance"`` switches to the
over-identified known-variance mode, where EL genuinely departs from OLS
(``el_sigma`` supplies the known scale, defaulting to the error model's
nominal scale).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from os import cpu_count

import numpy as np

from .classical import ols_fit
from .data import Dataset
from .exceptions import InfeasibleStart
from .inner import Classical, ClassicalWithVariance, Robust
from .kernels import PsiKernel
from .outer import el_fit

ESTIMATOR_ORDER = ("OLS", "EL", "EL-Huber", "EL-Tukey")

_PURPOSE_TRUTH = 0
_PURPOSE_DESIGN = 1
_PURPOSE_ERRORS = 2
_PURPOSE_EL_SEED = 3


@dataclass(frozen=True)
class ErrorModel:
    """A normal error distribution, optionally contaminated by a shifted
    normal component of the same scale (y-direction outliers)."""

    contamination: float = 0.0
    shift: float = 20.0
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.contamination < 1.0:
            raise ValueError("contamination weight must lie in [0, 1)")
        if self.scale < 0.0:
            raise ValueError("scale must be nonnegative")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        errors = self.scale * rng.standard_normal(size)
        if self.contamination > 0.0:
            outliers = rng.random(size) < self.contamination
            errors = errors + self.shift * outliers
        return errors


@dataclass(frozen=True)
class ScenarioSpec:
    """One Monte Carlo cell: dimensions, error model, seeding, estimators."""

    n: int
    k: int
    error_model: ErrorModel = ErrorModel()
    replications: int = 100
    seed: int = 0
    estimators: tuple = ESTIMATOR_ORDER
    beta_truth: tuple | None = None  # fixed truth; None draws it (seeded)
    truth_mean: float = 0.0
    truth_scale: float = 1.0
    redraw_truth: bool = False  # fresh truth per replication instead of once
    el_constraint: str = "classical"  # "classical" or "variance"
    el_sigma: float | None = None  # known scale for the variance constraint

    def __post_init__(self):
        if self.n <= self.k:
            raise ValueError("need more observations than parameters")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        unknown = set(self.estimators) - set(ESTIMATOR_ORDER)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")
        if self.el_constraint not in ("variance", "classical"):
            raise ValueError("el_constraint must be 'classical' or 'variance'")
        if self.beta_truth is not None and len(self.beta_truth) != self.k:
            raise ValueError("beta_truth must have length k")
        if self.el_constraint == "variance":
            sigma = self.el_sigma if self.el_sigma is not None else self.error_model.scale
            if not sigma > 0:
                raise ValueError("variance-constrained EL needs a positive known scale")


def _stream(seed: int, replication: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(replication, purpose))
    )


def _truth(spec: ScenarioSpec, rep_index: int) -> np.ndarray:
    if spec.beta_truth is not None:
        return np.asarray(spec.beta_truth, dtype=float)
    stream_rep = rep_index + 1 if spec.redraw_truth else 0
    rng = _stream(spec.seed, stream_rep, _PURPOSE_TRUTH)
    return spec.truth_mean + spec.truth_scale * rng.standard_normal(spec.k)


def generate_replication(spec: ScenarioSpec, rep_index: int):
    """Seeded data for one replication: standard-normal design, model errors.

    Returns ``(dataset, beta_truth)``.  The truth is drawn once per scenario
    (or per replication with ``redraw_truth``) and the per-replication
    streams are keyed by (seed, replication, purpose), so any subset of
    replications can be regenerated independently and identically.
    """
    truth = _truth(spec, rep_index)
    X = _stream(spec.seed, rep_index + 1, _PURPOSE_DESIGN).standard_normal((spec.n, spec.k))
    errors = spec.error_model.draw(_stream(spec.seed, rep_index + 1, _PURPOSE_ERRORS), spec.n)
    return Dataset(X, X @ truth + errors), truth


def mse(errors) -> float:
    """Mean squared Euclidean norm of the coefficient errors."""
    errors = np.atleast_2d(np.asarray(errors, dtype=float))
    if errors.size == 0:
        raise ValueError("need at least one error vector")
    return float(np.mean(np.sum(errors**2, axis=1)))


def relative_efficiency(errors_est, errors_ols) -> float:
    """Ratio of summed (unsquared) error norms against the OLS errors."""
    est = np.atleast_2d(np.asarray(errors_est, dtype=float))
    ols = np.atleast_2d(np.asarray(errors_ols, dtype=float))
    if est.shape != ols.shape or est.size == 0:
        raise ValueError("need equal-length nonempty error lists")
    denominator = float(np.linalg.norm(ols, axis=1).sum())
    if denominator == 0.0:
        raise ZeroDivisionError("OLS errors are all zero; relative efficiency undefined")
    return float(np.linalg.norm(est, axis=1).sum()) / denominator


def _el_seed(spec: ScenarioSpec, rep_index: int) -> int:
    seq = np.random.SeedSequence(entropy=spec.seed, spawn_key=(rep_index + 1, _PURPOSE_EL_SEED))
    return int(seq.generate_state(1)[0])


def _replicate(spec: ScenarioSpec, rep_index: int) -> dict:
    """Fit every requested estimator on one replication.

    Returns estimator name -> coefficient error vector, or None for an EL
    fit whose inner problem was infeasible at every tried start.
    """
    data, truth = generate_replication(spec, rep_index)
    ols = ols_fit(data)
    scale = ols.sigma
    seed = _el_seed(spec, rep_index)

    results = {}
    for name in spec.estimators:
        if name == "OLS":
            results[name] = ols.beta - truth
            continue
        if name == "EL":
            if spec.el_constraint == "variance":
                sigma = spec.el_sigma if spec.el_sigma is not None else spec.error_model.scale
                mode = ClassicalWithVariance(sigma)
            else:
                mode = Classical()
            start = ols.beta
        elif name == "EL-Huber":
            mode = Robust(PsiKernel.huber(), scale)
            start = None
        else:  # EL-Tukey
            mode = Robust(PsiKernel.tukey(), scale)
            start = None
        try:
            fit = el_fit(data, mode, start=start, seed=seed)
        except InfeasibleStart:
            results[name] = None
        else:
            results[name] = fit.beta - truth
    return results


@dataclass
class ScenarioReport:
    """Aggregated Monte Carlo results for one scenario."""

    spec: ScenarioSpec
    errors: dict  # estimator -> list of per-replication error vectors (None = failed)
    mse: dict  # estimator -> float
    re: dict  # estimator -> float or None (undefined without successful OLS)
    failures: dict  # estimator -> excluded replication count
    runtime: float = field(default=0.0, compare=False)

    def to_json_dict(self) -> dict:
        """JSON-ready dict; deliberately excludes the (volatile) runtime."""
        return {
            "schema_version": 1,
            "scenario": {
                "n": self.spec.n,
                "k": self.spec.k,
                "error_model": {
                    "contamination": self.spec.error_model.contamination,
                    "shift": self.spec.error_model.shift,
                    "scale": self.spec.error_model.scale,
                },
                "replications": self.spec.replications,
                "seed": self.spec.seed,
                "estimators": list(self.spec.estimators),
                "el_constraint": self.spec.el_constraint,
                "el_sigma": self.spec.el_sigma,
                "truth_mean": self.spec.truth_mean,
                "truth_scale": self.spec.truth_scale,
                "redraw_truth": self.spec.redraw_truth,
                "beta_truth": None if self.spec.beta_truth is None else list(self.spec.beta_truth),
            },
            "mse": self.mse,
            "re": self.re,
            "failures": self.failures,
            "errors": {
                name: [None if e is None else list(e) for e in errs]
                for name, errs in self.errors.items()
            },
        }

    def csv_lines(self) -> list:
        """One header line and one data row, Tables-style: k, n, then
        per-estimator MSE / RE / excluded-replication columns."""
        names = [e for e in ESTIMATOR_ORDER if e in self.spec.estimators]
        header, row = ["k", "n"], [str(self.spec.k), str(self.spec.n)]
        for name in names:
            header.append(f"mse_{name}")
            row.append(repr(self.mse[name]) if self.mse.get(name) is not None else "")
        for name in names:
            if name == "OLS":
                continue
            header.append(f"re_{name}")
            row.append(repr(self.re[name]) if self.re.get(name) is not None else "")
        for name in names:
            header.append(f"excluded_{name}")
            row.append(str(self.failures[name]))
        return [",".join(header), ",".join(row)]


def run_scenario(spec: ScenarioSpec, threads: int | None = None) -> ScenarioReport:
    """Run all replications, in parallel when ``threads`` allows, and
    aggregate MSE and relative efficiency in replication order.

    Per-replication estimator failures (infeasible EL starts) are excluded
    from the aggregates and counted in ``failures``; they are data, not
    faults.
    """
    if threads is None:
        threads = min(4, cpu_count() or 1)
    started = time.perf_counter()

    reps = range(spec.replications)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_rep = list(pool.map(lambda r: _replicate(spec, r), reps))
    else:
        per_rep = [_replicate(spec, r) for r in reps]

    errors = {name: [rep[name] for rep in per_rep] for name in spec.estimators}
    failures = {name: sum(e is None for e in errs) for name, errs in errors.items()}
    mse_table = {}
    for name, errs in errors.items():
        ok = [e for e in errs if e is not None]
        mse_table[name] = mse(ok) if ok else None

    re_table = {}
    ols_errors = errors.get("OLS")
    for name, errs in errors.items():
        if ols_errors is None:
            re_table[name] = None
            continue
        paired = [(e, o) for e, o in zip(errs, ols_errors) if e is not None and o is not None]
        if not paired:
            re_table[name] = None
            continue
        try:
            re_table[name] = relative_efficiency([p[0] for p in paired], [p[1] for p in paired])
        except ZeroDivisionError:
            re_table[name] = None

    return ScenarioReport(
        spec=spec,
        errors=errors,
        mse=mse_table,
        re=re_table,
        failures=failures,
        runtime=time.perf_counter() - started,
    )
