"""Outer maximization of the profile log-EL over the coefficient vector."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import RegressionFit, m_fit, ols_fit, residual_scale
from .data import Dataset
from .exceptions import InfeasibleStart
from .inner import (
    Classical,
    ClassicalWithVariance,
    ConstraintMode,
    InnerSolution,
    Robust,
    inner_solution,
    profile_log_el,
)
from .simplex import minimize_simplex

SPREAD_TOL = 1e-10
EVALS_PER_DIM = 500
_FEASIBILITY_TRIES = 50

# Purpose codes for derived random streams.
_PURPOSE_FEASIBILITY = 1
_PURPOSE_MULTISTART = 2


@dataclass
class ELFit:
    """A fitted EL (or robust-EL) regression."""

    beta: np.ndarray
    inner: InnerSolution
    mode: ConstraintMode
    log_el: float
    outer_iterations: int
    evaluations: int
    converged: bool
    start_beta: np.ndarray


def default_start(data: Dataset, mode: ConstraintMode) -> np.ndarray:
    """Warm start at the matching estimating-equation root.

    OLS for the classical modes; the M-fit with the mode's kernel and scale
    for robust modes (so the just-identified optimum is already at hand).
    """
    if isinstance(mode, Robust):
        return m_fit(data, mode.kernel, scale=mode.scale).beta
    return ols_fit(data).beta


def _rng(seed: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(purpose,)))


def el_fit(
    data: Dataset,
    mode: ConstraintMode,
    start=None,
    seed: int = 0,
    spread_tol: float = SPREAD_TOL,
    extra_starts: int = 0,
) -> ELFit:
    """Maximize the profile log-EL over beta by simplex search.

    The search starts at the matching classical/robust estimating-equation
    root (or at ``start``), uses an initial simplex edge of
    ``max(1e-3, 1e-2 * |start|_inf)``, stops a run when the objective spread
    falls to ``spread_tol`` or after ``500 * k`` evaluations, and restarts
    once from the best vertex.  ``extra_starts`` adds seeded random starts,
    useful for the multimodal over-identified variance mode.

    Raises InfeasibleStart when the start (and 50 seeded perturbations of
    it) all sit outside the feasible region.
    """
    start = np.asarray(default_start(data, mode) if start is None else start, dtype=float)
    if start.shape != (data.k,):
        raise ValueError(f"start must have shape ({data.k},)")

    def objective(beta):
        return -profile_log_el(data, beta, mode)

    perturb_scale = residual_scale(data.y).sigma
    if not math.isfinite(objective(start)):
        rng = _rng(seed, _PURPOSE_FEASIBILITY)
        for _ in range(_FEASIBILITY_TRIES):
            candidate = start + rng.normal(0.0, perturb_scale, size=data.k)
            if math.isfinite(objective(candidate)):
                start = candidate
                break
        else:
            raise InfeasibleStart(
                "no feasible starting point found: the profile log-EL is -inf at "
                f"the warm start and {_FEASIBILITY_TRIES} perturbations of it"
            )

    edge = max(1e-3, 1e-2 * float(np.abs(start).max()))
    max_evals = EVALS_PER_DIM * data.k
    result = minimize_simplex(objective, start, edge, spread_tol, max_evals, restarts=1)

    if extra_starts > 0:
        rng = _rng(seed, _PURPOSE_MULTISTART)
        for _ in range(extra_starts):
            candidate = start + rng.normal(0.0, perturb_scale, size=data.k)
            if not math.isfinite(objective(candidate)):
                continue
            alt = minimize_simplex(objective, candidate, edge, spread_tol, max_evals, restarts=1)
            result.iterations += alt.iterations
            result.evaluations += alt.evaluations
            if alt.fun < result.fun:
                alt.iterations, alt.evaluations = result.iterations, result.evaluations
                result = alt

    inner = inner_solution(data, result.x, mode)
    return ELFit(
        beta=result.x,
        inner=inner,
        mode=mode,
        log_el=inner.log_el,
        outer_iterations=result.iterations,
        evaluations=result.evaluations,
        converged=result.converged,
        start_beta=start,
    )


def _mode_descriptor(mode: ConstraintMode) -> dict:
    if isinstance(mode, Classical):
        return {"kind": "classical"}
    if isinstance(mode, Robust):
        return {
            "kind": "robust",
            "kernel": mode.kernel.kind,
            "tuning": mode.kernel.tuning,
            "sigma": mode.scale.sigma,
            "sigma_method": mode.scale.method,
        }
    return {"kind": "classical+variance", "sigma": mode.sigma}


def fit_report(fit, data: Dataset) -> dict:
    """A JSON-ready report for an ELFit or a RegressionFit."""
    if isinstance(fit, RegressionFit):
        return {
            "schema_version": 1,
            "method": fit.method,
            "n": data.n,
            "k": data.k,
            "coefficients": fit.beta.tolist(),
            "residuals": fit.residuals.tolist(),
            "sigma": fit.sigma.sigma,
            "sigma_method": fit.sigma.method,
            "iterations": fit.iterations,
            "converged": fit.converged,
            "estimating_eq_norm": fit.eq_norm,
        }

    residuals = data.y - data.X @ fit.beta
    report = {
        "schema_version": 1,
        "method": _el_method_name(fit.mode),
        "n": data.n,
        "k": data.k,
        "coefficients": fit.beta.tolist(),
        "residuals": residuals.tolist(),
        "constraints": _mode_descriptor(fit.mode),
        "log_el": fit.log_el,
        "multiplier": fit.inner.multiplier.tolist(),
        "weights": fit.inner.weights.tolist(),
        "inner_iterations": fit.inner.iterations,
        "outer_iterations": fit.outer_iterations,
        "evaluations": fit.evaluations,
        "converged": bool(fit.converged and fit.inner.converged),
        "start_beta": fit.start_beta.tolist(),
    }
    if isinstance(fit.mode, Robust):
        # The kernel's own observation weights psi(u)/u; unlike the EL
        # probabilities these stay informative at the just-identified
        # optimum, where the dual multiplier vanishes.
        u = residuals / fit.mode.scale.sigma
        report["kernel_weights"] = fit.mode.kernel.weights(u).tolist()
    return report


def _el_method_name(mode: ConstraintMode) -> str:
    if isinstance(mode, Classical):
        return "el"
    if isinstance(mode, Robust):
        return f"el-{mode.kernel.kind}"
    return "el-variance"
