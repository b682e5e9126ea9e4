"""Nelder-Mead simplex minimization for the outer EL search.

The profile log-EL is nonsmooth at Huber kinks, non-convex for redescending
kernels, and minus infinity outside the feasible region, so the outer
search is derivative-free.  Infinite objective values are handled by the
ordinary comparison logic (an infeasible vertex is simply worst).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Standard reflection/expansion/contraction/shrink coefficients.
_ALPHA, _GAMMA, _BETA, _DELTA = 1.0, 2.0, 0.5, 0.5


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool  # terminated by objective spread, not by budget


def _sorted_simplex(simplex, fvals):
    # Stable sort keeps an incumbent vertex ahead of an equal newcomer, so
    # a warm start at the optimum is never displaced by ties.
    order = np.argsort(fvals, kind="stable")
    return simplex[order], fvals[order]


def _run(func, x0, edge, spread_tol, max_evals):
    k = x0.size
    simplex = np.tile(x0, (k + 1, 1))
    for j in range(k):
        simplex[j + 1, j] += edge
    fvals = np.array([func(v) for v in simplex])
    evaluations = k + 1
    simplex, fvals = _sorted_simplex(simplex, fvals)

    iterations = 0
    converged = False
    while True:
        spread = fvals[-1] - fvals[0]
        if spread <= spread_tol:
            converged = True
            break
        if evaluations >= max_evals:
            break
        iterations += 1

        centroid = simplex[:-1].mean(axis=0)
        reflected = centroid + _ALPHA * (centroid - simplex[-1])
        f_r = func(reflected)
        evaluations += 1

        if f_r < fvals[0]:
            expanded = centroid + _GAMMA * (reflected - centroid)
            f_e = func(expanded)
            evaluations += 1
            if f_e < f_r:
                simplex[-1], fvals[-1] = expanded, f_e
            else:
                simplex[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, f_r
        else:
            if f_r < fvals[-1]:
                contracted = centroid + _BETA * (reflected - centroid)
            else:
                contracted = centroid + _BETA * (simplex[-1] - centroid)
            f_c = func(contracted)
            evaluations += 1
            if f_c < min(f_r, fvals[-1]):
                simplex[-1], fvals[-1] = contracted, f_c
            else:
                # Shrink every non-best vertex toward the best.
                for i in range(1, k + 1):
                    simplex[i] = simplex[0] + _DELTA * (simplex[i] - simplex[0])
                    fvals[i] = func(simplex[i])
                evaluations += k

        simplex, fvals = _sorted_simplex(simplex, fvals)

    return SimplexResult(simplex[0].copy(), float(fvals[0]), iterations, evaluations, converged)


def minimize_simplex(func, start, edge, spread_tol=1e-10, max_evals=None, restarts=1):
    """Minimize ``func`` from ``start`` with initial simplex edge ``edge``.

    Each run terminates when the objective spread over the simplex falls to
    ``spread_tol`` or the evaluation budget is spent; ``restarts`` fresh
    simplexes are then rebuilt at the incumbent best point to guard against
    premature collapse.  Fully deterministic.
    """
    start = np.asarray(start, dtype=float)
    if max_evals is None:
        max_evals = 500 * max(start.size, 1)

    best = _run(func, start, edge, spread_tol, max_evals)
    iterations, evaluations = best.iterations, best.evaluations
    for _ in range(restarts):
        rerun = _run(func, best.x, edge, spread_tol, max_evals)
        iterations += rerun.iterations
        evaluations += rerun.evaluations
        # The rerun simplex contains the incumbent vertex, so its best value
        # is never worse; taking ties keeps the freshest convergence state.
        if rerun.fun <= best.fun:
            best = rerun
    return SimplexResult(best.x, best.fun, iterations, evaluations, best.converged)
