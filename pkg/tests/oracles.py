"""Independent oracles the tests check the fast implementations against.

These deliberately share no code with the library paths they validate:
the dual solve is checked against a dense grid search, the M-fit against
direct derivative-free minimization of its objective, and OLS against the
dense normal-equation solve.
"""

import numpy as np


def feasible_interval(z):
    """The open interval of multipliers keeping 1 + lam*z positive (scalar z)."""
    z = np.asarray(z, dtype=float).ravel()
    lo = -np.inf if (z <= 0).all() else -1.0 / z.max()
    hi = np.inf if (z >= 0).all() else -1.0 / z.min()
    return lo, hi


def dual_objective(z, lam_grid):
    """-sum(log1p(lam * z_i)) evaluated on a grid of scalar multipliers."""
    z = np.asarray(z, dtype=float).ravel()
    return -np.log1p(np.outer(lam_grid, z)).sum(axis=1)


def grid_search_dual(z, fine=1e-6, coarse=1e-3):
    """Grid-search the scalar dual problem at ``fine`` resolution.

    The dual objective is strictly convex on the feasible interval, so a
    coarse pass followed by a fine pass around the coarse argmin visits the
    same minimizer a single dense fine grid would.  Returns (lam, value).
    """
    z = np.asarray(z, dtype=float).ravel()
    lo, hi = feasible_interval(z)
    assert np.isfinite(lo) and np.isfinite(hi), "oracle needs z with both signs"
    width = hi - lo
    margin = 1e-9 * width
    grid = np.arange(lo + margin, hi - margin, coarse)
    if grid.size < 8:
        grid = np.linspace(lo + margin, hi - margin, 8)
    best = grid[np.argmin(dual_objective(z, grid))]
    lo_f = max(lo + margin, best - 2 * coarse)
    hi_f = min(hi - margin, best + 2 * coarse)
    grid = np.arange(lo_f, hi_f, fine)
    values = dual_objective(z, grid)
    idx = int(np.argmin(values))
    return float(grid[idx]), float(values[idx])


def dense_ols(X, y):
    """Normal-equation solve (X'X)^; X'y by a dense linear solve."""
    return np.linalg.solve(X.T @ X, X.T @ y)


def minimize_m_objective(X, y, kernel, sigma, start):
    """Derivative-free direct minimization of sum(rho(residual / sigma)).

    Uses scipy's Nelder-Mead as an independent optimization path.
    """
    from scipy.optimize import minimize

    def objective(beta):
        return float(kernel.rho((y - X @ beta) / sigma).sum())

    result = minimize(
        objective,
        np.asarray(start, dtype=float),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxfev": 20000},
    )
    return result.x
