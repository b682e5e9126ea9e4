"""Pure-NumPy damped-Newton solver for the inner EL dual problem.

Reference implementation of the hot kernel; `relestim._solver_core` is the
compiled twin with identical semantics.  Kept dependency-light so it can
always serve as the import-time fallback.
"""

from __future__ import annotations

import numpy as np

STATUS_CONVERGED = 0
STATUS_MAXITER = 1
STATUS_STALLED = 2

_EPS = float(np.finfo(float).eps)
# Relative improvement in the gradient norm we require within 10 iterations
# before declaring the iteration stalled (convex-hull failure signature).
_IMPROVE = 1e-3
_STALL_LIMIT = 10
_MAX_HALVINGS = 60
_REGS = (0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)


def _newton_direction(H, g):
    """Solve H d = -g, escalating a tiny ridge while the system is singular."""
    m = H.shape[0]
    eye = np.eye(m)
    for reg in _REGS:
        try:
            L = np.linalg.cholesky(H + reg * eye if reg else H)
        except np.linalg.LinAlgError:
            continue
        return np.linalg.solve(L.T, np.linalg.solve(L, -g))
    return None


def solve_dual(z, gtol=1e-9, max_iter=100):
    """Minimize -sum(log(1 + z @ lam)) over {lam : 1 + z @ lam > 0}.

    Damped Newton from lam = 0 with a step-halving line search that rejects
    any step breaking feasibility or increasing the objective.  Convergence
    is a gradient max-norm at or below ``gtol`` (or below the accumulated
    floating-point noise floor of the gradient sum).

    Returns ``(lam, iterations, status)`` where status is STATUS_CONVERGED,
    STATUS_MAXITER, or STATUS_STALLED (no gradient progress for 10
    consecutive iterations: the convex-hull failure signature).
    """
    z = np.ascontiguousarray(z, dtype=float)
    n, m = z.shape
    lam = np.zeros(m)
    t = np.ones(n)
    f = 0.0

    status = STATUS_MAXITER
    best_gnorm = np.inf
    no_improve = 0
    iterations = 0

    for iterations in range(max_iter):
        g = -(z / t[:, None]).sum(axis=0)
        gnorm = float(np.abs(g).max(initial=0.0))
        if gnorm <= gtol:
            status = STATUS_CONVERGED
            break
        # Noise floor of the gradient sums: cannot resolve below this.
        floor = 8.0 * _EPS * float((np.abs(z) / t[:, None]).sum(axis=0).max(initial=0.0))
        if gnorm <= floor:
            status = STATUS_CONVERGED
            break
        if gnorm < best_gnorm * (1.0 - _IMPROVE):
            best_gnorm = gnorm
            no_improve = 0
        else:
            no_improve += 1
            if no_improve >= _STALL_LIMIT:
                # Monotone steps cannot shrink the gradient below the
                # curvature-scaled noise floor of the objective; a stall
                # down there is numerical convergence, not a hull failure.
                hmax = float((z * z / (t * t)[:, None]).sum(axis=0).max(initial=0.0))
                eps_f = 8.0 * _EPS * (1.0 + abs(f))
                if gnorm <= np.sqrt(2.0 * eps_f * hmax):
                    status = STATUS_CONVERGED
                else:
                    status = STATUS_STALLED
                break

        H = z.T @ (z / (t * t)[:, None])
        d = _newton_direction(H, g)
        if d is None:
            status = STATUS_STALLED
            break

        alpha = 1.0
        for _ in range(_MAX_HALVINGS):
            lam_c = lam + alpha * d
            t_c = 1.0 + z @ lam_c
            if t_c.min() > 0.0:
                f_c = -float(np.log(t_c).sum())
                if f_c <= f:
                    lam, t, f = lam_c, t_c, f_c
                    break
            alpha *= 0.5
        # On a failed search lam is unchanged; the stall counter will trip.
    else:
        iterations = max_iter

    if status == STATUS_CONVERGED:
        # Polish: quadratic convergence makes one or two more full steps
        # drive the gradient to the floating-point floor, which tightens
        # the sum(p) = 1 identity downstream.
        for _ in range(2):
            g = -(z / t[:, None]).sum(axis=0)
            gnorm = float(np.abs(g).max(initial=0.0))
            if gnorm == 0.0:
                break
            H = z.T @ (z / (t * t)[:, None])
            d = _newton_direction(H, g)
            if d is None:
                break
            lam_c = lam + d
            t_c = 1.0 + z @ lam_c
            if t_c.min(initial=np.inf) <= 0.0:
                break
            f_c = -float(np.log(t_c).sum())
            g_c = -(z / t_c[:, None]).sum(axis=0)
            if f_c > 0.0 or float(np.abs(g_c).max(initial=0.0)) >= gnorm:
                break
            lam, t, f = lam_c, t_c, f_c

    return lam, iterations, status
