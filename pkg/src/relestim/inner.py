"""Inner EL problem: estimating vectors, dual solve, weights, profile log-EL.

For a fixed coefficient vector the estimating vectors z_i are built from the
chosen constraint mode, the dual multiplier is found by damped Newton, and
the observation weights and profile log-EL value follow in closed form.

The Newton solve is the hot kernel: the compiled backend in
``relestim._solver_core`` is used when importable, otherwise the pure-NumPy
twin in ``relestim._solver_py``.  Set REL_ESTIM_BACKEND=python (or
=compiled) to force a choice.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _solver_py
from .data import Dataset
from .exceptions import HullViolation
from .kernels import PsiKernel, ScaleEstimate

try:  # compiled twin; optional
    from . import _solver_core
except ImportError:  # pragma: no cover - depends on build environment
    _solver_core = None

GRAD_TOL = 1e-9
MAX_NEWTON_ITER = 100
# A converged dual solve satisfies sum(1/t_i) = n identically; a large
# mismatch means the iterates ran off to infinity (hull failure plateau).
_SUM_P_HULL_TOL = 1e-6

STATUS_CONVERGED = _solver_py.STATUS_CONVERGED
STATUS_MAXITER = _solver_py.STATUS_MAXITER
STATUS_STALLED = _solver_py.STATUS_STALLED


def _pick_backend():
    choice = os.environ.get("REL_ESTIM_BACKEND", "auto").lower()
    if choice in ("python", "pure"):
        return _solver_py, "python"
    if choice == "compiled":
        if _solver_core is None:
            raise ImportError(
                "REL_ESTIM_BACKEND=compiled but relestim._solver_core is not built"
            )
        return _solver_core, "compiled"
    if _solver_core is not None:
        return _solver_core, "compiled"
    return _solver_py, "python"


_BACKEND, _BACKEND_NAME = _pick_backend()


def backend_name() -> str:
    """Which dual-solver implementation is active: "compiled" or "python"."""
    return _BACKEND_NAME


@dataclass(frozen=True)
class Classical:
    """Moment rows X_i * (y_i - X_i'beta): the weighted normal equations."""


@dataclass(frozen=True)
class Robust:
    """Moment rows X_i * psi((y_i - X_i'beta) / sigma): bounded-influence rows.

    Residuals are standardized by the preliminary scale so the kernel's
    tuning constant keeps its usual meaning; the scale used is carried in
    the mode and surfaces in fit reports.
    """

    kernel: PsiKernel
    scale: ScaleEstimate


@dataclass(frozen=True)
class ClassicalWithVariance:
    """Classical rows plus the over-identifying row (y_i - X_i'beta)^2 - sigma^2."""

    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("variance constraint needs a positive finite sigma")


ConstraintMode = Classical | Robust | ClassicalWithVariance


@dataclass
class InnerSolution:
    """Dual multiplier, observation weights, and profile log-EL at one beta."""

    multiplier: np.ndarray  # (m,)
    weights: np.ndarray  # (n,), positive, sums to 1 when converged
    log_el: float
    converged: bool
    iterations: int


def estimating_vectors(data: Dataset, beta, mode: ConstraintMode) -> np.ndarray:
    """The n-by-m matrix whose rows the EL weights must average to zero."""
    beta = np.asarray(beta, dtype=float)
    residuals = data.y - data.X @ beta
    if isinstance(mode, Classical):
        return data.X * residuals[:, None]
    if isinstance(mode, Robust):
        return data.X * mode.kernel.psi(residuals / mode.scale.sigma)[:, None]
    if isinstance(mode, ClassicalWithVariance):
        extra = residuals**2 - mode.sigma**2
        return np.column_stack([data.X * residuals[:, None], extra])
    raise TypeError(f"unknown constraint mode {mode!r}")


def solve_inner(z: np.ndarray, gtol: float = GRAD_TOL, max_iter: int = MAX_NEWTON_ITER) -> InnerSolution:
    """Solve the dual problem for one estimating-vector matrix.

    Raises HullViolation when zero is not interior to the convex hull of
    the rows (detected through a stalled Newton iteration or divergence of
    the iterates).
    """
    z = np.ascontiguousarray(z, dtype=float)
    if z.ndim != 2:
        raise ValueError("estimating vectors must form a 2-D matrix")
    n, m = z.shape
    if n < m:
        raise ValueError(f"need at least as many observations ({n}) as moments ({m})")

    # The compiled kernel caps the moment dimension at 16 (stack buffers).
    backend = _solver_py if (m > 16 and _BACKEND is not _solver_py) else _BACKEND
    lam, iterations, status = backend.solve_dual(z, gtol, max_iter)
    if status == STATUS_STALLED:
        raise HullViolation(
            "dual iteration stalled: zero is outside the convex hull of the "
            "estimating vectors",
            iterations=iterations,
        )

    t = 1.0 + z @ lam
    sum_inv = float((1.0 / t).sum())
    if abs(sum_inv / n - 1.0) > _SUM_P_HULL_TOL:
        raise HullViolation(
            "dual iterates diverged (weights do not sum to one): zero is outside "
            "the convex hull of the estimating vectors",
            iterations=iterations,
        )

    weights = 1.0 / (n * t)
    log_el = -float(np.log(t).sum()) - n * math.log(n)
    return InnerSolution(
        multiplier=lam,
        weights=weights,
        log_el=log_el,
        converged=status == STATUS_CONVERGED,
        iterations=iterations,
    )


def inner_solution(data: Dataset, beta, mode: ConstraintMode) -> InnerSolution:
    """Build the estimating vectors at beta and solve the inner problem."""
    return solve_inner(estimating_vectors(data, beta, mode))


def profile_log_el(data: Dataset, beta, mode: ConstraintMode) -> float:
    """Profile log-EL at beta; -inf when the inner problem is infeasible."""
    try:
        return inner_solution(data, beta, mode).log_el
    except HullViolation:
        return -math.inf
