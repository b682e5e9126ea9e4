"""OLS via QR factorization and M-estimation via iteratively reweighted fitting.

These provide the baselines for the Monte Carlo comparison and the warm
starts (and preliminary residual scale) for the EL optimizers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .exceptions import DegenerateScale, RankDeficient
from .kernels import PsiKernel, ScaleEstimate, fixed_scale, mad_scale

# Relative pivot tolerance below which the design is treated as rank deficient.
RANK_TOL = 1e-10

M_MAX_ITER = 200
M_BETA_RTOL = 1e-10
M_EQ_TOL = 1e-8


@dataclass
class RegressionFit:
    """A fitted linear model with residuals and scale."""

    beta: np.ndarray
    residuals: np.ndarray
    sigma: ScaleEstimate
    method: str  # "ols", "m-huber" or "m-tukey"
    iterations: int
    converged: bool
    eq_norm: float  # max-norm of the estimating equation at beta


def _qr_solve(X: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Least-squares coefficients through a rank-checked QR factorization."""
    if weights is not None:
        sw = np.sqrt(weights)
        X = X * sw[:, None]
        y = y * sw
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.max() == 0.0 or diag.min() <= RANK_TOL * diag.max():
        raise RankDeficient("design matrix is rank deficient (or lost rank under weighting)")
    return np.linalg.solve(R, Q.T @ y)


def residual_scale(residuals: np.ndarray, reference: float = 1.0) -> ScaleEstimate:
    """MAD scale of residuals, falling back to a fixed unit scale on
    (numerically) exact fits, judged relative to ``reference``."""
    try:
        estimate = mad_scale(residuals)
    except DegenerateScale:
        return fixed_scale(1.0)
    if estimate.sigma <= 1e-12 * max(1.0, reference):
        return fixed_scale(1.0)
    return estimate


def ols_fit(data: Dataset) -> RegressionFit:
    """Ordinary least squares solved by QR, with a MAD residual scale.

    Raises RankDeficient when the design lacks full column rank.
    """
    beta = _qr_solve(data.X, data.y)
    residuals = data.y - data.X @ beta
    return RegressionFit(
        beta=beta,
        residuals=residuals,
        sigma=residual_scale(residuals, reference=float(np.abs(data.y).max(initial=0.0))),
        method="ols",
        iterations=1,
        converged=True,
        eq_norm=float(np.abs(data.X.T @ residuals).max()),
    )


def ml_variance(fit: RegressionFit) -> float:
    """Maximum-likelihood error variance: the mean squared residual."""
    return float(np.mean(fit.residuals**2))


def m_fit(
    data: Dataset,
    kernel: PsiKernel,
    scale: ScaleEstimate | None = None,
    max_iter: int = M_MAX_ITER,
) -> RegressionFit:
    """M-estimate of the coefficients with the residual scale held fixed.

    Solves sum(psi(r_i / sigma) * X_i) = 0 by iteratively reweighted least
    squares with weights psi(u)/u.  When ``scale`` is absent it is the MAD
    of the OLS residuals, fixed across iterations.  Huber starts from OLS;
    Tukey starts from the Huber fit since its redescending psi makes the
    objective non-convex.

    Returns the last iterate flagged ``converged=False`` when the iteration
    budget runs out; raises RankDeficient if the weighted design loses rank.
    """
    if kernel.kind == "identity":
        raise ValueError("m_fit expects a huber or tukey kernel; use ols_fit instead")

    ols = ols_fit(data)
    if scale is None:
        scale = ols.sigma
    if kernel.kind == "tukey":
        start = m_fit(data, PsiKernel.huber(), scale=scale, max_iter=max_iter)
        beta = start.beta
    else:
        beta = ols.beta

    sigma = scale.sigma
    residuals = data.y - data.X @ beta
    eq_norm = float(np.abs(data.X.T @ kernel.psi(residuals / sigma)).max())
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = kernel.weights(residuals / sigma)
        beta_new = _qr_solve(data.X, data.y, weights=w)
        residuals = data.y - data.X @ beta_new
        eq_norm = float(np.abs(data.X.T @ kernel.psi(residuals / sigma)).max())
        step = float(np.abs(beta_new - beta).max())
        beta = beta_new
        if eq_norm < M_EQ_TOL or step <= M_BETA_RTOL * (1.0 + float(np.abs(beta).max())):
            converged = True
            break

    return RegressionFit(
        beta=beta,
        residuals=residuals,
        sigma=scale,
        method=f"m-{kernel.kind}",
        iterations=iterations,
        converged=converged,
        eq_norm=eq_norm,
    )
