"""Empirical likelihood regression with robust constraints.

Classical and robust-EL coefficient estimation for linear models, with OLS
and M-estimation baselines, a seeded Monte Carlo comparison harness, and
the Belgium phone-calls case study bundled for reproducibility.
"""

from . import exceptions
from .classical import RegressionFit, m_fit, ml_variance, ols_fit, residual_scale
from .data import (
    Dataset,
    TabularSource,
    belgium_dataset,
    read_dataset,
    write_dataset,
)
from .inner import (
    Classical,
    ClassicalWithVariance,
    ConstraintMode,
    InnerSolution,
    Robust,
    backend_name,
    estimating_vectors,
    inner_solution,
    profile_log_el,
    solve_inner,
)
from .kernels import PsiKernel, ScaleEstimate, fixed_scale, mad_scale
from .outer import ELFit, default_start, el_fit, fit_report
from .simulate import (
    ESTIMATOR_ORDER,
    ErrorModel,
    ScenarioReport,
    ScenarioSpec,
    generate_replication,
    mse,
    relative_efficiency,
    run_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Classical",
    "ClassicalWithVariance",
    "ConstraintMode",
    "Dataset",
    "ELFit",
    "ESTIMATOR_ORDER",
    "ErrorModel",
    "InnerSolution",
    "PsiKernel",
    "RegressionFit",
    "Robust",
    "ScaleEstimate",
    "ScenarioReport",
    "ScenarioSpec",
    "TabularSource",
    "backend_name",
    "belgium_dataset",
    "default_start",
    "el_fit",
    "estimating_vectors",
    "exceptions",
    "fit_report",
    "fixed_scale",
    "generate_replication",
    "inner_solution",
    "m_fit",
    "mad_scale",
    "ml_variance",
    "mse",
    "ols_fit",
    "profile_log_el",
    "read_dataset",
    "relative_efficiency",
    "residual_scale",
    "run_scenario",
    "solve_inner",
    "write_dataset",
]
