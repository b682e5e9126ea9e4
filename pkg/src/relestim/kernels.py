"""Influence kernels for M-estimation and the preliminary robust scale.

Each kernel is a rho/psi pair with psi = rho' everywhere it exists:

* identity: rho(r) = r^2/2, psi(r) = r (reduces M-estimation to least squares)
* huber:    quadratic inside [-k, k], linear growth outside; psi clipped at k
* tukey:    biweight; psi redescends to exactly 0 beyond the tuning constant

Tuning constants default to the usual 95%-efficiency values at the normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateScale

HUBER_DEFAULT_TUNING = 1.345
TUKEY_DEFAULT_TUNING = 4.685

# Phi^{-1}(3/4): makes the MAD consistent for sigma under normal errors.
MAD_NORMALIZER = 0.6745

_KINDS = ("identity", "huber", "tukey")


@dataclass(frozen=True)
class PsiKernel:
    """A rho/psi pair with its tuning constant.

    ``kind`` is one of ``"identity"``, ``"huber"`` or ``"tukey"``.  The
    tuning constant is ignored by the identity kernel and must be positive
    for the other two.
    """

    kind: str
    tuning: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind != "identity" and not self.tuning > 0:
            raise ValueError(f"{self.kind} kernel needs a positive tuning constant")

    @classmethod
    def identity(cls) -> "PsiKernel":
        return cls("identity")

    @classmethod
    def huber(cls, tuning: float = HUBER_DEFAULT_TUNING) -> "PsiKernel":
        return cls("huber", float(tuning))

    @classmethod
    def tukey(cls, tuning: float = TUKEY_DEFAULT_TUNING) -> "PsiKernel":
        return cls("tukey", float(tuning))

    def rho(self, r):
        """Objective kernel, elementwise.  rho(0) = 0, even, nondecreasing on [0, inf)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "identity":
            return 0.5 * r * r
        k = self.tuning
        a = np.abs(r)
        if self.kind == "huber":
            return np.where(a <= k, 0.5 * r * r, k * a - 0.5 * k * k)
        u2 = np.minimum((r / k) ** 2, 1.0)
        return (k * k / 6.0) * (1.0 - (1.0 - u2) ** 3)

    def psi(self, r):
        """Influence kernel, elementwise; the derivative of rho."""
        r = np.asarray(r, dtype=float)
        if self.kind == "identity":
            return r + 0.0
        k = self.tuning
        if self.kind == "huber":
            return np.clip(r, -k, k)
        u2 = (r / k) ** 2
        return np.where(u2 <= 1.0, r * (1.0 - np.minimum(u2, 1.0)) ** 2, 0.0)

    def rho0(self, r):
        """r*psi(r) - rho(r); shows up in joint scale estimating equations."""
        r = np.asarray(r, dtype=float)
        return r * self.psi(r) - self.rho(r)

    def weights(self, r):
        """IRLS weights psi(r)/r with the limit psi'(0) = 1 at r = 0."""
        r = np.asarray(r, dtype=float)
        if self.kind == "identity":
            return np.ones_like(r)
        k = self.tuning
        a = np.abs(r)
        if self.kind == "huber":
            return np.where(a <= k, 1.0, k / np.maximum(a, k))
        u2 = (r / k) ** 2
        return np.where(u2 <= 1.0, (1.0 - np.minimum(u2, 1.0)) ** 2, 0.0)


@dataclass(frozen=True)
class ScaleEstimate:
    """A positive residual-scale estimate and how it was obtained."""

    sigma: float
    method: str  # "mad" or "fixed"

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"scale must be a positive finite real, got {self.sigma}")


def fixed_scale(sigma: float) -> ScaleEstimate:
    """Wrap a user-supplied sigma as a ScaleEstimate."""
    return ScaleEstimate(float(sigma), "fixed")


def mad_scale(residuals) -> ScaleEstimate:
    """Normalized median absolute deviation of the residuals.

    Raises DegenerateScale when fewer than two residuals are given or the
    spread is exactly zero.
    """
    r = np.asarray(residuals, dtype=float)
    if r.size < 2:
        raise DegenerateScale("need at least 2 residuals for a scale estimate")
    sigma = float(np.median(np.abs(r - np.median(r)))) / MAD_NORMALIZER
    if sigma == 0.0:
        raise DegenerateScale("all residuals identical; MAD scale is zero")
    return ScaleEstimate(sigma, "mad")
