"""Multi-task ridge regularizers and the two routes to their exact risk.

The multi-task smoother is A = T (T + np I)^{-1} with T = (M^{-1} x K)
(Kronecker product), M being a p x p coupling matrix that penalizes the task
mean with weight ``lam`` and the between-task variance with weight ``mu``.
``risk_direct`` materializes the np x np operator and evaluates the
bias-variance decomposition by brute force; ``risk_spectral`` evaluates the
same risk from the kernel eigenvalues and the mean/variance profiles in
O(n).  The two must agree to floating-point accuracy, which is the central
correctness check of the package.

The spectral route is canonical: it is defined for lam = 0 and mu = 0 where
the Kronecker-inverse formula is not, and it has no size cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optimize import RidgeRiskProfile
from .spectral import KernelSpectrum, MeanVarianceProfile, TaskEnsemble, mean_variance_profile, reconstruct_tasks

DENSE_SIZE_CAP = 512  # the O((np)^3) route exists only for cross-validation


class SingularRegularizerError(ValueError):
    """The Kronecker route needs an invertible coupling matrix (lam, mu > 0)."""


def _mean_projector(p: int) -> np.ndarray:
    return np.full((p, p), 1.0 / p)


@dataclass(frozen=True)
class RegularizerAV:
    """Coupling matrix penalizing the task mean (lam) and task variance (mu)."""

    p: int
    lam: float
    mu: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be a positive integer")
        if self.lam < 0 or self.mu < 0:
            raise ValueError("penalty weights must be nonnegative")

    def matrix(self) -> np.ndarray:
        J = _mean_projector(self.p)
        return (self.lam / self.p) * J + (self.mu / self.p) * (np.eye(self.p) - J)


@dataclass(frozen=True)
class RegularizerSD:
    """Coupling matrix penalizing individual norms (alpha) and pairwise differences (beta_pen).

    Identical to RegularizerAV(alpha, alpha + p * beta_pen); kept as its own
    type because the two parameterizations cover different nonnegative cones.
    """

    p: int
    alpha: float
    beta_pen: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be a positive integer")
        if self.alpha < 0 or self.beta_pen < 0:
            raise ValueError("penalty weights must be nonnegative")

    def matrix(self) -> np.ndarray:
        return RegularizerAV(self.p, self.alpha, self.alpha + self.p * self.beta_pen).matrix()


@dataclass(frozen=True)
class RiskBreakdown:
    bias: float
    variance: float
    total: float

    @classmethod
    def of(cls, bias: float, variance: float) -> "RiskBreakdown":
        return cls(bias=bias, variance=variance, total=bias + variance)


def penalty_value(reg: RegularizerAV | RegularizerSD, gram: np.ndarray) -> float:
    """Quadratic penalty sum_{j,l} M_{jl} <g^j, g^l> from the task Gram matrix."""
    gram = np.asarray(gram, dtype=float)
    p = reg.p
    if gram.shape != (p, p):
        raise ValueError(f"gram matrix must be {p} x {p}, got {gram.shape}")
    scale = max(1.0, float(np.max(np.abs(gram))))
    if np.max(np.abs(gram - gram.T)) > 1e-10 * scale:
        raise ValueError("gram matrix is not symmetric")
    if np.linalg.eigvalsh(gram).min() < -1e-8 * scale:
        raise ValueError("gram matrix is not positive semidefinite")
    return float(np.sum(reg.matrix() * gram))


def build_operator(spectrum: KernelSpectrum, reg: RegularizerAV) -> np.ndarray:
    """Materialize the dense np x np multi-task smoother (validation path only)."""
    if reg.lam == 0 or reg.mu == 0:
        raise SingularRegularizerError("dense route requires lam > 0 and mu > 0; use the spectral route for zero penalties")
    n, p = spectrum.n, reg.p
    if n * p > DENSE_SIZE_CAP:
        raise ValueError(f"dense operator of size {n * p} exceeds cap {DENSE_SIZE_CAP}")
    K = spectrum.kernel_matrix()
    Minv = np.linalg.inv(reg.matrix())
    T = np.kron(Minv, K)
    # T and (T + npI)^{-1} commute, so the product is symmetric
    A = np.linalg.solve(T + n * p * np.eye(n * p), T)
    return 0.5 * (A + A.T)


def risk_direct(
    spectrum: KernelSpectrum, tasks: TaskEnsemble, reg: RegularizerAV, sigma2: float
) -> RiskBreakdown:
    """Exact risk via the dense operator: ||(A - I) f||^2/np + sigma2 tr(A'A)/np."""
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    if tasks.p != reg.p:
        raise ValueError("ensemble and regularizer disagree on the number of tasks")
    n, p = spectrum.n, tasks.p
    A = build_operator(spectrum, reg)
    F = reconstruct_tasks(spectrum, tasks)
    f = F.T.ravel()  # tasks stacked one after another
    bias = float(np.sum((A @ f - f) ** 2)) / (n * p)
    variance = sigma2 * float(np.sum(A * A)) / (n * p)
    return RiskBreakdown.of(bias, variance)


def mean_part_profile(spectrum: KernelSpectrum, profile: MeanVarianceProfile, sigma2: float, p: int) -> RidgeRiskProfile:
    """Risk curve in lam for the task-mean component (effective noise sigma2/p)."""
    return RidgeRiskProfile(n=spectrum.n, gamma=spectrum.gamma, signal=profile.mu**2 / p, noise=sigma2 / p)


def variance_part_profile(spectrum: KernelSpectrum, profile: MeanVarianceProfile, sigma2: float, p: int) -> RidgeRiskProfile:
    """Risk curve in mu for the between-task component (effective noise (p-1) sigma2/p)."""
    return RidgeRiskProfile(n=spectrum.n, gamma=spectrum.gamma, signal=profile.varsigma2, noise=(p - 1) * sigma2 / p)


def risk_spectral(
    spectrum: KernelSpectrum,
    profile: MeanVarianceProfile,
    lam: float,
    mu: float,
    sigma2: float,
    p: int,
) -> RiskBreakdown:
    """Exact risk from the spectral decomposition; valid for lam, mu in [0, inf]."""
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    if p < 1:
        raise ValueError("p must be a positive integer")
    b1, v1 = mean_part_profile(spectrum, profile, sigma2, p).parts(lam)
    b2, v2 = variance_part_profile(spectrum, profile, sigma2, p).parts(mu)
    return RiskBreakdown.of(b1 + b2, v1 + v2)


def single_task_profile(spectrum: KernelSpectrum, h_j: np.ndarray, sigma2: float) -> RidgeRiskProfile:
    h_j = np.asarray(h_j, dtype=float)
    if h_j.shape != (spectrum.n,):
        raise ValueError(f"task coefficients have shape {h_j.shape}, expected ({spectrum.n},)")
    return RidgeRiskProfile(n=spectrum.n, gamma=spectrum.gamma, signal=h_j**2, noise=sigma2)


def risk_single_task(spectrum: KernelSpectrum, h_j: np.ndarray, lam: float, sigma2: float) -> RiskBreakdown:
    """Per-task ridge risk, normalized by n (the comparison harness averages over tasks)."""
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    bias, var = single_task_profile(spectrum, h_j, sigma2).parts(lam)
    return RiskBreakdown.of(bias, var)


def risk_from_ensemble(
    spectrum: KernelSpectrum, tasks: TaskEnsemble, lam: float, mu: float, sigma2: float
) -> RiskBreakdown:
    """Convenience wrapper: spectral risk straight from an ensemble."""
    return risk_spectral(spectrum, mean_variance_profile(tasks), lam, mu, sigma2, tasks.p)
