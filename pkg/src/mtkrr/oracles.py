"""Multi-task vs single-task oracle risks and their theoretical ratio forms.

The multi-task oracle separates exactly: the risk is a sum of a mean part in
lam and a variance part in mu, each a one-dimensional ridge risk curve, so
the joint optimum is two independent line searches.  The single-task oracle
is p independent line searches, one per task.  Both risks are normalized per
observation (divided by n p), which makes their ratio rho dimensionless.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .estimators import mean_part_profile, single_task_profile, variance_part_profile
from .optimize import minimize_profile
from .spectral import KernelSpectrum, MeanVarianceProfile, TaskEnsemble, mean_variance_profile

SEARCH_LO = 1e-12
SEARCH_HI = 1e3


class RatioSetting(enum.Enum):
    TWO_POINTS = "TWO_POINTS"
    ONE_OUT = "ONE_OUT"


@dataclass(frozen=True)
class MTOracle:
    lambda_star: float
    mu_star: float
    risk: float
    mean_part: float
    var_part: float


@dataclass(frozen=True)
class STOracle:
    lambdas: tuple[float, ...]
    risk: float
    per_task: tuple[float, ...]


@dataclass(frozen=True)
class OracleResult:
    """Joint outcome of the two oracle searches on one problem instance."""

    mt_risk: float
    st_risk: float
    lambda_star: float
    mu_star: float
    st_lambdas: tuple[float, ...]
    rho: float
    diagnostics: tuple[float, ...]  # per-task single-task oracle risks


@dataclass(frozen=True)
class RatioTheory:
    """Closed-form ratio prediction for one of the two analyzed repartitions."""

    r: float
    rho_formula: float
    setting: RatioSetting


def oracle_multitask(
    spectrum: KernelSpectrum,
    profile: MeanVarianceProfile,
    sigma2: float,
    p: int,
    lo: float = SEARCH_LO,
    hi: float = SEARCH_HI,
) -> MTOracle:
    """Independently minimize the mean part over lam and the variance part over mu."""
    mean = minimize_profile(mean_part_profile(spectrum, profile, sigma2, p), lo=lo, hi=hi)
    var = minimize_profile(variance_part_profile(spectrum, profile, sigma2, p), lo=lo, hi=hi)
    return MTOracle(
        lambda_star=mean.lam,
        mu_star=var.lam,
        risk=mean.value + var.value,
        mean_part=mean.value,
        var_part=var.value,
    )


def oracle_singletask(
    spectrum: KernelSpectrum,
    tasks: TaskEnsemble,
    sigma2: float,
    lo: float = SEARCH_LO,
    hi: float = SEARCH_HI,
) -> STOracle:
    """Per-task oracle ridge risks, averaged over the p tasks."""
    lambdas = []
    risks = []
    for j in range(tasks.p):
        best = minimize_profile(single_task_profile(spectrum, tasks.h[:, j], sigma2), lo=lo, hi=hi)
        lambdas.append(best.lam)
        risks.append(best.value)
    return STOracle(lambdas=tuple(lambdas), risk=sum(risks) / tasks.p, per_task=tuple(risks))


def compare_oracles(spectrum: KernelSpectrum, tasks: TaskEnsemble, sigma2: float) -> OracleResult:
    """Run both oracles on the same ensemble and form the risk ratio."""
    profile = mean_variance_profile(tasks)
    mt = oracle_multitask(spectrum, profile, sigma2, tasks.p)
    st = oracle_singletask(spectrum, tasks, sigma2)
    if st.risk <= 0:
        raise ZeroDivisionError("single-task oracle risk is zero; the ratio is undefined")
    return OracleResult(
        mt_risk=mt.risk,
        st_risk=st.risk,
        lambda_star=mt.lambda_star,
        mu_star=mt.mu_star,
        st_lambdas=st.lambdas,
        rho=mt.risk / st.risk,
        diagnostics=st.per_task,
    )


def rho_formula_2points(p: int, delta: float, r: float) -> float:
    """Rate-form ratio for two equal clusters of identical tasks (r = C2/C1)."""
    if p < 2 or p % 2:
        raise ValueError("two-cluster repartition needs an even p >= 2")
    if r < 0:
        raise ValueError("r must be nonnegative")
    e = 1 / (2 * delta)
    num = p ** (e - 1) + ((p - 1) / p) ** (1 - e) * r**e
    den = (1 + math.sqrt(r)) ** (1 / delta) + abs(1 - math.sqrt(r)) ** (1 / delta)
    return num / den


def rho_formula_1out(p: int, delta: float, r: float) -> float:
    """Rate-form ratio for p-1 identical tasks plus one outlier (r = C2/C1)."""
    if p < 2:
        raise ValueError("outlier repartition needs p >= 2")
    if r < 0:
        raise ValueError("r must be nonnegative")
    e = 1 / (2 * delta)
    num = p ** (e - 1) + ((p - 1) / p) ** (1 - e) * r**e
    den = (p - 1) / p * (1 + math.sqrt(r / (p - 1))) ** (1 / delta) + (1 / p) * abs(
        1 - math.sqrt(r * (p - 1))
    ) ** (1 / delta)
    return num / den


def ratio_theory(setting: RatioSetting, p: int, delta: float, r: float) -> RatioTheory:
    if setting is RatioSetting.TWO_POINTS:
        value = rho_formula_2points(p, delta, r)
    else:
        value = rho_formula_1out(p, delta, r)
    return RatioTheory(r=r, rho_formula=value, setting=setting)


def df_and_bias(spectrum: KernelSpectrum, h_j: np.ndarray, lam: float) -> tuple[float, float]:
    """Effective degrees of freedom tr(A_lam) and squared bias of one task.

    df(lam) = sum gamma_i / (gamma_i + n lam); the bias is normalized by n.
    At lam = 0 the smoother is the projector onto the kernel range, so df
    counts the positive eigenvalues and the bias keeps only null-space energy.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    h_j = np.asarray(h_j, dtype=float)
    n, gamma = spectrum.n, spectrum.gamma
    if math.isinf(lam):
        return 0.0, float(np.sum(h_j**2)) / n
    if lam == 0.0:
        pos = gamma > 0
        return float(np.count_nonzero(pos)), float(np.sum(h_j[~pos] ** 2)) / n
    d = gamma + n * lam
    df = float(np.sum(gamma / d))
    b = float(np.sum((n * lam) ** 2 * h_j**2 / d**2)) / n
    return df, b


def hm_bound_rhs(
    n: int,
    p: int,
    sigma2: float,
    theta: float,
    mt_oracle_risk: float,
    f_sqnorm: float,
    big_l: float = 1.0,
) -> float:
    """Right-hand side of the data-driven estimator's oracle inequality.

    (1 + 1/ln n)^2 * mt_oracle_risk + L sigma2 (2+theta)^2 p ln(n)^3 / n
    + p / n^(theta/2) * f_sqnorm / (n p).  The absolute constant L is not
    specified by the theory; it is exposed as a knob with default 1.
    """
    if n < 3:
        raise ValueError("need n >= 3 for the logarithmic terms")
    if theta < 2:
        raise ValueError("theta must be at least 2")
    log_n = math.log(n)
    return (
        (1 + 1 / log_n) ** 2 * mt_oracle_risk
        + big_l * sigma2 * (2 + theta) ** 2 * p * log_n**3 / n
        + p / n ** (theta / 2) * f_sqnorm / (n * p)
    )
