"""The scalar risk template under polynomial spectral decay, and its bounds.

With kernel eigenvalues n i^(-2 beta) and squared signal coefficients
C n i^(-2 delta), the exact risk of a ridge smoother with parameter lam is

    R(n, p, sigma2, lam, beta, delta, C)
        = C lam^2 S1(n, lam) + sigma2 / (n p) * S2(n, lam)

    S1(n, lam) = sum_{i<=n} i^(4 beta - 2 delta) / (1 + lam i^(2 beta))^2
    S2(n, lam) = sum_{i<=n} 1 / (1 + lam i^(2 beta))^2

Its minimum over lam obeys two-sided bounds built from the improper integrals

    I1(beta, delta) = int_0^inf u^((1-2 delta)/(2 beta) + 1) / (1+u)^2 du
    I2(beta)        = int_0^inf u^(1/(2 beta) - 1) / (1+u)^2 du

through the rate constant kappa(beta, delta).  Both integrals are instances
of int_0^inf u^(a-1)/(1+u)^2 du with a in (0, 2); the production path is
adaptive quadrature after the substitution u = v/(1-v) (which turns the
integrand into v^(a-1) (1-v)^(1-a) on (0,1)), and the reflection closed form
Gamma(a) Gamma(2-a) = (1-a) pi / sin(pi a) is kept as an independent oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .optimize import ProfileMinimum, RidgeRiskProfile, minimize_profile

GRID_LO = 1e-12
GRID_HI_DEFAULT = 10.0
GRID_HI_UNCAPPED = 1e3  # widened search interval when no localization cap exists
QUAD_REL_TOL = 1e-10


class DivergentIntegralError(ValueError):
    """Integral parameters outside the convergence domain a in (0, 2)."""


class NoEpsilonCapError(RuntimeError):
    """The localization cap is undefined because n p / sigma2 is too small."""


class Regime(enum.Enum):
    REGULARIZE = "REGULARIZE"
    TRIVIAL_NOISE = "TRIVIAL_NOISE"
    UNDETERMINED = "UNDETERMINED"


@dataclass(frozen=True)
class RiskParams:
    """Parameters (n, p, sigma2, beta, delta, C) of the template risk."""

    n: int
    p: int
    sigma2: float
    beta: float
    delta: float
    c: float

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive integers")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.beta <= 0 or self.delta <= 0:
            raise ValueError("beta and delta must be positive")
        if self.c < 0:
            raise ValueError("signal amplitude must be nonnegative")

    @property
    def satisfies_hm(self) -> bool:
        """Minimax window 1 < 2 delta < 4 beta + 1."""
        return 1 < 2 * self.delta < 4 * self.beta + 1

    @property
    def satisfies_lb(self) -> bool:
        """Stricter window 1 < 2 delta < 4 beta required by the lower bound."""
        return 1 < 2 * self.delta < 4 * self.beta


@dataclass(frozen=True)
class BoundReport:
    """Optimized template risk with its theoretical envelope."""

    r_star: float
    lambda_star: float
    upper: float
    lower: float
    epsilon_cap: float
    regime: Regime
    kappa: float
    alpha: float


def template_profile(params: RiskParams) -> RidgeRiskProfile:
    i = np.arange(1, params.n + 1, dtype=float)
    gamma = params.n * i ** (-2.0 * params.beta)
    signal = params.c * params.n * i ** (-2.0 * params.delta)
    return RidgeRiskProfile(n=params.n, gamma=gamma, signal=signal, noise=params.sigma2 / params.p)


def risk_r(params: RiskParams, lam: float) -> float:
    """Template risk at a single regularization value (lam may be 0 or inf)."""
    return template_profile(params).value(lam)


def s1(n: int, lam: float, beta: float, delta: float) -> float:
    i = np.arange(1, n + 1, dtype=float)
    return float(np.sum(i ** (4 * beta - 2 * delta) / (1 + lam * i ** (2 * beta)) ** 2))


def s2(n: int, lam: float, beta: float) -> float:
    i = np.arange(1, n + 1, dtype=float)
    return float(np.sum(1.0 / (1 + lam * i ** (2 * beta)) ** 2))


def _tail_integral(a: float, v_upper: float = 1.0) -> float:
    """int_0^{v/(1-v) bound} u^(a-1)/(1+u)^2 du via the v = u/(1+u) substitution."""
    if not 0 < a < 2:
        raise DivergentIntegralError(f"exponent a={a!r} outside (0, 2); integral diverges")
    out = quad(
        lambda v: v ** (a - 1) * (1 - v) ** (1 - a),
        0.0,
        v_upper,
        epsabs=0.0,
        epsrel=QUAD_REL_TOL,
        limit=200,
        full_output=1,
    )
    val, abserr = float(out[0]), float(out[1])
    # near the domain edges QUADPACK may stop on extrapolation roundoff; its own
    # error estimate is authoritative, the target is 1e-8 relative
    if not math.isfinite(val) or val <= 0 or abserr > 1e-8 * val:
        raise FloatingPointError(f"quadrature failed for exponent a={a!r} (estimate {val!r}, error {abserr!r})")
    return val


def _i1_exponent(beta: float, delta: float) -> float:
    return (1 - 2 * delta) / (2 * beta) + 2


def integral_i1(beta: float, delta: float) -> float:
    """Signal tail integral I1(beta, delta).

    delta = 0 is accepted as an alias for the noise integral I2(beta): the
    literal exponent would diverge there, and every identity in which the
    delta = 0 case appears means the noise integral.
    """
    if delta == 0:
        return integral_i2(beta)
    return _tail_integral(_i1_exponent(beta, delta))


def integral_i2(beta: float) -> float:
    """Noise tail integral I2(beta); requires beta > 1/2."""
    return _tail_integral(1 / (2 * beta))


def integral_i1_closed_form(beta: float, delta: float) -> float:
    """Reflection-formula value of I1; independent oracle for the quadrature."""
    if delta == 0:
        return integral_i2_closed_form(beta)
    a = _i1_exponent(beta, delta)
    if not 0 < a < 2:
        raise DivergentIntegralError(f"exponent a={a!r} outside (0, 2); integral diverges")
    if a == 1.0:
        return 1.0
    return (1 - a) * math.pi / math.sin(math.pi * a)


def integral_i2_closed_form(beta: float) -> float:
    a = 1 / (2 * beta)
    if not 0 < a < 2:
        raise DivergentIntegralError(f"exponent a={a!r} outside (0, 2); integral diverges")
    return (1 - a) * math.pi / math.sin(math.pi * a)


def kappa(beta: float, delta: float, *, closed_form: bool = False) -> float:
    """Rate constant combining the two tail integrals.

    kappa = I1^(1/2d) I2^(1-1/2d) (2d-1)^(1/2d) d / (b (2d-1)), defined on the
    minimax window.  ``closed_form=True`` switches both integrals to the
    reflection-formula oracle.
    """
    if closed_form:
        i1, i2 = integral_i1_closed_form(beta, delta), integral_i2_closed_form(beta)
    else:
        i1, i2 = integral_i1(beta, delta), integral_i2(beta)
    e = 1 / (2 * delta)
    return i1**e * i2 ** (1 - e) * (2 * delta - 1) ** e * delta / (beta * (2 * delta - 1))


def t_star(beta: float, delta: float, lam: float) -> float:
    """Maximizer of t -> t^(4b-2d) / (1 + lam t^(2b))^2 on the positive axis."""
    if 4 * beta <= 2 * delta:
        raise ValueError("need 4 beta > 2 delta for an interior maximum")
    if lam <= 0:
        raise ValueError("lam must be positive")
    return ((4 * beta - 2 * delta) / (2 * delta * lam)) ** (1 / (2 * beta))


def alpha_constant(beta: float, delta: float) -> float:
    """Lower-bound constant: smaller of the two unit-interval mass fractions.

    Each fraction is int_0^1 / int_0^inf of the respective tail integrand; the
    substitution maps u in [0, 1] to v in [0, 1/2].
    """
    if not 1 < 2 * delta < 4 * beta:
        raise ValueError("alpha constant requires 1 < 2 delta < 4 beta")

    def fraction(a: float) -> float:
        return _tail_integral(a, 0.5) / _tail_integral(a)

    return min(fraction(1 / (2 * beta)), fraction(_i1_exponent(beta, delta)))


def epsilon_cap(params: RiskParams) -> float:
    """Exact localization cap: the optimizer of the template risk lies in [0, cap].

    Solves C eps^2/(1+eps)^2 = 2^(1/2d) (np/sigma2)^(1/2d-1) C^(1/2d) kappa for
    eps, which needs sqrt(A) (np/sigma2)^(1/4d - 1/2) < 1.
    """
    if not params.satisfies_hm:
        raise NoEpsilonCapError("cap is defined only on the minimax window")
    if params.c == 0:
        raise NoEpsilonCapError("cap is undefined for a zero signal amplitude")
    d = params.delta
    x = params.n * params.p / params.sigma2
    a_const = params.c ** (1 / (2 * d) - 1) * 2 ** (1 / (2 * d)) * kappa(params.beta, d)
    s = math.sqrt(a_const) * x ** (1 / (4 * d) - 0.5)
    if s >= 1:
        raise NoEpsilonCapError(f"np/sigma2 = {x!r} too small for the cap (coefficient {s!r} >= 1)")
    return s / (1 - s)


def upper_bound(params: RiskParams) -> float:
    """min of the rate-form upper bound and the zero-regularization value sigma2/p."""
    d = params.delta
    x = params.n * params.p / params.sigma2
    rate = 2 ** (1 / (2 * d)) * x ** (1 / (2 * d) - 1) * params.c ** (1 / (2 * d)) * kappa(params.beta, d)
    return min(rate, params.sigma2 / params.p)


def lower_bound(params: RiskParams, alpha: float) -> float:
    d = params.delta
    x = params.n * params.p / params.sigma2
    rate = alpha * x ** (1 / (2 * d) - 1) * params.c ** (1 / (2 * d)) * kappa(params.beta, d)
    return min(rate, params.sigma2 / (4 * params.p))


def minimize_template(params: RiskParams, n_grid: int = 64) -> ProfileMinimum:
    """Locate the template risk minimum over lam in [0, inf]."""
    try:
        hi = max(GRID_HI_DEFAULT, 2.0 * epsilon_cap(params))
    except NoEpsilonCapError:
        hi = GRID_HI_UNCAPPED
    return minimize_profile(template_profile(params), lo=GRID_LO, hi=hi, n_grid=n_grid)


def _classify(params: RiskParams, lambda_star: float, r_star: float) -> Regime:
    threshold = float(params.n) ** (-2.0 * params.beta)
    d = params.delta
    rate = (
        (params.sigma2 / (params.n * params.p)) ** (1 - 1 / (2 * d))
        * params.c ** (1 / (2 * d))
        * kappa(params.beta, d)
    ) if params.satisfies_hm else math.nan
    if lambda_star >= threshold and math.isfinite(rate) and rate > 0 and rate / 4 <= r_star <= 4 * rate:
        return Regime.REGULARIZE
    if lambda_star <= threshold and params.sigma2 / (4 * params.p) <= r_star <= params.sigma2 / params.p:
        return Regime.TRIVIAL_NOISE
    return Regime.UNDETERMINED


def minimize_risk(params: RiskParams) -> BoundReport:
    """Optimize the template risk and attach the theoretical envelope.

    Bounds that require the minimax (resp. lower-bound) window are reported
    as nan outside it instead of being extrapolated.
    """
    best = minimize_template(params)
    kap = kappa(params.beta, params.delta) if params.satisfies_hm else math.nan
    upper = upper_bound(params) if params.satisfies_hm else math.nan
    alpha = alpha_constant(params.beta, params.delta) if params.satisfies_lb else math.nan
    lower = lower_bound(params, alpha) if params.satisfies_lb else math.nan
    try:
        cap = epsilon_cap(params)
    except NoEpsilonCapError:
        cap = math.nan
    return BoundReport(
        r_star=best.value,
        lambda_star=best.lam,
        upper=upper,
        lower=lower,
        epsilon_cap=cap,
        regime=_classify(params, best.lam, best.value),
        kappa=kap,
        alpha=alpha,
    )


def classify_regime(params: RiskParams) -> Regime:
    """Regularization-useful vs noise-trivial classification of the optimum."""
    best = minimize_template(params)
    return _classify(params, best.lam, best.value)
