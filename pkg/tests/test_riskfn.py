import math

import numpy as np
import pytest
from scipy.integrate import quad

from mtkrr.riskfn import (
    DivergentIntegralError,
    NoEpsilonCapError,
    Regime,
    RiskParams,
    alpha_constant,
    classify_regime,
    epsilon_cap,
    integral_i1,
    integral_i1_closed_form,
    integral_i2,
    integral_i2_closed_form,
    kappa,
    minimize_risk,
    minimize_template,
    risk_r,
    s1,
    s2,
    template_profile,
)


def gamma_oracle(a: float) -> float:
    """Independent route: int_0^inf u^(a-1)/(1+u)^2 du = Gamma(a) Gamma(2-a)."""
    return math.gamma(a) * math.gamma(2.0 - a)


class TestRiskR:
    def test_zero_lambda_is_noise_over_p(self):
        params = RiskParams(n=37, p=5, sigma2=1.3, beta=2, delta=2, c=1.0)
        assert risk_r(params, 0.0) == pytest.approx(1.3 / 5, rel=1e-12)

    def test_hand_evaluated_two_term_sum(self):
        # n=2, beta=delta=C=lam=1, p=1: S1 = 1/4 + 4/25, S2 = 1/4 + 1/25
        params = RiskParams(n=2, p=1, sigma2=1.0, beta=1, delta=1, c=1.0)
        expected = (0.25 + 4 / 25) + 0.5 * (0.25 + 1 / 25)
        assert risk_r(params, 1.0) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.555, abs=1e-12)

    def test_zero_signal_is_nonincreasing(self):
        params = RiskParams(n=30, p=2, sigma2=1.0, beta=2, delta=2, c=0.0)
        grid = np.geomspace(1e-8, 1e2, 50)
        vals = [risk_r(params, float(l)) for l in grid]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


class TestIntegrals:
    @pytest.mark.parametrize("beta", [0.75, 1.0, 1.5, 2.0, 4.0])
    def test_i2_matches_gamma_oracle(self, beta):
        assert integral_i2(beta) == pytest.approx(gamma_oracle(1 / (2 * beta)), rel=1e-9)

    def test_i2_reference_value(self):
        assert integral_i2(2.0) == pytest.approx(3.3322, abs=5e-5)

    @pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
    def test_i1_at_zero_decay_aliases_i2(self, beta):
        assert integral_i1(beta, 0.0) == integral_i2(beta)

    def test_i1_reference_value(self):
        assert integral_i1(2.0, 2.0) == pytest.approx(gamma_oracle(5 / 4), rel=1e-9)
        assert integral_i1(2.0, 2.0) == pytest.approx(1.1107, abs=5e-5)

    def test_divergent_parameters_rejected(self):
        with pytest.raises(DivergentIntegralError):
            integral_i1(1.0, 3.0)  # exponent (1-6)/2 + 2 = -0.5 <= 0
        with pytest.raises(DivergentIntegralError):
            integral_i2(0.2)  # exponent 1/(2 beta) = 2.5 >= 2
        with pytest.raises(DivergentIntegralError):
            integral_i1(1.0, 0.4)  # exponent (1-0.8)/2 + 2 = 2.1 >= 2

    def test_closed_forms_match_quadrature(self):
        for beta, delta in ((1.0, 1.0), (2.0, 2.0), (4.0, 2.0), (2.0, 1.5)):
            assert integral_i1(beta, delta) == pytest.approx(integral_i1_closed_form(beta, delta), rel=1e-9)
            assert integral_i2(beta) == pytest.approx(integral_i2_closed_form(beta), rel=1e-9)


class TestKappa:
    def test_both_routes_agree(self):
        assert kappa(2, 2) == pytest.approx(kappa(2, 2, closed_form=True), rel=1e-6)

    def test_reference_value(self):
        assert kappa(2, 2) == pytest.approx(1.111, abs=1.5e-3)

    def test_continuity(self):
        assert abs(kappa(2, 2) - kappa(2, 2 + 1e-6)) < 1e-4

    def test_positive_on_grid(self):
        for beta in (1.0, 2.0, 3.0, 4.0):
            for delta in np.linspace(0.55, 2 * beta - 0.05, 7):
                if 2 * delta < 4 * beta + 1:
                    assert kappa(beta, float(delta)) > 0


class TestTStar:
    def test_unit_value(self):
        from mtkrr.riskfn import t_star

        assert t_star(2, 2, 1.0) == pytest.approx(1.0, rel=1e-14)

    def test_scaling_law(self):
        from mtkrr.riskfn import t_star

        assert t_star(1, 0.8, 4 * 0.37) == pytest.approx(t_star(1, 0.8, 0.37) / 2, rel=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_is_local_maximum(self, seed):
        from mtkrr.riskfn import t_star

        rng = np.random.default_rng(seed)
        beta = float(rng.uniform(1, 3))
        delta = float(rng.uniform(0.6, 2 * beta - 0.1))
        lam = float(10 ** rng.uniform(-3, 1))

        def integrand(t):
            return t ** (4 * beta - 2 * delta) / (1 + lam * t ** (2 * beta)) ** 2

        ts = t_star(beta, delta, lam)
        assert integrand(ts) > integrand(ts * 1.01)
        assert integrand(ts) > integrand(ts * 0.99)

    def test_domain_error(self):
        from mtkrr.riskfn import t_star

        with pytest.raises(ValueError):
            t_star(1.0, 2.5, 0.1)


class TestEpsilonCap:
    def test_matching_condition(self):
        params = RiskParams(n=50, p=5, sigma2=1.0, beta=2, delta=2, c=1.0)
        eps = epsilon_cap(params)
        d = params.delta
        x = params.n * params.p / params.sigma2
        lhs = params.c * eps**2 / (1 + eps) ** 2
        rhs = 2 ** (1 / (2 * d)) * x ** (1 / (2 * d) - 1) * params.c ** (1 / (2 * d)) * kappa(2, 2)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_decreasing_in_sample_size(self):
        small = epsilon_cap(RiskParams(n=100, p=2, sigma2=1.0, beta=2, delta=2, c=1.0))
        large = epsilon_cap(RiskParams(n=200, p=2, sigma2=1.0, beta=2, delta=2, c=1.0))
        assert large < small

    def test_optimizer_lives_under_the_cap(self):
        params = RiskParams(n=50, p=5, sigma2=1.0, beta=2, delta=2, c=1.0)
        report = minimize_risk(params)
        assert report.lambda_star <= report.epsilon_cap
        assert math.isfinite(report.epsilon_cap) and report.epsilon_cap > 0

    def test_no_cap_for_tiny_problems(self):
        with pytest.raises(NoEpsilonCapError):
            epsilon_cap(RiskParams(n=1, p=1, sigma2=100.0, beta=2, delta=2, c=1.0))


class TestMinimizeRisk:
    def test_zero_signal_risk_vanishes(self):
        report = minimize_risk(RiskParams(n=40, p=2, sigma2=1.0, beta=2, delta=2, c=0.0))
        assert math.isinf(report.lambda_star)
        assert report.r_star == 0.0

    def test_upper_bound_single_task_example(self):
        params = RiskParams(n=50, p=1, sigma2=1.0, beta=2, delta=2, c=1.0)
        report = minimize_risk(params)
        assert report.r_star <= 2 ** 0.25 * 50 ** -0.75 * kappa(2, 2) * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_newton_result_beats_reference_grid(self, seed):
        rng = np.random.default_rng(seed + 500)
        beta = float(rng.uniform(1.0, 4.0))
        delta = float(rng.uniform(0.75, min(2 * beta + 0.3, 3.0)))
        params = RiskParams(
            n=int(rng.integers(10, 300)),
            p=int(rng.integers(1, 8)),
            sigma2=float(rng.uniform(0.3, 3.0)),
            beta=beta,
            delta=delta,
            c=float(10 ** rng.uniform(-1, 1)),
        )
        report = minimize_risk(params)
        profile = template_profile(params)
        try:
            hi = max(10.0, 2 * epsilon_cap(params))
        except NoEpsilonCapError:
            hi = 1e3
        grid = np.geomspace(1e-12, hi, 2000)
        oracle = min(float(profile.value_grid(grid).min()), profile.value(0.0))
        assert report.r_star <= oracle * (1 + 1e-8)


class TestRegimes:
    def test_moderate_problem_regularizes(self):
        assert classify_regime(RiskParams(n=200, p=2, sigma2=1.0, beta=2, delta=2, c=1.0)) is Regime.REGULARIZE

    def test_huge_task_count_is_noise_trivial(self):
        assert classify_regime(RiskParams(n=50, p=10**6, sigma2=1.0, beta=2, delta=2, c=1.0)) is Regime.TRIVIAL_NOISE

    def test_single_flip_along_task_sweep(self):
        labels = [
            classify_regime(RiskParams(n=50, p=int(round(p)), sigma2=1.0, beta=2, delta=2, c=1.0))
            for p in np.geomspace(1, 1e7, 15)
        ]
        informative = [lab for lab in labels if lab is not Regime.UNDETERMINED]
        collapsed = [lab for k, lab in enumerate(informative) if k == 0 or lab is not informative[k - 1]]
        assert collapsed == [Regime.REGULARIZE, Regime.TRIVIAL_NOISE]


class TestAlphaConstant:
    def test_reference_point_exceeds_published_floor(self):
        assert alpha_constant(2, 2) > 0.33

    def test_in_unit_interval_on_grid(self):
        for beta in (1.0, 2.0, 4.0):
            for delta in (0.75, 1.5, 1.9):
                if 2 * delta < 4 * beta:
                    assert 0 < alpha_constant(beta, float(delta)) < 1

    def test_stable_under_quadrature_refinement(self):
        # recompute both mass fractions with a much finer adaptive tolerance
        def fraction(a):
            f = lambda v: v ** (a - 1) * (1 - v) ** (1 - a)
            num, _ = quad(f, 0, 0.5, epsabs=0, epsrel=1e-13, limit=500)
            den, _ = quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=500)
            return num / den

        refined = min(fraction(1 / 4), fraction(5 / 4))
        assert alpha_constant(2, 2) == pytest.approx(refined, abs=1e-6)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            alpha_constant(1.0, 2.5)


class TestSumIntegralBounds:
    @pytest.mark.parametrize("seed", range(10))
    def test_s2_below_integral_envelope(self, seed):
        rng = np.random.default_rng(seed)
        beta = float(rng.uniform(0.8, 4.0))
        n = int(rng.integers(5, 500))
        lam = float(10 ** rng.uniform(-8, 2))
        assert s2(n, lam, beta) <= lam ** (-1 / (2 * beta)) / (2 * beta) * integral_i2(beta) * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_s1_below_integral_envelope(self, seed):
        rng = np.random.default_rng(seed + 50)
        beta = float(rng.uniform(0.8, 4.0))
        delta = float(rng.uniform(0.6, min(2 * beta - 0.05, 3.0)))
        n = int(rng.integers(5, 500))
        lam = float(10 ** rng.uniform(-8, 2))
        bound = lam ** ((2 * delta - 1) / (2 * beta)) / (beta * lam**2) * integral_i1(beta, delta)
        assert s1(n, lam, beta, delta) <= bound * (1 + 1e-12)


class TestSandwich:
    @pytest.mark.parametrize("n,p", [(100, 1), (100, 4), (400, 2), (800, 1)])
    @pytest.mark.parametrize("beta,delta", [(2.0, 2.0), (4.0, 2.0), (2.0, 1.5)])
    def test_bounds_bracket_the_optimum(self, n, p, beta, delta):
        params = RiskParams(n=n, p=p, sigma2=1.0, beta=beta, delta=delta, c=1.0)
        assert params.satisfies_hm and params.satisfies_lb and n * p >= 100
        report = minimize_risk(params)
        assert report.lower <= report.r_star <= report.upper * (1 + 1e-8)

    def test_rate_law_single_task(self):
        k = kappa(2, 2)
        for n in (50, 100, 200, 400):
            report = minimize_risk(RiskParams(n=n, p=1, sigma2=1.0, beta=2, delta=2, c=1.0))
            scaled = report.r_star * n**0.75
            assert 0.33 * k <= scaled <= 2**0.25 * k


def test_minimize_template_handles_missing_cap():
    params = RiskParams(n=2, p=1, sigma2=50.0, beta=2, delta=2, c=1.0)
    best = minimize_template(params)
    assert best.value <= min(risk_r(params, 0.0), risk_r(params, math.inf)) * (1 + 1e-12)


def test_params_flags():
    assert RiskParams(n=10, p=1, sigma2=1.0, beta=2, delta=2, c=1.0).satisfies_hm
    assert not RiskParams(n=10, p=1, sigma2=1.0, beta=0.6, delta=2, c=1.0).satisfies_hm
    assert not RiskParams(n=10, p=1, sigma2=1.0, beta=1, delta=2, c=1.0).satisfies_lb
