import numpy as np
import pytest

from mitivqe.errors import OptimizerError
from mitivqe.spsa import (
    SpsaConfig,
    SpsaState,
    calibrate,
    learning_rate,
    perturbation_size,
    rademacher,
    run,
    step,
)


class CountingCost:
    """Wrap a cost function and count how often it is evaluated."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, theta):
        self.calls += 1
        return self.fn(theta)


class FixedDirection:
    """Stand-in generator whose Rademacher draws are all +1."""

    def integers(self, low, high, size):
        return np.ones(size, dtype=np.int64)


def quadratic(theta):
    return float(theta @ theta)


class TestConfig:
    def test_defaults(self):
        config = SpsaConfig()
        assert config.alpha == 0.602
        assert config.gamma == 0.101
        assert config.stability == 0.0
        assert config.c == 0.2
        assert config.max_iterations == 250
        assert config.calibration_calls == 50
        assert abs(config.target_first_step - 2 * np.pi / 10) < 1e-15
        assert config.total_calls == 551

    def test_validation(self):
        with pytest.raises(ValueError):
            SpsaConfig(alpha=0.1, gamma=0.2)
        with pytest.raises(ValueError):
            SpsaConfig(gamma=0.0)
        with pytest.raises(ValueError):
            SpsaConfig(c=0.0)
        with pytest.raises(ValueError):
            SpsaConfig(calibration_calls=49)
        with pytest.raises(ValueError):
            SpsaConfig(calibration_calls=0)
        with pytest.raises(ValueError):
            SpsaConfig(max_iterations=0)
        with pytest.raises(ValueError):
            SpsaConfig(stability=-1.0)
        with pytest.raises(ValueError):
            SpsaConfig(target_first_step=0.0)


class TestGainSeries:
    def test_closed_form_spot_checks(self):
        config = SpsaConfig()
        a = np.pi / 10
        for k in (1, 10, 100):
            assert abs(perturbation_size(config, k) - 0.2 / k**0.101) < 1e-12
            assert abs(learning_rate(config, a, k) - a / k**0.602) < 1e-12

    def test_first_perturbation_is_c_exactly(self):
        assert perturbation_size(SpsaConfig(), 1) == 0.2

    def test_both_series_strictly_decrease(self):
        config = SpsaConfig()
        c_series = [perturbation_size(config, k) for k in range(1, 251)]
        a_series = [learning_rate(config, 0.3, k) for k in range(1, 251)]
        assert all(x > y for x, y in zip(c_series, c_series[1:]))
        assert all(x > y for x, y in zip(a_series, a_series[1:]))

    def test_stability_shifts_the_learning_rate(self):
        config = SpsaConfig(stability=10.0)
        assert abs(learning_rate(config, 1.0, 1) - 11.0**-0.602) < 1e-12


class TestRademacher:
    def test_values_are_plus_minus_one(self, rng):
        draw = rademacher(rng, 64)
        assert draw.dtype == np.float64
        assert set(np.unique(draw)) <= {-1.0, 1.0}

    def test_zero_mean_per_component(self):
        rng = np.random.default_rng(99)
        n = 10**4
        total = np.zeros(16)
        for _ in range(n):
            total += rademacher(rng, 16)
        sigma = 1.0 / np.sqrt(n)
        assert np.all(np.abs(total / n) < 5 * sigma)


class TestCalibrate:
    def test_linear_slope_is_exact(self):
        # f = 2*theta_0: |f+ - f-| / (2c) = 2 for every direction, so
        # a = (2 pi / 10) / 2 regardless of the draws.
        cost = lambda th: 2.0 * th[0]
        a = calibrate(cost, np.zeros(3), SpsaConfig(seed=4))
        assert abs(a - np.pi / 10) < 1e-12

    def test_constant_cost_raises(self):
        with pytest.raises(OptimizerError):
            calibrate(lambda th: 1.5, np.zeros(4), SpsaConfig(seed=1))

    def test_uses_exactly_the_calibration_budget(self):
        cost = CountingCost(quadratic)
        calibrate(cost, np.full(6, 0.3), SpsaConfig(seed=2))
        assert cost.calls == 50

    def test_shot_noise_changes_a_by_under_twenty_percent(self):
        theta0 = np.full(8, 0.5)
        clean = calibrate(quadratic, theta0, SpsaConfig(seed=5))
        for s in range(50):
            noise = np.random.default_rng(4000 + s)
            noisy = lambda th: quadratic(th) + noise.normal(0.0, 0.01)
            a = calibrate(noisy, theta0, SpsaConfig(seed=5))
            assert abs(a - clean) < 0.2 * clean


class TestStep:
    def test_one_dimensional_worked_example(self):
        # f = theta^2 at theta = 1 with delta = +1, k = 1: the probes are
        # 1.2^2 and 0.8^2, the slope estimate is 2, and a_1 = 0.1 moves
        # theta to 0.8.
        state = SpsaState(config=SpsaConfig(), theta=np.array([1.0]),
                          a=0.1, rng=FixedDirection())
        step(state, quadratic)
        assert abs(state.theta[0] - 0.8) < 1e-12
        assert state.iteration == 1
        record = state.history[0]
        assert record.iteration == 1
        assert abs(record.f_plus - 1.44) < 1e-12
        assert abs(record.f_minus - 0.64) < 1e-12
        assert record.theta[0] == 1.0

    def test_uses_exactly_two_calls(self):
        cost = CountingCost(quadratic)
        state = SpsaState(config=SpsaConfig(), theta=np.ones(5), a=0.1,
                          rng=np.random.default_rng(3))
        step(state, cost)
        assert cost.calls == 2

    def test_nan_cost_reports_the_iteration(self):
        state = SpsaState(config=SpsaConfig(), theta=np.ones(2), a=0.1,
                          rng=np.random.default_rng(3))
        with pytest.raises(OptimizerError, match="iteration 1"):
            step(state, lambda th: float("nan"))

    def test_gradient_estimate_is_unbiased_on_a_quadratic(self):
        # With a = 1 and k = 1 the update equals the gradient estimate,
        # whose mean on f = |theta|^2 is exactly the analytic gradient.
        config = SpsaConfig()
        theta = np.ones(2)
        state = SpsaState(config=config, theta=theta.copy(), a=1.0,
                          rng=np.random.default_rng(11))
        n = 10**4
        total = np.zeros(2)
        for _ in range(n):
            state.theta = theta.copy()
            state.iteration = 0
            step(state, quadratic)
            total += theta - state.theta
        assert np.all(np.abs(total / n - 2.0) < 0.02 * 2.0)


class TestRun:
    def test_call_count_is_exactly_551(self):
        cost = CountingCost(quadratic)
        run(cost, np.full(4, 0.5), SpsaConfig(seed=8))
        assert cost.calls == 551

    def test_call_count_follows_the_budget_formula(self):
        config = SpsaConfig(seed=8, max_iterations=7, calibration_calls=10)
        cost = CountingCost(quadratic)
        run(cost, np.full(4, 0.5), config)
        assert cost.calls == config.total_calls == 10 + 14 + 1

    def test_history_and_final_value(self):
        theta, state = run(quadratic, np.full(3, 0.4), SpsaConfig(seed=9))
        assert len(state.history) == 250
        assert [r.iteration for r in state.history] == list(range(1, 251))
        assert state.final_value == quadratic(theta)

    def test_same_seed_reproduces_the_trajectory_bitwise(self):
        theta0 = np.full(6, 0.3)
        t1, s1 = run(quadratic, theta0, SpsaConfig(seed=12))
        t2, s2 = run(quadratic, theta0, SpsaConfig(seed=12))
        assert np.array_equal(t1, t2)
        for r1, r2 in zip(s1.history, s2.history):
            assert np.array_equal(r1.theta, r2.theta)
            assert r1.f_plus == r2.f_plus and r1.f_minus == r2.f_minus

    def test_different_seeds_diverge(self):
        theta0 = np.full(6, 0.3)
        t1, _ = run(quadratic, theta0, SpsaConfig(seed=12))
        t2, _ = run(quadratic, theta0, SpsaConfig(seed=13))
        assert not np.array_equal(t1, t2)

    def test_sixteen_dimensional_quadratic_converges(self):
        # The default first step of 2 pi / 10 per component overshoots on
        # this bare quadratic in 16 dimensions; a 0.3 first step keeps
        # the early iterations contractive while staying well inside the
        # regime the gain series is designed for.
        good = 0
        for seed in range(30):
            start = np.random.default_rng(1000 + seed)
            theta0 = start.normal(size=16)
            theta0 /= np.linalg.norm(theta0)
            config = SpsaConfig(seed=seed, target_first_step=0.3)
            theta, _ = run(quadratic, theta0, config)
            good += np.linalg.norm(theta) < 0.1
        assert good >= 28
