"""Simultaneous perturbation stochastic approximation.

Plain first-order SPSA: every iteration draws one Rademacher direction,
probes the cost symmetrically along it, and updates all parameters at
once from the two values.  The learning-rate prefactor is calibrated up
front from symmetric probes so that the first update has a prescribed
magnitude.  All randomness flows from a single seeded generator, so a
run is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import OptimizerError

CostFunction = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SpsaConfig:
    """Gain-series and budget settings for one optimization run.

    The perturbation series is c_k = c / k^gamma and the step series is
    a_k = a / (k + stability)^alpha with k counted from 1; the prefactor
    a comes from calibration, not from this config.
    """

    alpha: float = 0.602
    gamma: float = 0.101
    stability: float = 0.0
    c: float = 0.2
    max_iterations: int = 250
    calibration_calls: int = 50
    target_first_step: float = 2.0 * np.pi / 10.0
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > self.gamma > 0.0:
            raise ValueError("need alpha > gamma > 0")
        if self.stability < 0.0:
            raise ValueError("stability constant must be nonnegative")
        if self.c <= 0.0:
            raise ValueError("perturbation size c must be positive")
        if self.calibration_calls <= 0 or self.calibration_calls % 2:
            raise ValueError("calibration_calls must be positive and even")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.target_first_step <= 0.0:
            raise ValueError("target_first_step must be positive")

    @property
    def total_calls(self) -> int:
        """Cost evaluations a full run spends, final evaluation included."""
        return self.calibration_calls + 2 * self.max_iterations + 1


def perturbation_size(config: SpsaConfig, k: int) -> float:
    """Probe half-width c_k at 1-based iteration k."""
    return config.c / k**config.gamma


def learning_rate(config: SpsaConfig, a: float, k: int) -> float:
    """Step scale a_k at 1-based iteration k for calibrated prefactor a."""
    return a / (k + config.stability) ** config.alpha


def rademacher(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform random +-1 vector of length n."""
    return 2.0 * rng.integers(0, 2, n) - 1.0


@dataclass(frozen=True)
class SpsaRecord:
    """One gradient probe: the iterate and its two symmetric cost values."""

    iteration: int
    theta: np.ndarray
    f_plus: float
    f_minus: float


@dataclass
class SpsaState:
    """Mutable optimizer state threaded through the iteration loop."""

    config: SpsaConfig
    theta: np.ndarray
    a: float
    rng: np.random.Generator
    iteration: int = 0
    history: list[SpsaRecord] = field(default_factory=list)
    final_value: float | None = None


def calibrate(cost: CostFunction, theta0, config: SpsaConfig,
              rng: np.random.Generator | None = None) -> float:
    """Learning-rate prefactor from symmetric probes around theta0.

    Spends exactly config.calibration_calls evaluations in pairs
    cost(theta0 + c*delta), cost(theta0 - c*delta).  The mean absolute
    finite-difference slope g_hat fixes the prefactor so the first
    update has magnitude target_first_step.

    Raises OptimizerError when the probes see no variation at all, since
    no finite learning rate can be inferred from a flat landscape.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    theta0 = np.asarray(theta0, dtype=float)
    slopes = []
    for _ in range(config.calibration_calls // 2):
        delta = rademacher(rng, theta0.size)
        f_plus = float(cost(theta0 + config.c * delta))
        f_minus = float(cost(theta0 - config.c * delta))
        slopes.append(abs(f_plus - f_minus) / (2.0 * config.c))
    g_hat = float(np.mean(slopes))
    if not np.isfinite(g_hat):
        raise OptimizerError("calibration saw a non-finite cost value")
    if g_hat == 0.0:
        raise OptimizerError(
            "flat landscape: calibration probes saw no cost variation")
    return config.target_first_step * (1.0 + config.stability) ** config.alpha / g_hat


def step(state: SpsaState, cost: CostFunction) -> SpsaState:
    """Advance one iteration: two probes, one simultaneous update.

    The plus probe is always evaluated before the minus probe.  The
    pre-update iterate and both cost values are appended to the history.
    """
    k = state.iteration + 1
    c_k = perturbation_size(state.config, k)
    a_k = learning_rate(state.config, state.a, k)
    delta = rademacher(state.rng, state.theta.size)
    f_plus = float(cost(state.theta + c_k * delta))
    f_minus = float(cost(state.theta - c_k * delta))
    if np.isnan(f_plus) or np.isnan(f_minus):
        raise OptimizerError(f"cost returned NaN at iteration {k}")
    # 1/delta_i = delta_i for +-1 entries, so the simultaneous gradient
    # estimate is a scalar slope broadcast onto the direction itself.
    gradient = (f_plus - f_minus) / (2.0 * c_k) * delta
    state.history.append(SpsaRecord(k, state.theta.copy(), f_plus, f_minus))
    state.theta = state.theta - a_k * gradient
    state.iteration = k
    return state


def run(cost: CostFunction, theta0,
        config: SpsaConfig) -> tuple[np.ndarray, SpsaState]:
    """Calibrate, iterate, then evaluate the final point once.

    Spends exactly config.total_calls cost evaluations: the calibration
    budget, two per iteration, and one for the returned point (551 with
    the default settings).
    """
    rng = np.random.default_rng(config.seed)
    theta0 = np.asarray(theta0, dtype=float)
    a = calibrate(cost, theta0, config, rng)
    state = SpsaState(config=config, theta=theta0.copy(), a=a, rng=rng)
    for _ in range(config.max_iterations):
        step(state, cost)
    state.final_value = float(cost(state.theta))
    return state.theta.copy(), state
