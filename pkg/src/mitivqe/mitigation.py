"""Measurement-error mitigation: confusion-matrix inversion, twirled
readout extinction, and zero-noise extrapolation.

All three schemes post-process data produced by the estimator; none of
them changes how shots were taken, so overhead accounting is explicit
and additive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .circuits import Circuit, Counts, NoiseModel, sample
from .errors import MitigationError, ResourceError
from .estimator import (EnergyEstimate, GroupMeasurement, MeasurementPlan,
                        assemble, dense_signs, measure_plan)
from .pauli import PauliSum, qubit_bit

REM_QUBIT_LIMIT = 6
CONDITION_LIMIT = 1e6
LAMBDA_FLOOR = 0.05


# ---------------------------------------------------------------------------
# Brute-force readout-error mitigation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic map P(measured row | prepared column)."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        dim = 1 << self.n_qubits
        m = self.matrix
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} for {self.n_qubits} qubits")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise ValueError("confusion-matrix entries outside [0, 1]")
        if np.any(np.abs(m.sum(axis=0) - 1.0) > 1e-9):
            raise ValueError("confusion-matrix columns must sum to 1")


def rem_analytic(n_qubits: int, noise: NoiseModel) -> ConfusionMatrix:
    """Exact confusion matrix of independent per-qubit readout flips."""
    if n_qubits > REM_QUBIT_LIMIT:
        raise ResourceError(f"{n_qubits} qubits exceed the "
                            f"{REM_QUBIT_LIMIT}-qubit confusion-matrix guard")
    e0, e1 = noise.readout_arrays(n_qubits)
    m = np.array([[1.0]])
    for j in range(n_qubits):
        single = np.array([[1 - e0[j], e1[j]], [e0[j], 1 - e1[j]]])
        m = np.kron(m, single)
    return ConfusionMatrix(n_qubits, m)


def rem_calibrate(n_qubits: int, noise: NoiseModel | None, shots_per_state: int,
                  seed=0) -> ConfusionMatrix:
    """Estimate the confusion matrix by preparing every basis state."""
    if n_qubits > REM_QUBIT_LIMIT:
        raise ResourceError(f"{n_qubits} qubits exceed the "
                            f"{REM_QUBIT_LIMIT}-qubit confusion-matrix guard")
    if shots_per_state <= 0:
        raise ValueError("shots_per_state must be positive")
    dim = 1 << n_qubits
    m = np.zeros((dim, dim))
    for x in range(dim):
        c = Circuit(n_qubits)
        for q in range(n_qubits):
            if x & qubit_bit(q, n_qubits):
                c.x(q)
        words = np.random.SeedSequence([int(seed) % (1 << 63), x]).generate_state(1)
        counts = sample(c, None, shots_per_state, noise, int(words[0]))
        m[:, x] = counts.frequencies()
    return ConfusionMatrix(n_qubits, m)


def rem_apply(a: ConfusionMatrix, counts) -> np.ndarray:
    """Invert the readout map on a frequency vector.

    ``counts`` may be a Counts histogram or a dense frequency array.
    The result is a quasi-probability vector: entries can be negative
    but the total stays 1.
    """
    freq = counts.frequencies() if isinstance(counts, Counts) \
        else np.asarray(counts, dtype=float)
    if freq.shape != (1 << a.n_qubits,):
        raise ValueError(f"frequency vector of length {freq.size} "
                         f"for {a.n_qubits} qubits")
    cond = np.linalg.cond(a.matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise MitigationError(
            f"confusion matrix condition number {cond:.3g} exceeds "
            f"{CONDITION_LIMIT:g}; inversion would amplify noise")
    return np.linalg.solve(a.matrix, freq)


def rem_energy(h: PauliSum, measurements: list[GroupMeasurement],
               plan: MeasurementPlan, a: ConfusionMatrix,
               extra_shots: int = 0, extra_circuits: int = 0) -> EnergyEstimate:
    """Assemble the energy from readout-corrected quasi-probabilities.

    The variance is propagated through the linear map: the per-outcome
    weight u = A^-T (sum_m c_m s_m) replaces the raw group value, and
    its sample variance is the delta-method error bar.
    """
    value = float(h.identity_coefficient.real)
    variance = 0.0
    for m in measurements:
        signs = np.stack([dense_signs(h.n_qubits, int(s)) for s in m.supports])
        v_dense = m.coefficients @ signs
        quasi = rem_apply(a, m.counts)
        value += float(v_dense @ quasi)
        u = np.linalg.solve(a.matrix.T, v_dense)
        keys, freq = m.counts.outcome_array()
        total = freq.sum()
        if total > 1:
            mean = float(u[keys] @ freq / total)
            second = float(u[keys] ** 2 @ freq / total)
            variance += max(second - mean**2, 0.0) * total / (total - 1) / total
    shots = len(measurements) * plan.shots_per_group + extra_shots
    circuits = len(measurements) * max(plan.twirls_per_group, 1) + extra_circuits
    return EnergyEstimate(value, variance, shots, circuits)


# ---------------------------------------------------------------------------
# Twirled readout error extinction
# ---------------------------------------------------------------------------

@dataclass
class TrexCalibration:
    """Attenuation factors of Z-products under twirled readout noise.

    ``counts`` pools the twirl-unflipped outcomes of every calibration
    circuit; lambda values are derived from it on demand and cached in
    ``lambda_map``.
    """

    n_qubits: int
    counts: Counts
    shots_used: int
    n_calibration_circuits: int
    lambda_map: dict[int, float] = field(default_factory=dict)

    def lambda_for(self, mask: int) -> float:
        if mask == 0:
            return 1.0
        cached = self.lambda_map.get(mask)
        if cached is not None:
            return cached
        keys, freq = self.counts.outcome_array()
        par = np.bitwise_count(keys & np.int64(mask)) & 1
        lam = float((1.0 - 2.0 * par) @ freq / freq.sum())
        self.lambda_map[mask] = lam
        return lam


def trex_calibrate(n_qubits: int, noise: NoiseModel | None, total_shots: int,
                   n_twirl_circuits: int = 16, seed=0) -> TrexCalibration:
    """Measure the identity circuit under random (or exhaustive) X twirls.

    For n_qubits <= 5 and a circuit budget divisible by 2^n the twirl
    masks enumerate every bit pattern; otherwise they are drawn uniformly.
    """
    if n_twirl_circuits <= 0:
        raise ValueError("need at least one calibration circuit")
    if total_shots % n_twirl_circuits:
        raise ValueError(f"{total_shots} shots not divisible by "
                         f"{n_twirl_circuits} circuits")
    shots_each = total_shots // n_twirl_circuits
    dim = 1 << n_qubits
    exhaustive = n_qubits <= 5 and n_twirl_circuits % dim == 0

    merged = Counts(n_qubits, {})
    for t in range(n_twirl_circuits):
        words = np.random.SeedSequence(
            [int(seed) % (1 << 63), t, 0x7e]).generate_state(2)
        if exhaustive:
            mask = t % dim
        else:
            mask = int(np.random.default_rng(int(words[0])).integers(0, dim))
        c = Circuit(n_qubits)
        for q in range(n_qubits):
            if mask & qubit_bit(q, n_qubits):
                c.x(q)
        counts = sample(c, None, shots_each, noise, int(words[1]))
        merged = merged.merged_with(counts.xor_mask(mask))

    cal = TrexCalibration(n_qubits, merged, total_shots, n_twirl_circuits)
    if n_qubits <= REM_QUBIT_LIMIT:
        for mask in range(dim):
            cal.lambda_for(mask)
    return cal


def trex_scales(measurement: GroupMeasurement, cal: TrexCalibration) -> np.ndarray:
    """Per-member multipliers 1/lambda; errors out when attenuation is extreme."""
    lam = np.array([cal.lambda_for(int(s)) for s in measurement.supports])
    bad = lam < LAMBDA_FLOOR
    if np.any(bad):
        worst = lam.min()
        raise MitigationError(
            f"twirled attenuation {worst:.4f} below the {LAMBDA_FLOOR} floor; "
            "readout noise too strong to divide out")
    return 1.0 / lam


def trex_term_means(measurement: GroupMeasurement,
                    cal: TrexCalibration) -> np.ndarray:
    """Raw twirled term means divided by their attenuation factors."""
    return measurement.term_means() * trex_scales(measurement, cal)


def trex_estimate(h: PauliSum, measurements: list[GroupMeasurement],
                  plan: MeasurementPlan, cal: TrexCalibration,
                  extra_shots: int = 0, extra_circuits: int = 0) -> EnergyEstimate:
    """Energy with every term mean rescaled by 1/lambda (variance by 1/lambda^2)."""
    scales = [trex_scales(m, cal) for m in measurements]
    return assemble(h, measurements, plan, term_scales=scales,
                    extra_shots=extra_shots, extra_circuits=extra_circuits)


# ---------------------------------------------------------------------------
# Zero-noise extrapolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZneSeries:
    """Measured energies at amplified noise scales, plus the fit family."""

    points: tuple[tuple[int, float], ...]
    fit_kind: str = "exponential"

    def __post_init__(self):
        if self.fit_kind not in ("linear", "quadratic", "exponential"):
            raise ValueError(f"unknown fit kind {self.fit_kind!r}")
        need = 2 if self.fit_kind == "linear" else 3
        if len(self.points) < need:
            raise ValueError(f"{self.fit_kind} fit needs >= {need} points, "
                             f"got {len(self.points)}")
        scales = [s for s, _ in self.points]
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ValueError("scales must be strictly increasing")
        if any(s < 1 or s % 2 == 0 for s in scales):
            raise ValueError("scales must be odd positive integers")


def _exponential_closed_form(x, y):
    """a e^{bx} + c through three equally spaced points; returns (a, b, c)."""
    d = x[1] - x[0]
    dy1, dy2 = y[1] - y[0], y[2] - y[1]
    if dy1 == 0 or dy2 / dy1 <= 0:
        raise MitigationError("series is not monotone-geometric; "
                              "no exponential through the three points")
    r = dy2 / dy1
    b = np.log(r) / d
    a = dy1 / ((r - 1.0) * np.exp(b * x[0]))
    c = y[0] - a * np.exp(b * x[0])
    return a, b, c


def zne_fit(series: ZneSeries) -> float:
    """Extrapolated value at noise scale zero for the series' fit family."""
    x = np.array([s for s, _ in series.points], dtype=float)
    y = np.array([v for _, v in series.points], dtype=float)
    if series.fit_kind == "linear":
        return float(np.polyfit(x, y, 1)[-1])
    if series.fit_kind == "quadratic":
        return float(np.polyfit(x, y, 2)[-1])

    spacing = np.diff(x)
    if len(x) == 3 and np.allclose(spacing, spacing[0]):
        a, b, c = _exponential_closed_form(x, y)
    else:
        try:
            a0, b0, c0 = (y[0] - y[-1], -0.3, y[-1])
            (a, b, c), _ = curve_fit(
                lambda t, a, b, c: a * np.exp(b * t) + c, x, y,
                p0=(a0, b0, c0), maxfev=10000)
        except (RuntimeError, TypeError) as exc:
            raise MitigationError(f"exponential fit did not converge: {exc}") \
                from None
    magnitudes = np.abs(y)
    if b >= 0 and np.all(np.diff(magnitudes) > 0):
        raise MitigationError(
            "fitted exponent is non-decaying while the series grows; "
            "extrapolation to zero noise is not meaningful")
    return float(a + c)


def zne_extrapolate(points) -> tuple[float, str]:
    """Fallback ladder exponential -> quadratic -> linear.

    Returns the extrapolated value and the fit kind that produced it.
    """
    last_error: Exception | None = None
    for kind in ("exponential", "quadratic", "linear"):
        try:
            return zne_fit(ZneSeries(tuple(points), kind)), kind
        except (MitigationError, ValueError) as exc:
            last_error = exc
    raise MitigationError(f"every extrapolation family failed: {last_error}")


def zne_series(h: PauliSum, ansatz: Circuit, values, plan: MeasurementPlan,
               noise: NoiseModel, seed=0,
               scales=(1, 3, 5)) -> list[tuple[int, EnergyEstimate]]:
    """Estimate the energy at each folded noise scale."""
    out = []
    for scale in scales:
        folded = ansatz.folded(int(scale))
        words = np.random.SeedSequence(
            [int(seed) % (1 << 63), int(scale), 0x5a]).generate_state(1)
        measurements = measure_plan(h, folded, values, plan, noise,
                                    int(words[0]))
        out.append((int(scale), assemble(h, measurements, plan)))
    return out
