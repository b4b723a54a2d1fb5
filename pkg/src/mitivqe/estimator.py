"""Grouped expectation-value estimation with optional measurement twirling.

Each qubit-wise commuting group is measured through one basis-change
subcircuit (X -> RY(-pi/2); Y -> RZ(-pi/2) then RY(-pi/2); Z untouched),
after which every member observable is a product of Z factors read off
the outcome bits.  Twirled measurement inserts a random X layer before
readout and undoes it classically by XOR, leaving the ideal distribution
unchanged while symmetrizing readout errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Counts, Gate, NoiseModel, sample, statevector
from .errors import DimensionError, PlanError
from .pauli import PauliSum, QwcGroup, expectation_dense, qubit_bit, qwc_group

HALF_PI = 0.5 * np.pi


def basis_change_circuit(basis: str) -> Circuit:
    """Rotations mapping the group basis to all-Z before measurement."""
    c = Circuit(len(basis))
    for q, ax in enumerate(basis):
        if ax == "X":
            c.ry(q, -HALF_PI)
        elif ax == "Y":
            c.rz(q, -HALF_PI)
            c.ry(q, -HALF_PI)
        elif ax not in ("I", "Z"):
            raise ValueError(f"invalid basis character {ax!r}")
    return c


@dataclass(frozen=True)
class MeasurementPlan:
    """How to spend shots: which groups, how many shots, how many twirls."""

    groups: tuple[QwcGroup, ...]
    shots_per_group: int
    twirls_per_group: int = 0

    def __post_init__(self):
        if self.shots_per_group <= 0:
            raise ValueError(f"shots_per_group must be positive, "
                             f"got {self.shots_per_group}")
        if self.twirls_per_group < 0:
            raise ValueError("twirls_per_group must be non-negative")
        if self.twirls_per_group and self.shots_per_group % self.twirls_per_group:
            raise ValueError(
                f"{self.twirls_per_group} twirls do not divide "
                f"{self.shots_per_group} shots")

    @classmethod
    def for_hamiltonian(cls, h: PauliSum, shots_per_group: int,
                        twirls_per_group: int = 0) -> "MeasurementPlan":
        return cls(tuple(qwc_group(h)), shots_per_group, twirls_per_group)

    @property
    def shots_per_twirl(self) -> int:
        if self.twirls_per_group:
            return self.shots_per_group // self.twirls_per_group
        return self.shots_per_group

    @property
    def circuits_per_estimate(self) -> int:
        return len(self.groups) * max(self.twirls_per_group, 1)


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    variance: float
    shots_used: int
    circuits_executed: int

    @property
    def std_error(self) -> float:
        return float(np.sqrt(max(self.variance, 0.0)))


def dense_signs(n_qubits: int, support: int) -> np.ndarray:
    """(-1)^(parity of outcome bits under the mask) for every outcome."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    par = np.bitwise_count(idx & np.int64(support)) & 1
    return 1.0 - 2.0 * par


@dataclass
class GroupMeasurement:
    """Raw data of one measured group, kept for mitigation post-processing.

    ``counts`` holds twirl-unflipped outcomes merged over all twirl
    circuits of the group; member coefficients and Z-support masks are
    captured so estimates can be reassembled without the Hamiltonian.
    """

    group: QwcGroup
    coefficients: np.ndarray
    supports: np.ndarray
    counts: Counts

    @property
    def shots(self) -> int:
        return self.counts.total_shots

    def _sign_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(per-outcome sign matrix members x outcomes, outcome counts)."""
        keys, freq = self.counts.outcome_array()
        signs = np.empty((len(self.supports), keys.size))
        for m, sup in enumerate(self.supports):
            par = np.bitwise_count(keys & np.int64(sup)) & 1
            signs[m] = 1.0 - 2.0 * par
        return signs, freq

    def term_means(self) -> np.ndarray:
        signs, freq = self._sign_table()
        return signs @ (freq / freq.sum())

    def term_mean_variances(self) -> np.ndarray:
        """Sample variance of each term's mean estimator."""
        shots = self.shots
        means = self.term_means()
        if shots < 2:
            return np.zeros_like(means)
        return (1.0 - means**2) * shots / (shots - 1) / shots

    def value_and_variance(self, term_scale=None) -> tuple[float, float]:
        """Group energy contribution and the variance of its mean.

        The per-shot group value v = sum_m c_m * sign_m keeps member
        correlations, so its sample variance is the honest error bar.
        ``term_scale`` multiplies each coefficient (mitigation rescaling).
        """
        coeff = self.coefficients if term_scale is None \
            else self.coefficients * np.asarray(term_scale, dtype=float)
        signs, freq = self._sign_table()
        v = coeff @ signs
        total = freq.sum()
        mean = float(v @ freq / total)
        if total < 2:
            return mean, 0.0
        second = float(v**2 @ freq / total)
        var_mean = max(second - mean**2, 0.0) * total / (total - 1) / total
        return mean, var_mean


def check_plan(h: PauliSum, plan: MeasurementPlan) -> list[int]:
    """Verify the plan covers every non-identity term of ``h`` exactly once."""
    terms = h.terms
    wanted = {i for i, (_, s) in enumerate(terms) if s.support}
    seen: set[int] = set()
    for g in plan.groups:
        if len(g.basis) != h.n_qubits:
            raise PlanError(f"group basis {g.basis} does not fit "
                            f"{h.n_qubits} qubits")
        for i in g.members:
            if not 0 <= i < len(terms):
                raise PlanError(f"group member index {i} outside the "
                                f"{len(terms)}-term Hamiltonian")
            if i in seen:
                raise PlanError(f"term {i} appears in more than one group")
            string = terms[i][1]
            for q in range(h.n_qubits):
                ax = string.axis(q)
                if ax != "I" and ax != g.basis[q]:
                    raise PlanError(
                        f"term {string.label} incompatible with group "
                        f"basis {g.basis} on qubit {q}")
            seen.add(i)
    missing = wanted - seen
    if missing:
        labels = ", ".join(terms[i][1].label for i in sorted(missing))
        raise PlanError(f"plan does not cover terms: {labels}")
    return sorted(seen)


def _seed_words(seed, *key) -> np.ndarray:
    parts = [int(seed) % (1 << 63)] + [int(k) % (1 << 63) for k in key]
    return np.random.SeedSequence(parts).generate_state(2)


def _measure_group(h: PauliSum, ansatz: Circuit, values, group: QwcGroup,
                   plan: MeasurementPlan, noise: NoiseModel | None, seed,
                   g_index: int, prepared: np.ndarray | None) -> GroupMeasurement:
    n = ansatz.n_qubits
    terms = h.terms
    coeff = np.array([terms[i][0].real for i in group.members])
    supports = np.array([terms[i][1].support for i in group.members],
                        dtype=np.int64)
    basis = basis_change_circuit(group.basis)
    reps = max(plan.twirls_per_group, 1)
    fast = noise is None or not noise.has_gate_noise

    merged = Counts(n, {})
    for t in range(reps):
        words = _seed_words(seed, g_index, t)
        mask = 0
        if plan.twirls_per_group:
            mask = int(np.random.default_rng(int(words[0])).integers(0, 1 << n))
        twirl_gates = [Gate("X", (q,)) for q in range(n)
                       if mask & qubit_bit(q, n)]
        if fast:
            suffix = Circuit(n, list(basis.gates) + twirl_gates)
            cnt = sample(suffix, None, plan.shots_per_twirl, noise,
                         int(words[1]), initial=prepared)
        else:
            circ = Circuit(n, list(ansatz.gates) + list(basis.gates)
                           + twirl_gates, list(ansatz.parameters))
            cnt = sample(circ, values, plan.shots_per_twirl, noise,
                         int(words[1]))
        merged = merged.merged_with(cnt.xor_mask(mask))
    return GroupMeasurement(group, coeff, supports, merged)


def measure_plan(h: PauliSum, ansatz: Circuit, values, plan: MeasurementPlan,
                 noise: NoiseModel | None = None, seed=0) -> list[GroupMeasurement]:
    """Run every group of the plan and return the raw per-group data."""
    if h.n_qubits != ansatz.n_qubits:
        raise DimensionError(f"Hamiltonian on {h.n_qubits} qubits, "
                             f"ansatz on {ansatz.n_qubits}")
    check_plan(h, plan)
    prepared = None
    if noise is None or not noise.has_gate_noise:
        prepared = statevector(ansatz, values)
    return [_measure_group(h, ansatz, values, g, plan, noise, seed, i, prepared)
            for i, g in enumerate(plan.groups)]


def assemble(h: PauliSum, measurements: list[GroupMeasurement],
             plan: MeasurementPlan, term_scales=None,
             extra_shots: int = 0, extra_circuits: int = 0) -> EnergyEstimate:
    """Combine group measurements into one energy number.

    ``term_scales`` is an optional per-group array of member multipliers
    (mitigation rescaling); ``extra_shots``/``extra_circuits`` fold
    calibration overhead into the accounting.
    """
    value = float(h.identity_coefficient.real)
    variance = 0.0
    for i, m in enumerate(measurements):
        scale = None if term_scales is None else term_scales[i]
        v, var = m.value_and_variance(scale)
        value += v
        variance += var
    shots = len(measurements) * plan.shots_per_group + extra_shots
    circuits = len(measurements) * max(plan.twirls_per_group, 1) + extra_circuits
    return EnergyEstimate(value, variance, shots, circuits)


def estimate(h: PauliSum, ansatz: Circuit, values, plan: MeasurementPlan,
             noise: NoiseModel | None = None, seed=0) -> EnergyEstimate:
    """Sampled estimate of <psi(values)| h |psi(values)>."""
    if not plan.groups:
        return EnergyEstimate(float(h.identity_coefficient.real), 0.0, 0, 0)
    measurements = measure_plan(h, ansatz, values, plan, noise, seed)
    return assemble(h, measurements, plan)


def exact_expectation(h: PauliSum, ansatz: Circuit, values=None) -> float:
    """Noiseless expectation value straight from the statevector."""
    if h.n_qubits != ansatz.n_qubits:
        raise DimensionError(f"Hamiltonian on {h.n_qubits} qubits, "
                             f"ansatz on {ansatz.n_qubits}")
    return float(expectation_dense(h, statevector(ansatz, values)).real)
