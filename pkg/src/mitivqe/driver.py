"""Campaign orchestration: repeated optimizations, traces, summaries.

A campaign runs the optimizer n_repeats times from independent random
starts, records every cost evaluation in a trace, and aggregates the
final energies into best-k statistics and an error histogram.  Traces
use a flat CSV format so they can be replayed (re-evaluated exactly on
the statevector) or plotted without this package.

Cost evaluation modes, selected by the config:

* ``plan=None``: exact statevector expectation values, no sampling.
* plan + optional noise: shot-based estimates, optionally corrected by
  twirled-readout extinction (``trex``) or confusion-matrix inversion
  (``rem``), with one calibration per run.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .ansatz import AnsatzSpec
from .circuits import Circuit, NoiseModel
from .errors import DimensionError, MitivqeError, ParseError
from .estimator import MeasurementPlan, estimate, exact_expectation, measure_plan
from .mitigation import (
    REM_QUBIT_LIMIT,
    rem_calibrate,
    rem_energy,
    trex_calibrate,
    trex_estimate,
)
from .pauli import PauliSum, ground_energy
from .spsa import SpsaConfig
from .spsa import run as spsa_run

TRACE_KINDS = ("calibration", "gradient_plus", "gradient_minus", "final")
MITIGATIONS = ("none", "trex", "rem")
TRACE_COLUMNS = ("index", "kind", "iteration", "energy", "variance", "shots")

# Error histogram: |E - E_exact| in 0.05 Ha buckets; everything at or
# beyond the clamp lands in the last bucket.
HISTOGRAM_STEP = 0.05
HISTOGRAM_CLAMP = 1.0
N_HISTOGRAM_BUCKETS = int(round(HISTOGRAM_CLAMP / HISTOGRAM_STEP))


@dataclass(frozen=True)
class TraceRecord:
    """One cost evaluation: protocol role, estimate, and the probed point."""

    index: int
    kind: str
    iteration: int
    energy: float
    variance: float
    shots: int
    theta: np.ndarray

    def __post_init__(self):
        if self.kind not in TRACE_KINDS:
            raise ValueError(f"unknown trace record kind {self.kind!r}")


@dataclass
class VqeTrace:
    """Every cost evaluation of one optimization run, in call order."""

    records: list[TraceRecord]

    @property
    def n_parameters(self) -> int:
        return 0 if not self.records else self.records[0].theta.size

    @property
    def final_record(self) -> TraceRecord | None:
        for record in reversed(self.records):
            if record.kind == "final":
                return record
        return None

    @property
    def final_theta(self) -> np.ndarray | None:
        record = self.final_record
        return None if record is None else record.theta

    @property
    def final_energy(self) -> float | None:
        record = self.final_record
        return None if record is None else record.energy

    def write(self, path) -> None:
        p = self.n_parameters
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(list(TRACE_COLUMNS)
                            + [f"theta_{i}" for i in range(p)])
            for r in self.records:
                if r.theta.size != p:
                    raise DimensionError("records disagree on parameter count")
                writer.writerow([r.index, r.kind, r.iteration,
                                 repr(float(r.energy)), repr(float(r.variance)),
                                 r.shots]
                                + [repr(float(t)) for t in r.theta])

    @classmethod
    def read(cls, path) -> "VqeTrace":
        name = str(path)
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows:
            raise ParseError(name, 1, "empty trace file")
        header = rows[0]
        fixed = list(TRACE_COLUMNS)
        if header[: len(fixed)] != fixed:
            raise ParseError(name, 1,
                             f"header must start with {','.join(fixed)}")
        p = len(header) - len(fixed)
        if header[len(fixed):] != [f"theta_{i}" for i in range(p)]:
            raise ParseError(name, 1, "theta columns must be theta_0..theta_n")
        records = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(name, lineno,
                                 f"expected {len(header)} fields, got {len(row)}")
            try:
                record = TraceRecord(
                    int(row[0]), row[1], int(row[2]), float(row[3]),
                    float(row[4]), int(row[5]),
                    np.array([float(x) for x in row[6:]]))
            except ValueError as exc:
                raise ParseError(name, lineno, str(exc)) from None
            records.append(record)
        return cls(records)


# ---------------------------------------------------------------------------
# Single optimization run
# ---------------------------------------------------------------------------

def _call_role(call_index: int, config: SpsaConfig) -> tuple[str, int]:
    """Protocol role of the 1-based call_index-th cost evaluation."""
    if call_index <= config.calibration_calls:
        return "calibration", 0
    j = call_index - config.calibration_calls
    if j <= 2 * config.max_iterations:
        kind = "gradient_plus" if j % 2 == 1 else "gradient_minus"
        return kind, (j + 1) // 2
    return "final", config.max_iterations


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(
        [int(p) % (1 << 63) for p in parts]).generate_state(1)[0])


@dataclass(frozen=True)
class RunConfig:
    """Everything one campaign needs, with the Hamiltonian already loaded."""

    hamiltonian: PauliSum
    ansatz: AnsatzSpec
    spsa: SpsaConfig = SpsaConfig()
    plan: MeasurementPlan | None = None
    noise: NoiseModel | None = None
    mitigation: str = "none"
    n_repeats: int = 30
    master_seed: int = 7
    mitigation_shots: int = 8192

    def __post_init__(self):
        if self.mitigation not in MITIGATIONS:
            raise ValueError(f"unknown mitigation {self.mitigation!r}")
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be at least 1")
        if self.plan is None and self.noise is not None:
            raise ValueError("noise requires a measurement plan (sampling)")
        if self.plan is None and self.mitigation != "none":
            raise ValueError("mitigation requires a measurement plan")
        if self.mitigation == "trex" and self.plan.twirls_per_group == 0:
            raise ValueError("trex needs twirls_per_group > 0 in the plan")
        if (self.mitigation == "rem"
                and self.hamiltonian.n_qubits > REM_QUBIT_LIMIT):
            raise ValueError(
                f"rem limited to {REM_QUBIT_LIMIT} qubits "
                f"(got {self.hamiltonian.n_qubits})")
        if self.mitigation_shots < 1:
            raise ValueError("mitigation_shots must be positive")


def _run_once(cfg: RunConfig, run_seed: int) -> VqeTrace:
    """One seeded optimization; returns the full evaluation trace."""
    h = cfg.hamiltonian
    ansatz = cfg.ansatz.build()
    if ansatz.n_qubits != h.n_qubits:
        raise DimensionError(f"ansatz acts on {ansatz.n_qubits} qubits, "
                             f"Hamiltonian on {h.n_qubits}")
    theta0 = np.random.default_rng(_derived_seed(run_seed, 1)).uniform(
        -np.pi, np.pi, ansatz.n_parameters)
    spsa_config = replace(cfg.spsa, seed=_derived_seed(run_seed, 2))

    trex_cal = None
    confusion = None
    if cfg.mitigation == "trex":
        twirls = cfg.plan.twirls_per_group
        cal_shots = max(twirls, cfg.mitigation_shots - cfg.mitigation_shots % twirls)
        trex_cal = trex_calibrate(h.n_qubits, cfg.noise, cal_shots, twirls,
                                  seed=_derived_seed(run_seed, 4))
    elif cfg.mitigation == "rem":
        per_state = max(1, cfg.mitigation_shots // (1 << h.n_qubits))
        confusion = rem_calibrate(h.n_qubits, cfg.noise, per_state,
                                  seed=_derived_seed(run_seed, 5))

    records: list[TraceRecord] = []

    def cost(theta):
        call_index = len(records) + 1
        kind, iteration = _call_role(call_index, spsa_config)
        if cfg.plan is None:
            value = exact_expectation(h, ansatz, theta)
            variance, shots = 0.0, 0
        else:
            seed = _derived_seed(run_seed, 3, call_index)
            if cfg.mitigation == "none":
                est = estimate(h, ansatz, theta, cfg.plan,
                               noise=cfg.noise, seed=seed)
            else:
                data = measure_plan(h, ansatz, theta, cfg.plan,
                                    noise=cfg.noise, seed=seed)
                if cfg.mitigation == "trex":
                    est = trex_estimate(h, data, cfg.plan, trex_cal)
                else:
                    est = rem_energy(h, data, cfg.plan, confusion)
            value, variance, shots = est.value, est.variance, est.shots_used
        records.append(TraceRecord(call_index - 1, kind, iteration,
                                   float(value), float(variance), int(shots),
                                   np.asarray(theta, dtype=float).copy()))
        return float(value)

    spsa_run(cost, theta0, spsa_config)
    return VqeTrace(records)


# ---------------------------------------------------------------------------
# Campaigns
# ---------------------------------------------------------------------------

def best_k_summary(energies, k: int = 5) -> tuple[float, float]:
    """Mean and population standard deviation of the k lowest energies."""
    values = np.sort(np.asarray(energies, dtype=float))
    if not 1 <= k <= values.size:
        raise ValueError(f"k = {k} outside 1..{values.size}")
    best = values[:k]
    return float(best.mean()), float(best.std())


def error_histogram(abs_errors) -> tuple[int, ...]:
    """Run counts per |E - E_exact| bucket of 0.05 Ha, clamped at 1.0."""
    counts = [0] * N_HISTOGRAM_BUCKETS
    for err in abs_errors:
        bucket = min(int(err / HISTOGRAM_STEP), N_HISTOGRAM_BUCKETS - 1)
        counts[bucket] += 1
    return tuple(counts)


@dataclass(frozen=True)
class CampaignSummary:
    """Final-energy statistics of one campaign."""

    exact_energy: float
    final_energies: tuple[float, ...]
    abs_errors: tuple[float, ...]
    best_k: int
    best_mean: float
    best_std: float
    histogram: tuple[int, ...]
    n_runs: int
    failures: tuple[tuple[int, str], ...] = ()

    @property
    def n_successful(self) -> int:
        return len(self.final_energies)

    @property
    def mean_all(self) -> float:
        return float(np.mean(self.final_energies))


def _campaign_worker(args):
    cfg, run_seed = args
    try:
        return _run_once(cfg, run_seed), None
    except MitivqeError as exc:
        return None, str(exc)


def run_campaign(cfg: RunConfig, output_dir=None,
                 jobs: int = 1) -> tuple[CampaignSummary, list[VqeTrace | None]]:
    """Run cfg.n_repeats seeded optimizations and aggregate the results.

    Per-run seeds derive from the master seed and the run index, so any
    single run can be replayed in isolation and the job count never
    changes the results.  Failed runs are quarantined in the summary;
    the campaign raises only when every run fails.  When output_dir is
    given, each successful run's trace lands in run_NN.csv next to a
    summary.txt with the aggregate statistics.
    """
    seeds = [_derived_seed(cfg.master_seed, i) for i in range(cfg.n_repeats)]
    tasks = [(cfg, s) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_campaign_worker, tasks))
    else:
        outcomes = [_campaign_worker(t) for t in tasks]

    traces: list[VqeTrace | None] = []
    failures = []
    energies = []
    for index, (trace, message) in enumerate(outcomes):
        traces.append(trace)
        if trace is None:
            failures.append((index, message))
        else:
            energies.append(trace.final_energy)
    if not energies:
        raise MitivqeError(
            f"all {cfg.n_repeats} campaign runs failed; "
            f"first error: {failures[0][1]}")

    exact = ground_energy(cfg.hamiltonian)
    abs_errors = tuple(abs(e - exact) for e in energies)
    k = min(5, len(energies))
    best_mean, best_std = best_k_summary(energies, k)
    summary = CampaignSummary(
        exact_energy=exact,
        final_energies=tuple(energies),
        abs_errors=abs_errors,
        best_k=k,
        best_mean=best_mean,
        best_std=best_std,
        histogram=error_histogram(abs_errors),
        n_runs=cfg.n_repeats,
        failures=tuple(failures),
    )

    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for index, trace in enumerate(traces):
            if trace is not None:
                trace.write(out / f"run_{index:02d}.csv")
        write_summary(summary, out / "summary.txt")
    return summary, traces


def write_summary(summary: CampaignSummary, path) -> None:
    """Key = value dump of the campaign statistics."""
    lines = [
        f"runs = {summary.n_runs}",
        f"successful = {summary.n_successful}",
        f"failed = {len(summary.failures)}",
        f"exact_energy = {summary.exact_energy!r}",
        f"best_k = {summary.best_k}",
        f"best_mean = {summary.best_mean!r}",
        f"best_std = {summary.best_std!r}",
        f"mean_all = {summary.mean_all!r}",
        f"histogram_step = {HISTOGRAM_STEP}",
        f"histogram_clamp = {HISTOGRAM_CLAMP}",
        "histogram = " + ",".join(str(c) for c in summary.histogram),
        "final_energies = " + ",".join(repr(e) for e in summary.final_energies),
    ]
    for index, message in summary.failures:
        lines.append(f"failure_{index} = {message}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Trace re-evaluation on the exact statevector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceEvaluation:
    """Exact energies along a recorded optimization path.

    The per-iteration series evaluates each iterate, reconstructed as
    the midpoint of its gradient pair; the final point is evaluated
    directly.  All statistics are None when the trace lacks the
    corresponding records.
    """

    iterations: np.ndarray
    energies: np.ndarray
    final_energy: float | None
    minimum: float | None
    argmin_iteration: int | None
    last_window_mean: float | None


def reevaluate_trace(trace: VqeTrace, h: PauliSum,
                     ansatz: Circuit) -> TraceEvaluation:
    """Exact expectation at every recorded iterate and at the final point.

    The gradient records store the probed points theta_k +- c_k delta;
    their midpoint recovers the iterate theta_k exactly.  The window
    statistic averages the last tenth of the iterations (at least one).
    """
    if trace.records and trace.n_parameters != ansatz.n_parameters:
        raise DimensionError(
            f"trace has {trace.n_parameters} parameters, "
            f"ansatz {ansatz.n_parameters}")
    plus: dict[int, np.ndarray] = {}
    minus: dict[int, np.ndarray] = {}
    for record in trace.records:
        if record.kind == "gradient_plus":
            side = plus
        elif record.kind == "gradient_minus":
            side = minus
        else:
            continue
        if record.iteration in side:
            raise ValueError(f"duplicate {record.kind} record for "
                             f"iteration {record.iteration}")
        side[record.iteration] = record.theta
    if set(plus) != set(minus):
        odd = sorted(set(plus) ^ set(minus))
        raise ValueError(f"unpaired gradient records at iterations {odd}")

    iterations = np.array(sorted(plus), dtype=int)
    energies = np.array([
        exact_expectation(h, ansatz, (plus[k] + minus[k]) / 2.0)
        for k in iterations])

    final = trace.final_record
    final_energy = (None if final is None
                    else exact_expectation(h, ansatz, final.theta))

    if energies.size:
        best = int(np.argmin(energies))
        window = max(1, energies.size // 10)
        minimum = float(energies[best])
        argmin_iteration = int(iterations[best])
        last_window_mean = float(energies[-window:].mean())
    else:
        minimum = argmin_iteration = last_window_mean = None
    return TraceEvaluation(iterations, energies, final_energy,
                           minimum, argmin_iteration, last_window_mean)
