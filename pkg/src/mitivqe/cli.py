"""Command-line surface for mappings, campaigns, and studies.

Subcommands:

* ``map``        integral file -> qubit-Hamiltonian file
* ``vqe``        full optimization campaign with traces and a summary
* ``estimate``   one energy estimate at a fixed parameter vector
* ``zne``        noise-amplified estimates plus extrapolations
* ``trace-eval`` exact re-evaluation of a recorded trace
* ``rem-study``  raw vs readout-corrected estimate at a fixed point

Run configs are INI files with flat key = value sections; paths inside
a config resolve relative to the config file.  The environment variable
MITIVQE_SEED overrides every configured or flagged seed.  Exit codes:
0 success, 2 usage, 3 data or parse failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
from pathlib import Path

import numpy as np

from .ansatz import AnsatzSpec
from .circuits import NoiseModel
from .driver import RunConfig, VqeTrace, reevaluate_trace, run_campaign
from .errors import (
    ConvergenceError,
    MitigationError,
    MitivqeError,
    OptimizerError,
    ParseError,
)
from .estimator import MeasurementPlan, estimate, exact_expectation, measure_plan
from .fermion import jordan_wigner, map_and_taper, parity_map, read_fermionic_file
from .mitigation import (
    ZneSeries,
    rem_calibrate,
    rem_energy,
    trex_calibrate,
    trex_estimate,
    zne_fit,
    zne_series,
)
from .pauli import read_hamiltonian, write_hamiltonian
from .spsa import SpsaConfig

ZNE_FIT_KINDS = ("linear", "quadratic", "exponential")


class UsageError(Exception):
    """Flag or config combination that cannot be executed."""


# ---------------------------------------------------------------------------
# Config loading
# ---------------------------------------------------------------------------

def load_config(path) -> tuple[configparser.ConfigParser, Path]:
    config_path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(config_path, encoding="utf-8") as handle:
            parser.read_file(handle, source=str(config_path))
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None) or 1
        raise ParseError(str(config_path), int(lineno), str(exc)) from None
    return parser, config_path.parent


def _resolve_seed(flag_seed, config_seed: int) -> int:
    env = os.environ.get("MITIVQE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MITIVQE_SEED must be an integer, got {env!r}") from None
    if flag_seed is not None:
        return int(flag_seed)
    return config_seed


def load_problem(parser: configparser.ConfigParser, base: Path):
    """Hamiltonian and ansatz spec from the [hamiltonian]/[ansatz] sections."""
    if not parser.has_section("hamiltonian"):
        raise UsageError("config needs a [hamiltonian] section")
    ham = parser["hamiltonian"]
    ansatz_section = parser["ansatz"] if parser.has_section("ansatz") else {}
    kind = ansatz_section.get("kind", "efficient_su2")

    if "qubit_file" in ham:
        h = read_hamiltonian(base / ham["qubit_file"])
        if kind == "uccsd":
            raise UsageError("uccsd needs an integral file (particle sector)")
        spec = AnsatzSpec("efficient_su2", n_qubits=h.n_qubits,
                          reps=int(ansatz_section.get("reps", 1)))
        return h, spec

    if "integrals" not in ham:
        raise UsageError("[hamiltonian] needs integrals or qubit_file")
    operator, sector = read_fermionic_file(base / ham["integrals"])
    mapping = ham.get("mapping", "parity")
    taper = ham.getboolean("taper", fallback=mapping == "parity")
    if taper and mapping != "parity":
        raise UsageError("tapering requires the parity mapping")
    if mapping == "parity":
        h = map_and_taper(operator, sector) if taper else parity_map(operator)
    elif mapping == "jw":
        h = jordan_wigner(operator)
    else:
        raise UsageError(f"unknown mapping {mapping!r} (expected jw or parity)")

    if kind == "efficient_su2":
        spec = AnsatzSpec("efficient_su2", n_qubits=h.n_qubits,
                          reps=int(ansatz_section.get("reps", 1)))
    elif kind == "uccsd":
        if mapping == "jw":
            circuit_mapping = "jordan_wigner"
        elif taper:
            circuit_mapping = "parity_tapered"
        else:
            raise UsageError("uccsd supports jw or tapered parity mappings")
        spec = AnsatzSpec("uccsd", n_spin_orbitals=operator.n_spin_orbitals,
                          sector=sector, mapping=circuit_mapping)
    else:
        raise UsageError(f"unknown ansatz kind {kind!r}")
    return h, spec


def load_noise(parser: configparser.ConfigParser, args) -> NoiseModel | None:
    overrides = {
        "eps0": getattr(args, "eps0", None),
        "eps1": getattr(args, "eps1", None),
        "depol_1q": getattr(args, "depol_1q", None),
        "depol_2q": getattr(args, "depol_2q", None),
    }
    section = parser["noise"] if parser.has_section("noise") else {}
    rates = {}
    for name in ("eps0", "eps1", "depol_1q", "depol_2q"):
        if overrides[name] is not None:
            rates[name] = float(overrides[name])
        elif name in section:
            rates[name] = float(section[name])
    if not rates:
        return None
    return NoiseModel(**rates)


def load_plan(parser: configparser.ConfigParser, h, args) -> MeasurementPlan | None:
    if not parser.has_section("plan"):
        return None
    section = parser["plan"]
    shots = getattr(args, "shots", None)
    if shots is None:
        shots = int(section.get("shots_per_group", 4000))
    twirls = int(section.get("twirls_per_group", 0))
    return MeasurementPlan.for_hamiltonian(h, int(shots), twirls)


def load_spsa(parser: configparser.ConfigParser, seed: int) -> SpsaConfig:
    section = parser["spsa"] if parser.has_section("spsa") else {}
    return SpsaConfig(
        alpha=float(section.get("alpha", 0.602)),
        gamma=float(section.get("gamma", 0.101)),
        stability=float(section.get("stability", 0.0)),
        c=float(section.get("c", 0.2)),
        max_iterations=int(section.get("iterations", 250)),
        calibration_calls=int(section.get("calibration_calls", 50)),
        target_first_step=float(section.get("target_first_step",
                                            2.0 * np.pi / 10.0)),
        seed=seed,
    )


def load_theta(path) -> np.ndarray:
    values = np.loadtxt(path, dtype=float, ndmin=1)
    return values.reshape(-1)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_map(args) -> int:
    if args.taper and args.mapping != "parity":
        raise UsageError("--taper requires --mapping parity")
    operator, sector = read_fermionic_file(args.integrals)
    if args.mapping == "jw":
        h = jordan_wigner(operator)
    elif args.taper:
        h = map_and_taper(operator, sector)
    else:
        h = parity_map(operator)
    write_hamiltonian(h, args.output)
    print(f"qubits = {h.n_qubits}")
    print(f"terms = {len(h.terms)}")
    return 0


def cmd_vqe(args) -> int:
    parser, base = load_config(args.config)
    h, spec = load_problem(parser, base)
    campaign = parser["campaign"] if parser.has_section("campaign") else {}
    seed = _resolve_seed(args.seed, int(campaign.get("seed", 7)))
    noise = load_noise(parser, args)
    plan = load_plan(parser, h, args)
    repeats = args.repeats
    if repeats is None:
        repeats = int(campaign.get("repeats", 30))
    try:
        cfg = RunConfig(
            hamiltonian=h,
            ansatz=spec,
            spsa=load_spsa(parser, seed),
            plan=plan,
            noise=noise,
            mitigation=campaign.get("mitigation", "none"),
            n_repeats=int(repeats),
            master_seed=seed,
            mitigation_shots=int(campaign.get("mitigation_shots", 8192)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summary, _ = run_campaign(cfg, output_dir=args.output, jobs=args.jobs)
    print(f"runs = {summary.n_runs}")
    print(f"successful = {summary.n_successful}")
    print(f"exact_energy = {summary.exact_energy!r}")
    print(f"best_{summary.best_k}_mean = {summary.best_mean!r}")
    print(f"best_{summary.best_k}_std = {summary.best_std!r}")
    return 0


def _single_estimate(parser, base, h, spec, theta, noise, plan, seed):
    """One energy estimate honoring the configured mitigation mode."""
    ansatz = spec.build()
    if plan is None:
        value = exact_expectation(h, ansatz, theta)
        return value, 0.0, 0
    campaign = parser["campaign"] if parser.has_section("campaign") else {}
    mitigation = campaign.get("mitigation", "none")
    cal_shots = int(campaign.get("mitigation_shots", 8192))
    if mitigation == "none":
        est = estimate(h, ansatz, theta, plan, noise=noise, seed=seed)
    elif mitigation == "trex":
        if plan.twirls_per_group == 0:
            raise UsageError("trex needs twirls_per_group > 0 in [plan]")
        data = measure_plan(h, ansatz, theta, plan, noise=noise, seed=seed)
        twirls = plan.twirls_per_group
        cal = trex_calibrate(h.n_qubits, noise,
                             max(twirls, cal_shots - cal_shots % twirls),
                             twirls, seed=seed + 1)
        est = trex_estimate(h, data, plan, cal,
                            extra_shots=cal.shots_used,
                            extra_circuits=cal.n_calibration_circuits)
    elif mitigation == "rem":
        data = measure_plan(h, ansatz, theta, plan, noise=noise, seed=seed)
        per_state = max(1, cal_shots // (1 << h.n_qubits))
        confusion = rem_calibrate(h.n_qubits, noise, per_state, seed=seed + 1)
        est = rem_energy(h, data, plan, confusion,
                         extra_shots=per_state << h.n_qubits,
                         extra_circuits=1 << h.n_qubits)
    else:
        raise UsageError(f"unknown mitigation {mitigation!r}")
    return est.value, est.std_error, est.shots_used


def cmd_estimate(args) -> int:
    parser, base = load_config(args.config)
    h, spec = load_problem(parser, base)
    theta = load_theta(args.theta)
    noise = load_noise(parser, args)
    plan = load_plan(parser, h, args)
    seed = _resolve_seed(args.seed, 0)
    value, std_error, shots = _single_estimate(parser, base, h, spec, theta,
                                               noise, plan, seed)
    print(f"energy = {value!r}")
    print(f"std_error = {std_error!r}")
    print(f"shots = {shots}")
    return 0


def cmd_zne(args) -> int:
    parser, base = load_config(args.config)
    h, spec = load_problem(parser, base)
    theta = load_theta(args.theta)
    noise = load_noise(parser, args)
    plan = load_plan(parser, h, args)
    if plan is None:
        raise UsageError("zne needs a [plan] section (shot-based estimates)")
    scales = tuple(int(s) for s in args.scales.split(","))
    if len(scales) < 2:
        raise UsageError("zne needs at least two scales")
    if any(s < 1 or s % 2 == 0 for s in scales) or list(scales) != sorted(set(scales)):
        raise UsageError("scales must be odd, positive, and strictly increasing")
    fits = tuple(args.fits.split(","))
    for fit in fits:
        if fit not in ZNE_FIT_KINDS:
            raise UsageError(f"unknown fit kind {fit!r}")
    seed = _resolve_seed(args.seed, 0)

    points = zne_series(h, spec.build(), theta, plan, noise,
                        seed=seed, scales=scales)
    values = [(s, est.value) for s, est in points]
    rows = [(s, est.value, est.variance) for s, est in points]
    if args.output:
        with open(args.output, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["scale", "energy", "variance"])
            for s, value, variance in rows:
                writer.writerow([s, repr(value), repr(variance)])
    for s, value, variance in rows:
        print(f"scale_{s} = {value!r}")

    successes = 0
    for fit in fits:
        try:
            series = ZneSeries(tuple(values), fit)
            extrapolated = zne_fit(series)
        except (ValueError, MitigationError) as exc:
            print(f"{fit} = failed ({exc})")
            continue
        successes += 1
        print(f"{fit} = {extrapolated!r}")
    if successes == 0:
        print("error: every requested fit failed", file=sys.stderr)
        return 4
    return 0


def cmd_trace_eval(args) -> int:
    parser, base = load_config(args.config)
    h, spec = load_problem(parser, base)
    trace = VqeTrace.read(args.trace)
    ansatz = spec.build()
    ev = reevaluate_trace(trace, h, ansatz)
    if args.output:
        with open(args.output, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["iteration", "energy"])
            for k, energy in zip(ev.iterations, ev.energies):
                writer.writerow([int(k), repr(float(energy))])
            if ev.final_energy is not None:
                writer.writerow([trace.final_record.iteration,
                                 repr(ev.final_energy)])
    print(f"iterations = {ev.iterations.size}")
    if ev.minimum is not None:
        print(f"minimum = {ev.minimum!r}")
        print(f"argmin_iteration = {ev.argmin_iteration}")
        print(f"last_window_mean = {ev.last_window_mean!r}")
    if ev.final_energy is not None:
        print(f"final = {ev.final_energy!r}")
    return 0


def cmd_rem_study(args) -> int:
    parser, base = load_config(args.config)
    h, spec = load_problem(parser, base)
    theta = load_theta(args.theta)
    noise = load_noise(parser, args)
    plan = load_plan(parser, h, args)
    if plan is None:
        raise UsageError("rem-study needs a [plan] section")
    seed = _resolve_seed(args.seed, 0)
    ansatz = spec.build()

    campaign = parser["campaign"] if parser.has_section("campaign") else {}
    cal_shots = int(campaign.get("mitigation_shots", 8192))
    per_state = max(1, cal_shots // (1 << h.n_qubits))
    confusion = rem_calibrate(h.n_qubits, noise, per_state, seed=seed + 1)
    data = measure_plan(h, ansatz, theta, plan, noise=noise, seed=seed)
    raw = estimate(h, ansatz, theta, plan, noise=noise, seed=seed)
    corrected = rem_energy(h, data, plan, confusion,
                           extra_shots=per_state << h.n_qubits,
                           extra_circuits=1 << h.n_qubits)
    exact = exact_expectation(h, ansatz, theta)
    rows = [
        ("raw", raw.value, raw.std_error, raw.shots_used),
        ("corrected", corrected.value, corrected.std_error,
         corrected.shots_used),
        ("exact", exact, 0.0, 0),
    ]
    if args.output:
        with open(args.output, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["method", "energy", "std_error", "shots"])
            for name, value, err, shots in rows:
                writer.writerow([name, repr(float(value)), repr(float(err)),
                                 shots])
    for name, value, err, shots in rows:
        print(f"{name} = {value!r} +- {err!r}")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------

def _add_common(sub, theta_required=True):
    sub.add_argument("config", help="INI run config")
    if theta_required:
        sub.add_argument("--theta", required=True,
                         help="parameter file (whitespace-separated floats)")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--shots", type=int, default=None)
    sub.add_argument("--eps0", type=float, default=None)
    sub.add_argument("--eps1", type=float, default=None)
    sub.add_argument("--depol-1q", dest="depol_1q", type=float, default=None)
    sub.add_argument("--depol-2q", dest="depol_2q", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mitivqe",
        description="Molecular VQE campaigns with error mitigation")
    subs = parser.add_subparsers(dest="command", required=True)

    p_map = subs.add_parser("map", help="map an integral file to qubits")
    p_map.add_argument("integrals")
    p_map.add_argument("-o", "--output", required=True)
    p_map.add_argument("--mapping", choices=("jw", "parity"), default="parity")
    p_map.add_argument("--taper", action="store_true")
    p_map.set_defaults(func=cmd_map)

    p_vqe = subs.add_parser("vqe", help="run an optimization campaign")
    _add_common(p_vqe, theta_required=False)
    p_vqe.add_argument("-o", "--output", default=None,
                       help="directory for traces and the summary")
    p_vqe.add_argument("--repeats", type=int, default=None)
    p_vqe.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_vqe.set_defaults(func=cmd_vqe)

    p_est = subs.add_parser("estimate", help="one estimate at fixed parameters")
    _add_common(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_zne = subs.add_parser("zne", help="noise-amplified estimates and fits")
    _add_common(p_zne)
    p_zne.add_argument("--scales", default="1,3,5",
                       help="comma-separated odd fold factors")
    p_zne.add_argument("--fits", default="linear,quadratic,exponential")
    p_zne.add_argument("-o", "--output", default=None, help="CSV data table")
    p_zne.set_defaults(func=cmd_zne)

    p_trace = subs.add_parser("trace-eval",
                              help="re-evaluate a trace on the statevector")
    p_trace.add_argument("trace", help="trace CSV file")
    p_trace.add_argument("config", help="INI run config")
    p_trace.add_argument("-o", "--output", default=None,
                         help="per-iteration energy CSV")
    p_trace.set_defaults(func=cmd_trace_eval)

    p_rem = subs.add_parser("rem-study",
                            help="raw vs readout-corrected estimate")
    _add_common(p_rem)
    p_rem.add_argument("-o", "--output", default=None)
    p_rem.set_defaults(func=cmd_rem_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (MitigationError, OptimizerError, ConvergenceError,
            np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (MitivqeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
