"""Dense state-vector circuit simulation with shot sampling and noise.

Gate set: RY, RZ, SX, X, CNOT.  Rotations use the half-angle convention
RY(t) = exp(-i t Y / 2), RZ(t) = exp(-i t Z / 2).  Qubit 0 is the most
significant bit of every state index and the leftmost character of an
outcome string.

Gate noise is depolarizing and sampled per trajectory: after each gate,
with the configured probability the state of the touched qubits is
replaced by a uniformly random Pauli twirl (identity included, so a
probability-1 error fully depolarizes the touched qubits).  Readout
noise flips each measured bit with asymmetric probabilities (eps0 for
true 0, eps1 for true 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, ResourceError

STATEVECTOR_QUBIT_LIMIT = 24

_SQ = 1.0 / np.sqrt(2.0)

_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class ParamRef:
    """Symbolic angle: scale * parameters[index] at binding time."""

    index: int
    scale: float = 1.0


@dataclass(frozen=True)
class Gate:
    kind: str                      # RY | RZ | SX | X | CNOT
    qubits: tuple[int, ...]
    param: float | ParamRef | None = None

    def __post_init__(self):
        if self.kind in ("RY", "RZ"):
            if len(self.qubits) != 1 or self.param is None:
                raise ValueError(f"{self.kind} needs 1 qubit and an angle")
        elif self.kind in ("SX", "X"):
            if len(self.qubits) != 1 or self.param is not None:
                raise ValueError(f"{self.kind} needs 1 qubit and no angle")
        elif self.kind == "CNOT":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("CNOT needs 2 distinct qubits")
            if self.param is not None:
                raise ValueError("CNOT takes no angle")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    parameters: list[str] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._check_gate(g)

    def _check_gate(self, g: Gate):
        for q in g.qubits:
            if not 0 <= q < self.n_qubits:
                raise DimensionError(f"gate {g.kind} on qubit {q} outside register "
                                     f"of {self.n_qubits}")
        if isinstance(g.param, ParamRef) and not 0 <= g.param.index < len(self.parameters):
            raise DimensionError(f"gate references parameter {g.param.index}, "
                                 f"but only {len(self.parameters)} declared")

    # construction helpers -------------------------------------------------
    def add(self, kind, qubits, param=None) -> "Circuit":
        if isinstance(qubits, int):
            qubits = (qubits,)
        g = Gate(kind, tuple(qubits), param)
        self._check_gate(g)
        self.gates.append(g)
        return self

    def ry(self, qubit, param):
        return self.add("RY", qubit, param)

    def rz(self, qubit, param):
        return self.add("RZ", qubit, param)

    def sx(self, qubit):
        return self.add("SX", qubit)

    def x(self, qubit):
        return self.add("X", qubit)

    def cnot(self, control, target):
        return self.add("CNOT", (control, target))

    @property
    def n_parameters(self) -> int:
        return len(self.parameters)

    def resolve(self, gate: Gate, values: np.ndarray) -> float | None:
        p = gate.param
        if p is None or isinstance(p, float | int):
            return None if p is None else float(p)
        return p.scale * float(values[p.index])

    def bind_check(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (len(self.parameters),):
            raise DimensionError(
                f"binding of length {values.size} for {len(self.parameters)} parameters")
        return values

    def inverse(self) -> "Circuit":
        """Adjoint circuit over the same parameter vector.

        SX has no single-gate inverse in the gate set; SX^3 is used
        (exact, since SX^2 = X with no stray phase).
        """
        inv = Circuit(self.n_qubits, [], list(self.parameters))
        for g in reversed(self.gates):
            if g.kind in ("RY", "RZ"):
                p = g.param
                if isinstance(p, ParamRef):
                    p = ParamRef(p.index, -p.scale)
                else:
                    p = -float(p)
                inv.add(g.kind, g.qubits, p)
            elif g.kind == "SX":
                for _ in range(3):
                    inv.add("SX", g.qubits)
            else:
                inv.add(g.kind, g.qubits)
        return inv

    def folded(self, scale: int) -> "Circuit":
        """Global unitary folding: C (C† C)^((scale-1)/2)."""
        if scale < 1 or scale % 2 == 0:
            raise ValueError(f"fold scale must be odd and positive, got {scale}")
        out = Circuit(self.n_qubits, list(self.gates), list(self.parameters))
        inv = self.inverse()
        for _ in range((scale - 1) // 2):
            out.gates.extend(inv.gates)
            out.gates.extend(self.gates)
        return out

    def to_text(self, values=None) -> str:
        """One gate per line, for trace inspection."""
        lines = [f"qubits {self.n_qubits}",
                 f"parameters {' '.join(self.parameters) if self.parameters else '-'}"]
        for g in self.gates:
            qubits = " ".join(str(q) for q in g.qubits)
            if g.param is None:
                lines.append(f"{g.kind} {qubits}")
            elif isinstance(g.param, ParamRef):
                if values is None:
                    sign = "" if g.param.scale >= 0 else "-"
                    mag = abs(g.param.scale)
                    coef = "" if mag == 1.0 else f"{mag:g}*"
                    lines.append(f"{g.kind} {qubits} {sign}{coef}"
                                 f"{self.parameters[g.param.index]}")
                else:
                    lines.append(f"{g.kind} {qubits} "
                                 f"{self.resolve(g, np.asarray(values)):.12g}")
            else:
                lines.append(f"{g.kind} {qubits} {float(g.param):.12g}")
        return "\n".join(lines)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    half = 0.5 * angle
    if kind == "RY":
        c, s = np.cos(half), np.sin(half)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]])
    raise ValueError(kind)


def gate_matrix(gate: Gate, angle: float | None) -> np.ndarray:
    """2x2 (or 4x4 for CNOT) unitary of one gate."""
    if gate.kind in ("RY", "RZ"):
        return rotation_matrix(gate.kind, angle)
    if gate.kind == "SX":
        return _SX.copy()
    if gate.kind == "X":
        return _X.copy()
    # CNOT on (control, target) in local 2-qubit big-endian order
    return np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                     [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


# ---------------------------------------------------------------------------
# State evolution
# ---------------------------------------------------------------------------

def _apply_1q(state: np.ndarray, u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    psi = state.reshape((1 << qubit, 2, -1))
    return np.einsum("ab,ibj->iaj", u, psi).reshape(-1)


def _apply_cnot(state: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(state.size)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    sel = (idx & cbit).astype(bool)
    out = state.copy()
    out[idx[sel]] = state[idx[sel] ^ tbit]
    return out


def statevector(circuit: Circuit, values=None, initial=None) -> np.ndarray:
    """Amplitudes after applying the circuit to |0...0> (or ``initial``)."""
    n = circuit.n_qubits
    if n > STATEVECTOR_QUBIT_LIMIT:
        raise ResourceError(f"statevector for {n} qubits exceeds the "
                            f"{STATEVECTOR_QUBIT_LIMIT}-qubit limit")
    values = circuit.bind_check(values if values is not None else [])
    if initial is not None:
        if initial.shape != (1 << n,):
            raise DimensionError(
                f"initial state of length {initial.size} on {n} qubits")
        state = np.asarray(initial, dtype=complex).copy()
    else:
        state = np.zeros(1 << n, dtype=complex)
        state[0] = 1.0
    for g in circuit.gates:
        if g.kind == "CNOT":
            state = _apply_cnot(state, g.qubits[0], g.qubits[1], n)
        else:
            u = gate_matrix(g, circuit.resolve(g, values))
            state = _apply_1q(state, u, g.qubits[0], n)
    return state


# ---------------------------------------------------------------------------
# Noise model and counts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing gate errors plus asymmetric readout flips.

    eps0 / eps1 may be scalars (shared by all qubits) or per-qubit
    sequences; eps0 = P(read 1 | true 0), eps1 = P(read 0 | true 1).
    """

    eps0: float | tuple = 0.0
    eps1: float | tuple = 0.0
    depol_1q: float = 0.0
    depol_2q: float = 0.0

    def __post_init__(self):
        for name in ("eps0", "eps1"):
            val = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if np.any(val < 0) or np.any(val > 1):
                raise ValueError(f"{name} outside [0, 1]")
        for name in ("depol_1q", "depol_2q"):
            val = getattr(self, name)
            if not 0 <= val <= 1:
                raise ValueError(f"{name} outside [0, 1]")

    def readout_arrays(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        out = []
        for name in ("eps0", "eps1"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if arr.size == 1:
                arr = np.full(n, arr[0])
            elif arr.size != n:
                raise DimensionError(
                    f"{name} has {arr.size} entries for {n} qubits")
            out.append(arr)
        return out[0], out[1]

    @property
    def has_gate_noise(self) -> bool:
        return self.depol_1q > 0 or self.depol_2q > 0

    @property
    def has_readout_noise(self) -> bool:
        return bool(np.any(np.atleast_1d(self.eps0) > 0)
                    or np.any(np.atleast_1d(self.eps1) > 0))

    def readout_only(self) -> "NoiseModel":
        return replace(self, depol_1q=0.0, depol_2q=0.0)


DEFAULT_NOISE_RATES = dict(eps0=0.02, eps1=0.05, depol_1q=1e-3, depol_2q=1e-2)


def default_noise_model() -> NoiseModel:
    """Representative superconducting-transmon error rates."""
    return NoiseModel(**DEFAULT_NOISE_RATES)


@dataclass
class Counts:
    """Measured outcome histogram; keys are bit strings with qubit 0 leftmost."""

    n_qubits: int
    counts: dict[str, int]

    @property
    def total_shots(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_outcomes(cls, n_qubits: int, outcomes: np.ndarray) -> "Counts":
        values, freq = np.unique(outcomes, return_counts=True)
        fmt = f"0{n_qubits}b"
        return cls(n_qubits, {format(int(v), fmt): int(c)
                              for v, c in zip(values, freq)})

    def outcome_array(self) -> tuple[np.ndarray, np.ndarray]:
        """(integer outcomes, counts) sorted by outcome."""
        if not self.counts:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        items = sorted((int(k, 2), v) for k, v in self.counts.items())
        keys, vals = zip(*items)
        return np.array(keys, dtype=np.int64), np.array(vals, dtype=np.int64)

    def frequencies(self) -> np.ndarray:
        """Dense probability vector of length 2^n."""
        freq = np.zeros(1 << self.n_qubits)
        total = self.total_shots
        for key, c in self.counts.items():
            freq[int(key, 2)] = c / total
        return freq

    def xor_mask(self, mask: int) -> "Counts":
        """Classical bit-unflip: XOR every outcome with the mask."""
        fmt = f"0{self.n_qubits}b"
        out: dict[str, int] = {}
        for key, c in self.counts.items():
            new = format(int(key, 2) ^ mask, fmt)
            out[new] = out.get(new, 0) + c
        return Counts(self.n_qubits, out)

    def merged_with(self, other: "Counts") -> "Counts":
        out = dict(self.counts)
        for key, c in other.counts.items():
            out[key] = out.get(key, 0) + c
        return Counts(self.n_qubits, out)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _flip_readout(outcomes: np.ndarray, n: int, noise: NoiseModel,
                  rng: np.random.Generator) -> np.ndarray:
    e0, e1 = noise.readout_arrays(n)
    u = rng.random((outcomes.size, n))
    out = outcomes.copy()
    for j in range(n):
        bit = 1 << (n - 1 - j)
        is_one = (out & bit).astype(bool)
        p = np.where(is_one, e1[j], e0[j])
        flip = u[:, j] < p
        out[flip] ^= bit
    return out


def _sample_from_probs(probs: np.ndarray, shots: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Per-outcome counts expanded to an outcome-per-shot array."""
    counts = rng.multinomial(shots, probs / probs.sum())
    return np.repeat(np.arange(probs.size, dtype=np.int64), counts)


def _gate_error_prob(gate: Gate, noise: NoiseModel) -> float:
    return noise.depol_2q if gate.kind == "CNOT" else noise.depol_1q


def _full_matrix(gate: Gate, angle, n: int) -> np.ndarray:
    """Gate unitary embedded on the full register."""
    dim = 1 << n
    if gate.kind == "CNOT":
        mat = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        cbit = 1 << (n - 1 - gate.qubits[0])
        tbit = 1 << (n - 1 - gate.qubits[1])
        rows = np.where(idx & cbit, idx ^ tbit, idx)
        mat[rows, idx] = 1.0
        return mat
    u = gate_matrix(gate, angle)
    j = gate.qubits[0]
    return np.kron(np.kron(np.eye(1 << j), u), np.eye(1 << (n - 1 - j)))


_PAULI_1Q = ("I", "X", "Y", "Z")
_PAULI_2Q = [(a, b) for a in "IXYZ" for b in "IXYZ"]  # index 0 = II


def _apply_pauli_rows(states: np.ndarray, which: np.ndarray, axis_qubit: int,
                      pauli: str, n: int) -> None:
    """In-place single-qubit Pauli on selected rows of a (shots, dim) batch.

    Y decomposes as -i * (sign flip on |1>) after the bit permutation:
    (Y v)[a] = +i v[a^bit] when the bit is set and -i v[a^bit] otherwise.
    """
    if pauli == "I":
        return
    dim = states.shape[1]
    bit = 1 << (n - 1 - axis_qubit)
    idx = np.arange(dim)
    if pauli in ("X", "Y"):
        states[which] = states[which][:, idx ^ bit]
    if pauli in ("Z", "Y"):
        states[which] *= np.where(idx & bit, -1.0, 1.0)
    if pauli == "Y":
        states[which] *= -1j


def sample(circuit: Circuit, values=None, shots: int = 0,
           noise: NoiseModel | None = None, seed=None, initial=None) -> Counts:
    """Draw measurement outcomes in the computational basis.

    Deterministic for a fixed seed.  The random stream is consumed in a
    fixed order: gate-error positions, error Pauli choices, outcome
    draws, readout flips.  ``initial`` replaces |0...0> and is only
    supported without gate noise (trajectories must see every gate).
    """
    if shots <= 0:
        raise ValueError(f"shots must be positive, got {shots}")
    n = circuit.n_qubits
    rng = _as_rng(seed)

    if noise is None or not noise.has_gate_noise:
        probs = np.abs(statevector(circuit, values, initial=initial)) ** 2
        outcomes = _sample_from_probs(probs, shots, rng)
    elif initial is not None:
        raise ValueError("initial state cannot be combined with gate noise")
    elif n <= 8:
        outcomes = _sample_noisy_trajectories(circuit, values, shots, noise, rng)
    else:
        outcomes = _sample_noisy_sweep(circuit, values, shots, noise, rng)

    if noise is not None and noise.has_readout_noise:
        outcomes = _flip_readout(outcomes, n, noise, rng)
    return Counts.from_outcomes(n, outcomes)


def _sample_noisy_trajectories(circuit: Circuit, values, shots: int,
                               noise: NoiseModel, rng) -> np.ndarray:
    """Trajectory sampler for depolarizing gate noise.

    Cost is dominated by the number of error events, not shots x gates:
    cumulative circuit unitaries M_g (product of the first g gates) let
    any error-free stretch advance in two dense mat-vec products, and
    shots are processed in batched rounds of simultaneous events.
    """
    n = circuit.n_qubits
    dim = 1 << n
    bound = circuit.bind_check(values if values is not None else [])
    gates = circuit.gates
    n_gates = len(gates)

    p_gate = np.array([_gate_error_prob(g, noise) for g in gates])
    err = rng.random((shots, n_gates)) < p_gate[None, :]
    n_events = int(err.sum())
    choice_1q = rng.integers(0, 4, size=n_events)
    choice_2q = rng.integers(0, 16, size=n_events)
    outcome_u = rng.random(shots)

    # cumulative unitaries: M[g] = U_{g-1} ... U_0
    mats = np.empty((n_gates + 1, dim, dim), dtype=complex)
    mats[0] = np.eye(dim)
    for g_i, g in enumerate(gates):
        mats[g_i + 1] = _full_matrix(g, circuit.resolve(g, bound), n) @ mats[g_i]

    init = np.zeros(dim, dtype=complex)
    init[0] = 1.0
    final_probs = np.abs(mats[n_gates] @ init) ** 2

    shot_ids, gate_ids = np.nonzero(err)  # row-major: sorted by shot, then gate
    # identity draws leave the state untouched; drop those events up front
    if n_events:
        is_2q = np.array([gates[g].kind == "CNOT" for g in gate_ids])
        keep = np.where(is_2q, choice_2q > 0, choice_1q > 0)
        shot_ids, gate_ids = shot_ids[keep], gate_ids[keep]
        choice_1q, choice_2q = choice_1q[keep], choice_2q[keep]
        n_events = shot_ids.size
    outcomes = np.empty(shots, dtype=np.int64)

    clean = np.ones(shots, dtype=bool)
    clean[shot_ids] = False
    if clean.any():
        cum = np.cumsum(final_probs / final_probs.sum())
        outcomes[clean] = np.searchsorted(cum, outcome_u[clean], side="right") \
            .clip(0, dim - 1)

    if n_events:
        noisy_shots, first_pos, counts_per_shot = np.unique(
            shot_ids, return_index=True, return_counts=True)
        n_noisy = noisy_shots.size
        states = np.broadcast_to(init, (n_noisy, dim)).copy()
        position = np.zeros(n_noisy, dtype=np.int64)  # gates already applied
        max_rounds = int(counts_per_shot.max())
        for round_i in range(max_rounds):
            active = counts_per_shot > round_i
            ev = first_pos[active] + round_i
            g_idx = gate_ids[ev]
            rows = np.nonzero(active)[0]
            # advance from current position to just after gate g_idx;
            # unitary inverse = conjugate transpose, batched per shot
            undo = np.einsum("sji,sj->si", mats[position[rows]].conj(),
                             states[rows])
            states[rows] = np.einsum("sij,sj->si", mats[g_idx + 1], undo)
            position[rows] = g_idx + 1
            # group the drawn error Paulis by (qubit, label) and apply batched
            groups: dict[tuple[int, str], list[int]] = {}
            for local_i, row in enumerate(rows):
                g = gates[g_idx[local_i]]
                e_i = ev[local_i]
                if g.kind == "CNOT":
                    labels = _PAULI_2Q[choice_2q[e_i]]
                else:
                    labels = (_PAULI_1Q[choice_1q[e_i]],)
                for q, lab in zip(g.qubits, labels):
                    if lab != "I":
                        groups.setdefault((q, lab), []).append(row)
            for (q, lab), members in groups.items():
                _apply_pauli_rows(states, np.array(members), q, lab, n)
        # finish evolution to the end of the circuit
        undo = np.einsum("sji,sj->si", mats[position].conj(), states)
        states = np.einsum("ij,sj->si", mats[n_gates], undo)
        probs = np.abs(states) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        cums = np.cumsum(probs, axis=1)
        draws = outcome_u[noisy_shots]
        idx = (cums < draws[:, None]).sum(axis=1).clip(0, dim - 1)
        outcomes[noisy_shots] = idx

    return outcomes


def _sample_noisy_sweep(circuit: Circuit, values, shots: int,
                        noise: NoiseModel, rng) -> np.ndarray:
    """Gate-by-gate batched trajectory evolution for wide registers.

    Memory stays at shots x 2^n amplitudes; used when the dense
    per-prefix unitaries of the fast path would not fit.
    """
    n = circuit.n_qubits
    dim = 1 << n
    bound = circuit.bind_check(values if values is not None else [])
    states = np.zeros((shots, dim), dtype=complex)
    states[:, 0] = 1.0
    idx = np.arange(dim)
    for g in circuit.gates:
        if g.kind == "CNOT":
            cbit = 1 << (n - 1 - g.qubits[0])
            tbit = 1 << (n - 1 - g.qubits[1])
            perm = np.where(idx & cbit, idx ^ tbit, idx)
            states = states[:, perm]
        else:
            u = gate_matrix(g, circuit.resolve(g, bound))
            j = g.qubits[0]
            shaped = states.reshape(shots, 1 << j, 2, -1)
            states = np.einsum("ab,sibj->siaj", u, shaped).reshape(shots, dim)
        p = _gate_error_prob(g, noise)
        if p > 0:
            hit = np.nonzero(rng.random(shots) < p)[0]
            if hit.size:
                if g.kind == "CNOT":
                    draws = rng.integers(0, 16, size=hit.size)
                    for d in range(1, 16):
                        rows = hit[draws == d]
                        if rows.size:
                            for q, lab in zip(g.qubits, _PAULI_2Q[d]):
                                _apply_pauli_rows(states, rows, q, lab, n)
                else:
                    draws = rng.integers(0, 4, size=hit.size)
                    for d in range(1, 4):
                        rows = hit[draws == d]
                        if rows.size:
                            _apply_pauli_rows(states, rows, g.qubits[0],
                                              _PAULI_1Q[d], n)
    probs = np.abs(states) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    cums = np.cumsum(probs, axis=1)
    draws = rng.random(shots)
    return (cums < draws[:, None]).sum(axis=1).clip(0, dim - 1).astype(np.int64)
