"""Second-quantized electronic operators and fermion-to-qubit mappings.

The electronic Hamiltonian is

    H = sum_pq h_pq a+_p a_q
      + sum_pqrs g_pqrs a+_p a+_q a_r a_s
      + core

with spin-orbital indices in block order: 0..m-1 carry spin alpha and
m..2m-1 carry spin beta, where m = n_spin_orbitals / 2.  The two-body
tensor multiplies the operator string exactly as written above
(physicist index order), so no reordering happens at mapping time.

Two encodings are provided.  Jordan-Wigner stores occupation n_j on
qubit j.  The parity encoding stores the running parity
p_j = (n_0 + ... + n_j) mod 2 on qubit j; in that encoding the total
alpha parity lives on qubit m-1 and the total parity on qubit n-1, so
for a spin-conserving operator both qubits can be replaced by their
sector eigenvalues and removed (two-qubit tapering).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, MappingInconsistencyError, ParseError
from .pauli import PauliString, PauliSum


@dataclass
class FermionicOperator:
    """One- and two-body coefficient tensors over spin orbitals, plus a scalar."""

    n_spin_orbitals: int
    one_body: np.ndarray
    two_body: np.ndarray
    core_energy: float = 0.0

    def __post_init__(self):
        n = self.n_spin_orbitals
        if n <= 0 or n % 2:
            raise DimensionError(f"n_spin_orbitals must be positive and even, got {n}")
        self.one_body = np.asarray(self.one_body, dtype=float)
        self.two_body = np.asarray(self.two_body, dtype=float)
        if self.one_body.shape != (n, n):
            raise DimensionError(
                f"one_body shape {self.one_body.shape}, expected {(n, n)}")
        if self.two_body.shape != (n, n, n, n):
            raise DimensionError(
                f"two_body shape {self.two_body.shape}, expected {(n, n, n, n)}")
        for name, tensor in (("one_body", self.one_body), ("two_body", self.two_body)):
            if not np.all(np.isfinite(tensor)):
                raise ValueError(f"{name} contains NaN or Inf")
        if not np.isfinite(self.core_energy):
            raise ValueError("core_energy is not finite")
        if np.abs(self.one_body - self.one_body.T).max() > 1e-10:
            raise ValueError("one_body tensor is not symmetric")


@dataclass(frozen=True)
class ParticleSector:
    """Electron counts per spin species."""

    n_alpha: int
    n_beta: int

    def __post_init__(self):
        if self.n_alpha < 0 or self.n_beta < 0:
            raise ValueError("negative electron count")

    def validate(self, n_spin_orbitals: int) -> None:
        m = n_spin_orbitals // 2
        if self.n_alpha > m or self.n_beta > m:
            raise DimensionError(
                f"sector ({self.n_alpha},{self.n_beta}) does not fit in "
                f"{m} orbitals per spin")


# ---------------------------------------------------------------------------
# Mode operators
# ---------------------------------------------------------------------------

def _jw_lowering(n: int, j: int) -> PauliSum:
    """a_j = Z_0..Z_{j-1} (X_j + i Y_j)/2."""
    zmask = 0
    for k in range(j):
        zmask |= 1 << (n - 1 - k)
    bit = 1 << (n - 1 - j)
    return PauliSum(n, [
        (0.5, PauliString(n, bit, zmask)),
        (0.5j, PauliString(n, bit, zmask | bit)),
    ])


def _parity_lowering(n: int, j: int) -> PauliSum:
    """a_j in the parity encoding.

    Flipping occupation j flips every stored parity k >= j; the occupation
    value and the Jordan-Wigner sign are both read from qubits j-1 and j:

        a_j = X_{j+1}..X_{n-1} (X_j Z_{j-1} + i Y_j) / 2     (j > 0)
        a_0 = X_1..X_{n-1} (X_0 + i Y_0) / 2
    """
    xtail = 0
    for k in range(j + 1, n):
        xtail |= 1 << (n - 1 - k)
    bit = 1 << (n - 1 - j)
    prev = 1 << (n - j) if j > 0 else 0  # qubit j-1
    return PauliSum(n, [
        (0.5, PauliString(n, xtail | bit, prev)),
        (0.5j, PauliString(n, xtail | bit, bit)),
    ])


def _map_operator(f: FermionicOperator, lowering) -> PauliSum:
    n = f.n_spin_orbitals
    lower = [lowering(n, j) for j in range(n)]
    raise_ = [op.adjoint() for op in lower]

    total = PauliSum.constant(n, f.core_energy)
    for p, q in np.argwhere(f.one_body != 0.0):
        total = total + f.one_body[p, q] * (raise_[p] @ lower[q])
    # cache pair products: a+_p a+_q on the left, a_r a_s on the right
    left_cache: dict[tuple[int, int], PauliSum] = {}
    right_cache: dict[tuple[int, int], PauliSum] = {}
    for p, q, r, s in np.argwhere(f.two_body != 0.0):
        lk, rk = (int(p), int(q)), (int(r), int(s))
        if lk not in left_cache:
            left_cache[lk] = raise_[lk[0]] @ raise_[lk[1]]
        if rk not in right_cache:
            right_cache[rk] = lower[rk[0]] @ lower[rk[1]]
        total = total + f.two_body[p, q, r, s] * (left_cache[lk] @ right_cache[rk])
    return total.real_if_hermitian()


def jordan_wigner(f: FermionicOperator) -> PauliSum:
    """Map to qubits with occupation n_j stored on qubit j."""
    return _map_operator(f, _jw_lowering)


def parity_map(f: FermionicOperator) -> PauliSum:
    """Map to qubits with running parity p_j stored on qubit j."""
    return _map_operator(f, _parity_lowering)


_LOWERINGS = {"jordan_wigner": _jw_lowering, "parity": _parity_lowering}


def map_excitation_generator(n_modes: int, create: tuple[int, ...],
                             annihilate: tuple[int, ...],
                             encoding: str = "jordan_wigner") -> PauliSum:
    """Qubit image of T - T+ for T = a+_{create...} a_{annihilate...}.

    The result is anti-Hermitian (purely imaginary Pauli coefficients).
    """
    try:
        lowering = _LOWERINGS[encoding]
    except KeyError:
        raise ValueError(f"unknown encoding {encoding!r}") from None
    t = PauliSum.constant(n_modes, 1.0)
    for mode in create:
        t = t @ lowering(n_modes, mode).adjoint()
    for mode in annihilate:
        t = t @ lowering(n_modes, mode)
    return t - t.adjoint()


# ---------------------------------------------------------------------------
# Two-qubit tapering
# ---------------------------------------------------------------------------

def taper_two_qubits(h: PauliSum, sector: ParticleSector) -> PauliSum:
    """Remove the alpha-parity and total-parity qubits of a parity-mapped operator.

    For block spin ordering those are qubits n/2 - 1 and n - 1.  A
    particle- and spin-conserving operator acts on them only with I or Z,
    so each Z is replaced by the sector eigenvalue (-1)^{n_alpha} or
    (-1)^{n_alpha + n_beta} and the positions are deleted.
    """
    n = h.n_qubits
    if n < 2 or n % 2:
        raise DimensionError(f"tapering expects an even register of >= 2 qubits, got {n}")
    t_alpha, t_total = n // 2 - 1, n - 1
    eig_alpha = -1.0 if sector.n_alpha % 2 else 1.0
    eig_total = -1.0 if (sector.n_alpha + sector.n_beta) % 2 else 1.0

    new_terms: list[tuple[complex, PauliString]] = []
    for coeff, string in h.terms:
        label = string.label
        factor = 1.0
        for pos, eig in ((t_alpha, eig_alpha), (t_total, eig_total)):
            ch = label[pos]
            if ch in ("X", "Y"):
                raise MappingInconsistencyError(
                    f"term {label} has {ch} on tapered qubit {pos}; "
                    "operator does not conserve the spin-sector parities")
            if ch == "Z":
                factor *= eig
        kept = "".join(ch for i, ch in enumerate(label) if i not in (t_alpha, t_total))
        new_terms.append((coeff * factor, PauliString.from_label(kept) if kept
                          else PauliString(0)))
    return PauliSum(n - 2, new_terms)


def map_and_taper(f: FermionicOperator, sector: ParticleSector) -> PauliSum:
    """Parity-map then taper; the standard route to the compact qubit operator."""
    sector.validate(f.n_spin_orbitals)
    return taper_two_qubits(parity_map(f), sector)


# ---------------------------------------------------------------------------
# Reference determinant
# ---------------------------------------------------------------------------

def hf_occupations(n_spin_orbitals: int, sector: ParticleSector) -> list[int]:
    """Occupied spin orbitals of the lowest-filling determinant."""
    m = n_spin_orbitals // 2
    sector.validate(n_spin_orbitals)
    return list(range(sector.n_alpha)) + [m + j for j in range(sector.n_beta)]

def hf_parity_label(n_spin_orbitals: int, sector: ParticleSector) -> str:
    """Parity-encoded bits of the reference determinant, qubit 0 first."""
    occ = set(hf_occupations(n_spin_orbitals, sector))
    bits = []
    running = 0
    for j in range(n_spin_orbitals):
        running ^= 1 if j in occ else 0
        bits.append(str(running))
    return "".join(bits)


def hf_tapered_label(n_spin_orbitals: int, sector: ParticleSector) -> str:
    """Reference determinant bits after removing the two tapered positions."""
    label = hf_parity_label(n_spin_orbitals, sector)
    n = n_spin_orbitals
    drop = (n // 2 - 1, n - 1)
    return "".join(ch for i, ch in enumerate(label) if i not in drop)


# ---------------------------------------------------------------------------
# Integral file format
# ---------------------------------------------------------------------------
# Header lines:  norb <n_spin_orbitals>, nelec <n_alpha> <n_beta>,
#                core <real>, convention physicist
# Body lines:    h <p> <q> <value>      one-body element
#                g <p> <q> <r> <s> <value>   two-body element
# '#' starts a comment; indices are spin-orbital indices in block order.

def write_fermionic_file(f: FermionicOperator, sector: ParticleSector, path,
                         header: str | None = None) -> None:
    lines = []
    if header:
        for row in header.splitlines():
            lines.append(f"# {row}")
    lines.append(f"norb {f.n_spin_orbitals}")
    lines.append(f"nelec {sector.n_alpha} {sector.n_beta}")
    lines.append(f"core {float(f.core_energy)!r}")
    lines.append("convention physicist")
    for p, q in np.argwhere(f.one_body != 0.0):
        lines.append(f"h {p} {q} {float(f.one_body[p, q])!r}")
    for p, q, r, s in np.argwhere(f.two_body != 0.0):
        lines.append(f"g {p} {q} {r} {s} {float(f.two_body[p, q, r, s])!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_fermionic_file(path) -> tuple[FermionicOperator, ParticleSector]:
    n = None
    sector = None
    core = 0.0
    convention = None
    one = two = None
    entries: list[tuple[int, tuple, float]] = []

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            tag = fields[0]
            try:
                if tag == "norb":
                    n = int(fields[1])
                elif tag == "nelec":
                    sector = ParticleSector(int(fields[1]), int(fields[2]))
                elif tag == "core":
                    core = float(fields[1])
                elif tag == "convention":
                    convention = fields[1]
                elif tag == "h":
                    entries.append((lineno, tuple(map(int, fields[1:3])), float(fields[3])))
                elif tag == "g":
                    entries.append((lineno, tuple(map(int, fields[1:5])), float(fields[5])))
                else:
                    raise ValueError(f"unknown line tag {tag!r}")
            except (ValueError, IndexError) as exc:
                raise ParseError(str(path), lineno, str(exc)) from exc

    if n is None:
        raise ParseError(str(path), 0, "missing required header 'norb'")
    if sector is None:
        raise ParseError(str(path), 0, "missing required header 'nelec'")
    if convention is None:
        raise ParseError(str(path), 0, "missing required header 'convention'")
    if convention != "physicist":
        raise ParseError(str(path), 0,
                         f"unsupported two-body convention {convention!r}")

    one = np.zeros((n, n))
    two = np.zeros((n, n, n, n))
    for lineno, idx, value in entries:
        if any(i < 0 or i >= n for i in idx):
            raise ParseError(str(path), lineno,
                             f"index out of range for norb={n}: {idx}")
        if len(idx) == 2:
            one[idx] = value
        else:
            two[idx] = value

    try:
        op = FermionicOperator(n, one, two, core)
    except (ValueError, DimensionError) as exc:
        raise ParseError(str(path), 0, str(exc)) from exc
    sector.validate(n)
    return op, sector
