"""Pauli-string algebra on a symplectic (bit-mask) representation.

An n-qubit Pauli string is stored as two n-bit integers ``x`` and ``z``.
Per qubit, (x, z) = (0,0) -> I, (1,0) -> X, (1,1) -> Y, (0,1) -> Z.

Conventions used throughout the package:

* Qubit 0 is the leftmost character of a textual label and the most
  significant tensor factor of a dense matrix.
* Consequently, in every n-bit integer (masks, measurement outcomes,
  dense-matrix indices) qubit j occupies bit position n-1-j.  With this
  choice an outcome index ``b`` and a Z-support mask ``m`` give the
  measured parity directly as popcount(b & m).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParseError, ResourceError

# |c| below this after merging -> term dropped.
COEFF_TOL = 1e-12

# Largest qubit count for which dense 2^n x 2^n matrices are built.
DENSE_QUBIT_LIMIT = 12

_CHAR_TO_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_XZ_TO_CHAR = {v: k for k, v in _CHAR_TO_XZ.items()}

# Exponent of i in sigma_a . sigma_b, indexed by (x_a, z_a, x_b, z_b).
_PHASE_EXP = {}
for _a, (_xa, _za) in _CHAR_TO_XZ.items():
    for _b, (_xb, _zb) in _CHAR_TO_XZ.items():
        _prod = {
            ("X", "Y"): 1, ("Y", "Z"): 1, ("Z", "X"): 1,
            ("Y", "X"): 3, ("Z", "Y"): 3, ("X", "Z"): 3,
        }.get((_a, _b), 0)
        _PHASE_EXP[(_xa, _za, _xb, _zb)] = _prod

_I2 = np.eye(2, dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)
_Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": _I2, "X": _X2, "Y": _Y2, "Z": _Z2}


def qubit_bit(j: int, n_qubits: int) -> int:
    """Bit position of qubit j inside an n-bit integer."""
    return 1 << (n_qubits - 1 - j)


def parity_of(mask: int) -> int:
    """popcount(mask) mod 2."""
    return bin(mask).count("1") & 1


@dataclass(frozen=True)
class PauliString:
    """A single n-qubit Pauli operator without coefficient."""

    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError(f"n_qubits must be >= 0, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("x/z mask has bits outside the register")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for ch in label:
            if ch not in _CHAR_TO_XZ:
                raise ValueError(f"invalid Pauli character {ch!r}")
            xb, zb = _CHAR_TO_XZ[ch]
            x = (x << 1) | xb
            z = (z << 1) | zb
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, op: str) -> "PauliString":
        """Pauli ``op`` on one qubit, identity elsewhere."""
        bit = qubit_bit(qubit, n_qubits)
        xb, zb = _CHAR_TO_XZ[op]
        return cls(n_qubits, xb * bit, zb * bit)

    @property
    def label(self) -> str:
        chars = []
        for j in range(self.n_qubits):
            bit = qubit_bit(j, self.n_qubits)
            chars.append(_XZ_TO_CHAR[(1 if self.x & bit else 0, 1 if self.z & bit else 0)])
        return "".join(chars)

    @property
    def weight(self) -> int:
        """Number of non-identity positions."""
        return bin(self.x | self.z).count("1")

    @property
    def support(self) -> int:
        """Mask of non-identity positions."""
        return self.x | self.z

    def axis(self, j: int) -> str:
        bit = qubit_bit(j, self.n_qubits)
        return _XZ_TO_CHAR[(1 if self.x & bit else 0, 1 if self.z & bit else 0)]

    def commutes_with(self, other: "PauliString") -> bool:
        """Global commutation via the symplectic product."""
        return parity_of(self.x & other.z) == parity_of(self.z & other.x)

    def qubitwise_commutes_with(self, other: "PauliString") -> bool:
        """Commutation on every qubit independently: axes agree wherever both act."""
        both = self.support & other.support
        return (self.x ^ other.x) & both == 0 and (self.z ^ other.z) & both == 0

    def __str__(self):
        return self.label


def multiply(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Product p.q as (phase, PauliString) with phase in {1, i, -1, -i}."""
    if p.n_qubits != q.n_qubits:
        raise DimensionError(
            f"qubit count mismatch: {p.n_qubits} vs {q.n_qubits}")
    exp = 0
    overlap = p.support & q.support
    while overlap:
        bit = overlap & -overlap
        overlap ^= bit
        exp += _PHASE_EXP[(
            1 if p.x & bit else 0, 1 if p.z & bit else 0,
            1 if q.x & bit else 0, 1 if q.z & bit else 0)]
    phase = (1, 1j, -1, -1j)[exp & 3]
    return phase, PauliString(p.n_qubits, p.x ^ q.x, p.z ^ q.z)


class PauliSum:
    """Weighted sum of Pauli strings; duplicate strings merge on construction.

    Immutable after construction; arithmetic returns new instances.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms=None):
        self.n_qubits = n_qubits
        merged: dict[tuple[int, int], complex] = {}
        for coeff, string in terms or []:
            if string.n_qubits != n_qubits:
                raise DimensionError(
                    f"term on {string.n_qubits} qubits in a {n_qubits}-qubit sum")
            key = (string.x, string.z)
            merged[key] = merged.get(key, 0.0) + complex(coeff)
        self._terms = {k: c for k, c in merged.items() if abs(c) >= COEFF_TOL}

    @classmethod
    def from_label_dict(cls, labels: dict[str, complex]) -> "PauliSum":
        if not labels:
            raise ValueError("empty label dict")
        n = len(next(iter(labels)))
        return cls(n, [(c, PauliString.from_label(s)) for s, c in labels.items()])

    @classmethod
    def constant(cls, n_qubits: int, value: complex) -> "PauliSum":
        return cls(n_qubits, [(value, PauliString(n_qubits))])

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        """Terms in canonical (label-sorted) order."""
        out = [(c, PauliString(self.n_qubits, x, z)) for (x, z), c in self._terms.items()]
        out.sort(key=lambda t: t[1].label)
        return out

    @property
    def identity_coefficient(self) -> complex:
        return self._terms.get((0, 0), 0.0)

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get((string.x, string.z), 0.0)

    def __len__(self):
        return len(self._terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise DimensionError("qubit count mismatch in sum")
        items = list(self._terms.items()) + list(other._terms.items())
        return PauliSum(self.n_qubits,
                        [(c, PauliString(self.n_qubits, x, z)) for (x, z), c in items])

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "PauliSum":
        return PauliSum(self.n_qubits,
                        [(scalar * c, PauliString(self.n_qubits, x, z))
                         for (x, z), c in self._terms.items()])

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product, distributing over all term pairs."""
        if other.n_qubits != self.n_qubits:
            raise DimensionError("qubit count mismatch in product")
        acc: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in self._terms.items():
            p1 = PauliString(self.n_qubits, x1, z1)
            for (x2, z2), c2 in other._terms.items():
                phase, r = multiply(p1, PauliString(self.n_qubits, x2, z2))
                key = (r.x, r.z)
                acc[key] = acc.get(key, 0.0) + c1 * c2 * phase
        return PauliSum(self.n_qubits,
                        [(c, PauliString(self.n_qubits, x, z)) for (x, z), c in acc.items()])

    def adjoint(self) -> "PauliSum":
        """Hermitian conjugate: Pauli strings are self-adjoint, so conjugate coefficients."""
        return PauliSum(self.n_qubits,
                        [(c.conjugate(), PauliString(self.n_qubits, x, z))
                         for (x, z), c in self._terms.items()])

    def max_imag(self) -> float:
        return max((abs(c.imag) for c in self._terms.values()), default=0.0)

    def real_if_hermitian(self, tol: float = 1e-9) -> "PauliSum":
        """Drop imaginary parts, failing loudly if any are non-negligible."""
        bad = self.max_imag()
        if bad > tol:
            raise ValueError(f"sum is not Hermitian: max imaginary coefficient {bad:.3e}")
        return PauliSum(self.n_qubits,
                        [(c.real, PauliString(self.n_qubits, x, z))
                         for (x, z), c in self._terms.items()])

    def __str__(self):
        parts = [f"({c:+.6g}) {s.label or '1'}" for c, s in self.terms]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class QwcGroup:
    """A set of qubit-wise commuting terms sharing one measurement basis.

    ``basis`` holds the per-qubit measurement axis (I where no member acts);
    ``members`` are indices into the term list of the Hamiltonian the group
    was built from.
    """

    basis: str
    members: tuple[int, ...]

    @property
    def n_qubits(self) -> int:
        return len(self.basis)


def qwc_group(h: PauliSum) -> list[QwcGroup]:
    """Partition the non-identity terms of ``h`` into qubit-wise commuting groups.

    Greedy first-fit over terms sorted by descending |coefficient| (ties
    broken by canonical term order).  The identity term is skipped; its
    coefficient is an additive constant handled by the estimator.
    """
    terms = h.terms
    order = sorted(
        (i for i in range(len(terms)) if terms[i][1].weight > 0),
        key=lambda i: (-abs(terms[i][0]), i))

    bases: list[list[str]] = []       # mutable per-qubit axes, "I" = unconstrained
    members: list[list[int]] = []
    for idx in order:
        string = terms[idx][1]
        placed = False
        for basis, group in zip(bases, members):
            ok = True
            for j in range(h.n_qubits):
                a = string.axis(j)
                if a != "I" and basis[j] != "I" and basis[j] != a:
                    ok = False
                    break
            if ok:
                for j in range(h.n_qubits):
                    a = string.axis(j)
                    if a != "I":
                        basis[j] = a
                group.append(idx)
                placed = True
                break
        if not placed:
            bases.append([string.axis(j) for j in range(h.n_qubits)])
            members.append([idx])
    return [QwcGroup("".join(b), tuple(m)) for b, m in zip(bases, members)]


def qwc_group_coloring(h: PauliSum) -> list[QwcGroup]:
    """Fallback grouping: largest-degree-first coloring of the anticompatibility graph.

    Kept as an alternative heuristic for Hamiltonians where first-fit
    produces more groups than necessary.
    """
    terms = h.terms
    idxs = [i for i in range(len(terms)) if terms[i][1].weight > 0]
    conflict = {i: set() for i in idxs}
    for a in range(len(idxs)):
        for b in range(a + 1, len(idxs)):
            i, j = idxs[a], idxs[b]
            if not terms[i][1].qubitwise_commutes_with(terms[j][1]):
                conflict[i].add(j)
                conflict[j].add(i)
    order = sorted(idxs, key=lambda i: (-len(conflict[i]), -abs(terms[i][0]), i))
    groups: list[list[int]] = []
    for i in order:
        for g in groups:
            if not conflict[i].intersection(g):
                # qubit-wise compatibility is not transitive, so re-check axes
                if all(terms[i][1].qubitwise_commutes_with(terms[j][1]) for j in g):
                    g.append(i)
                    break
        else:
            groups.append([i])
    out = []
    for g in groups:
        basis = ["I"] * h.n_qubits
        for i in g:
            for j in range(h.n_qubits):
                a = terms[i][1].axis(j)
                if a != "I":
                    basis[j] = a
        out.append(QwcGroup("".join(basis), tuple(sorted(g))))
    return out


def _term_action(n_qubits: int, string: PauliString):
    """Vectorized action of one Pauli string on the computational basis.

    Returns (rows, values): column b of the dense matrix has its single
    non-zero entry at row ``rows[b]`` with value ``values[b]``.
    """
    dim = 1 << n_qubits
    b = np.arange(dim, dtype=np.int64)
    rows = b ^ string.x
    par = np.zeros(dim, dtype=np.int64)
    zmask = string.z
    pos = 0
    while zmask:
        if zmask & 1:
            par ^= (b >> pos) & 1
        zmask >>= 1
        pos += 1
    n_y = bin(string.x & string.z).count("1")
    values = (1j) ** n_y * np.where(par, -1.0, 1.0)
    return rows, values


def to_dense(h: PauliSum) -> np.ndarray:
    """Dense 2^n x 2^n matrix of ``h`` with qubit 0 as the leftmost tensor factor."""
    n = h.n_qubits
    if n > DENSE_QUBIT_LIMIT:
        raise ResourceError(
            f"dense matrix requested for {n} qubits (limit {DENSE_QUBIT_LIMIT})")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for coeff, string in h.terms:
        rows, values = _term_action(n, string)
        mat[rows, cols] += coeff * values
    return mat


def expectation_dense(h: PauliSum, state: np.ndarray) -> complex:
    """<state|h|state> without building the dense matrix."""
    total = 0.0 + 0.0j
    conj = state.conj()
    for coeff, string in h.terms:
        rows, values = _term_action(h.n_qubits, string)
        # (h_term psi)[rows[b]] = values[b] psi[b]  =>  sum over columns
        total += coeff * np.dot(conj[rows], values * state)
    return total


def ground_energy(h: PauliSum) -> float:
    """Minimum eigenvalue of the dense matrix of ``h``."""
    return float(np.linalg.eigvalsh(to_dense(h))[0])


# ---------------------------------------------------------------------------
# Text format: one term per line "<real> <imag> <pauli_chars>", optional
# "constant <real>" line for the identity offset, '#' comments.
# ---------------------------------------------------------------------------

def write_hamiltonian(h: PauliSum, path, header: str | None = None) -> None:
    lines = []
    if header:
        for row in header.splitlines():
            lines.append(f"# {row}")
    const = h.identity_coefficient
    if const:
        lines.append(f"constant {const.real!r}")
    for coeff, string in h.terms:
        if string.weight == 0:
            continue
        lines.append(f"{coeff.real!r} {coeff.imag!r} {string.label}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_hamiltonian(path) -> PauliSum:
    terms: list[tuple[complex, PauliString]] = []
    n_qubits = None
    constant = 0.0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            try:
                if fields[0] == "constant":
                    constant += float(fields[1])
                    continue
                if len(fields) != 3:
                    raise ValueError("expected '<real> <imag> <paulis>'")
                re_c, im_c, label = float(fields[0]), float(fields[1]), fields[2]
                string = PauliString.from_label(label)
            except (ValueError, IndexError) as exc:
                raise ParseError(str(path), lineno, str(exc)) from exc
            if n_qubits is None:
                n_qubits = string.n_qubits
            elif string.n_qubits != n_qubits:
                raise ParseError(str(path), lineno,
                                 f"term has {string.n_qubits} qubits, expected {n_qubits}")
            terms.append((complex(re_c, im_c), string))
    if n_qubits is None:
        raise ParseError(str(path), 0, "no Pauli terms found")
    if constant:
        terms.append((constant, PauliString(n_qubits)))
    return PauliSum(n_qubits, terms)
