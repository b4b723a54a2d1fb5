"""Parameterized circuit builders: hardware-efficient and coupled-cluster.

Both builders are deterministic: the same arguments always produce the
same gate list and parameter order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, ParamRef
from .errors import DimensionError
from .fermion import (ParticleSector, hf_occupations, hf_tapered_label,
                      map_excitation_generator, taper_two_qubits)
from .pauli import PauliSum, qubit_bit

HALF_PI = 0.5 * np.pi


def build_efficient_su2(n_qubits: int, reps: int) -> Circuit:
    """Alternating RY/RZ rotation layers with linear-chain CNOT entanglers.

    Layout: (reps + 1) rotation layers, each applying RY to every qubit
    and then RZ to every qubit, with CNOT(i, i+1) for i = 0..n-2 between
    consecutive rotation layers.  Parameters are ordered layer-major,
    RY block before RZ block, qubit-minor: 2 * n_qubits * (reps + 1) total.
    """
    if n_qubits < 2:
        raise DimensionError(f"need at least 2 qubits, got {n_qubits}")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    n_params = 2 * n_qubits * (reps + 1)
    c = Circuit(n_qubits, [], [f"t{k}" for k in range(n_params)])
    for layer in range(reps + 1):
        base = 2 * n_qubits * layer
        for q in range(n_qubits):
            c.ry(q, ParamRef(base + q))
        for q in range(n_qubits):
            c.rz(q, ParamRef(base + n_qubits + q))
        if layer < reps:
            for q in range(n_qubits - 1):
                c.cnot(q, q + 1)
    return c


@dataclass(frozen=True)
class Excitation:
    """One excitation: electrons leave ``occupied`` and enter ``virtual``."""

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.occupied)


def uccsd_excitations(n_spin_orbitals: int, sector: ParticleSector) -> list[Excitation]:
    """Spin-preserving singles and spin-allowed doubles from the HF reference.

    Singles first, then doubles; each block sorted lexicographically by
    (occupied, virtual) index tuples.
    """
    sector.validate(n_spin_orbitals)
    m = n_spin_orbitals // 2
    occ_a = list(range(sector.n_alpha))
    vir_a = list(range(sector.n_alpha, m))
    occ_b = list(range(m, m + sector.n_beta))
    vir_b = list(range(m + sector.n_beta, n_spin_orbitals))

    singles = [Excitation((i,), (a,)) for block_occ, block_vir in
               ((occ_a, vir_a), (occ_b, vir_b))
               for i in block_occ for a in block_vir]

    doubles = []
    for hi, i in enumerate(occ_a):          # alpha-alpha
        for j in occ_a[hi + 1:]:
            for ai, a in enumerate(vir_a):
                for b in vir_a[ai + 1:]:
                    doubles.append(Excitation((i, j), (a, b)))
    for hi, i in enumerate(occ_b):          # beta-beta
        for j in occ_b[hi + 1:]:
            for ai, a in enumerate(vir_b):
                for b in vir_b[ai + 1:]:
                    doubles.append(Excitation((i, j), (a, b)))
    for i in occ_a:                         # alpha-beta
        for j in occ_b:
            for a in vir_a:
                for b in vir_b:
                    doubles.append(Excitation((i, j), (a, b)))
    singles.sort(key=lambda e: (e.occupied, e.virtual))
    doubles.sort(key=lambda e: (e.occupied, e.virtual))
    return singles + doubles


def uccsd_generators(n_spin_orbitals: int, sector: ParticleSector,
                     mapping: str = "parity_tapered") -> list[PauliSum]:
    """Anti-Hermitian qubit generators T_k - T_k+, one per excitation."""
    gens = []
    for exc in uccsd_excitations(n_spin_orbitals, sector):
        if mapping == "jordan_wigner":
            g = map_excitation_generator(n_spin_orbitals, exc.virtual,
                                         tuple(reversed(exc.occupied)),
                                         "jordan_wigner")
        elif mapping == "parity_tapered":
            g = map_excitation_generator(n_spin_orbitals, exc.virtual,
                                         tuple(reversed(exc.occupied)), "parity")
            g = taper_two_qubits(g, sector)
        else:
            raise ValueError(f"unknown mapping {mapping!r}")
        gens.append(g)
    return gens


def append_pauli_exponential(c: Circuit, string, coefficient: float,
                             param: int) -> None:
    """Append gates for exp(i * theta * coefficient * P).

    Standard compilation: rotate every non-identity axis to Z, entangle
    the support with a CNOT ladder, RZ(-2 * coefficient * theta) on the
    last support qubit, then undo the ladder and the basis changes.
    """
    qs = [j for j in range(string.n_qubits)
          if string.support & qubit_bit(j, string.n_qubits)]
    if not qs:
        return
    for q in qs:
        ax = string.axis(q)
        if ax == "X":
            c.ry(q, -HALF_PI)
        elif ax == "Y":
            c.rz(q, -HALF_PI)
            c.ry(q, -HALF_PI)
    for a, b in zip(qs, qs[1:]):
        c.cnot(a, b)
    c.rz(qs[-1], ParamRef(param, -2.0 * coefficient))
    for a, b in reversed(list(zip(qs, qs[1:]))):
        c.cnot(a, b)
    for q in reversed(qs):
        ax = string.axis(q)
        if ax == "X":
            c.ry(q, HALF_PI)
        elif ax == "Y":
            c.ry(q, HALF_PI)
            c.rz(q, HALF_PI)


def build_uccsd(n_spin_orbitals: int, sector: ParticleSector,
                mapping: str = "parity_tapered") -> Circuit:
    """Reference-state X gates plus one Trotterized exponential per excitation.

    Each excitation contributes exp(theta_k (T_k - T_k+)) as a product of
    Pauli exponentials over the canonical term order of its generator,
    sharing the single parameter theta_k.  All parameters zero leaves the
    encoded HF determinant untouched.
    """
    sector.validate(n_spin_orbitals)
    gens = uccsd_generators(n_spin_orbitals, sector, mapping)
    if mapping == "jordan_wigner":
        n_qubits = n_spin_orbitals
        reference = ["0"] * n_qubits
        for j in hf_occupations(n_spin_orbitals, sector):
            reference[j] = "1"
        reference = "".join(reference)
    else:
        n_qubits = n_spin_orbitals - 2
        reference = hf_tapered_label(n_spin_orbitals, sector)

    c = Circuit(n_qubits, [], [f"t{k}" for k in range(len(gens))])
    for q, bit in enumerate(reference):
        if bit == "1":
            c.x(q)
    for k, g in enumerate(gens):
        for coeff, string in g.terms:
            if abs(coeff.real) > 1e-9:
                raise ValueError(
                    f"generator term {string.label} has a real part "
                    f"{coeff.real:.3e}; expected anti-Hermitian generator")
            append_pauli_exponential(c, string, coeff.imag, k)
    return c


@dataclass(frozen=True)
class AnsatzSpec:
    """Declarative circuit choice, resolvable to a concrete Circuit."""

    kind: str                              # efficient_su2 | uccsd
    n_qubits: int = 0                      # efficient_su2 only
    reps: int = 1                          # efficient_su2 only
    n_spin_orbitals: int = 0               # uccsd only
    sector: ParticleSector | None = None   # uccsd only
    mapping: str = "parity_tapered"        # uccsd only

    def build(self) -> Circuit:
        if self.kind == "efficient_su2":
            return build_efficient_su2(self.n_qubits, self.reps)
        if self.kind == "uccsd":
            if self.sector is None:
                raise ValueError("uccsd requires a particle sector")
            return build_uccsd(self.n_spin_orbitals, self.sector, self.mapping)
        raise ValueError(f"unknown ansatz kind {self.kind!r}")
