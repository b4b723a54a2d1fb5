"""End-to-end generation of fermionic integral files."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import build_basis
from .casci import ActiveSpaceResult, active_space_tensors, fci_ground_energy
from .integrals import build_integrals, nuclear_repulsion
from .molecule import MoleculeSpec
from .scf import ScfResult, restricted_hartree_fock


@dataclass
class GenerationSummary:
    scf: ScfResult
    active: ActiveSpaceResult
    fci_energy: float
    n_basis_orbitals: int


def compute(spec: MoleculeSpec) -> GenerationSummary:
    """Run integrals -> RHF -> active-space reduction -> FCI for one molecule."""
    aos = build_basis(spec.symbols, spec.coordinates_bohr, spec.basis)
    spec.validate_active_space(len(aos))
    charges, centers = spec.charges, spec.coordinates_bohr
    s, t, v, eri = build_integrals(aos, charges, centers)
    e_nuc = nuclear_repulsion(charges, centers)
    scf = restricted_hartree_fock(s, t + v, eri, spec.n_electrons, e_nuc)
    active = active_space_tensors(
        t + v, eri, scf.mo_coefficients, e_nuc, spec.n_electrons,
        spec.n_active_electrons, spec.n_active_orbitals)
    fci = fci_ground_energy(active)
    return GenerationSummary(scf, active, fci, len(aos))


def write_integral_file(summary: GenerationSummary, spec: MoleculeSpec, path,
                        zero_tol: float = 1e-14) -> None:
    """Emit the line-oriented integral format consumed by the VQE package.

    Headers: norb (spin-orbital count), nelec, core, convention.  Body:
    h/g lines with spin-orbital indices in block order (alpha then beta).
    """
    a = summary.active
    lines = []
    lines.append(f"# generated by chem-ingest")
    lines.append(f"# basis: {spec.basis}")
    lines.append(f"# geometry (angstrom):")
    for row in spec.geometry_lines():
        lines.append(f"#   {row}")
    lines.append(f"# charge {spec.charge} multiplicity {spec.multiplicity}")
    lines.append(f"# active space: {spec.n_active_electrons} electrons, "
                 f"{spec.n_active_orbitals} spatial orbitals")
    lines.append(f"# scf energy: {summary.scf.energy!r}")
    lines.append(f"# fci energy: {summary.fci_energy!r}")
    lines.append(f"norb {a.n_spin_orbitals}")
    lines.append(f"nelec {a.n_alpha} {a.n_beta}")
    lines.append(f"core {float(a.core_energy)!r}")
    lines.append("convention physicist")
    for p, q in np.argwhere(np.abs(a.one_body) > zero_tol):
        lines.append(f"h {p} {q} {float(a.one_body[p, q])!r}")
    for p, q, r, s in np.argwhere(np.abs(a.two_body) > zero_tol):
        lines.append(f"g {p} {q} {r} {s} {float(a.two_body[p, q, r, s])!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
