"""Molecule specification and input file parsing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import ATOMIC_NUMBER

BOHR_PER_ANGSTROM = 1.0 / 0.529177210903


class MoleculeParseError(ValueError):
    def __init__(self, filename, lineno, message):
        self.filename = filename
        self.lineno = lineno
        super().__init__(f"{filename}:{lineno}: {message}")


@dataclass
class MoleculeSpec:
    """Geometry plus electronic-structure settings for one calculation."""

    symbols: list[str]
    coordinates_angstrom: np.ndarray   # shape (n_atoms, 3)
    basis: str = "sto-3g"
    n_active_electrons: int = 0
    n_active_orbitals: int = 0
    charge: int = 0
    multiplicity: int = 1

    def __post_init__(self):
        self.coordinates_angstrom = np.asarray(self.coordinates_angstrom, dtype=float)
        if self.coordinates_angstrom.shape != (len(self.symbols), 3):
            raise ValueError("coordinate array shape does not match atom count")
        for sym in self.symbols:
            if sym not in ATOMIC_NUMBER:
                raise ValueError(f"unknown element symbol {sym!r}")
        if self.multiplicity != 1:
            raise ValueError("only closed-shell (multiplicity 1) systems are supported")

    @property
    def coordinates_bohr(self) -> np.ndarray:
        return self.coordinates_angstrom * BOHR_PER_ANGSTROM

    @property
    def charges(self) -> np.ndarray:
        return np.array([ATOMIC_NUMBER[s] for s in self.symbols], dtype=float)

    @property
    def n_electrons(self) -> int:
        return int(self.charges.sum()) - self.charge

    def validate_active_space(self, n_basis_orbitals: int) -> None:
        if self.n_active_electrons > self.n_electrons:
            raise ValueError(
                f"active electrons ({self.n_active_electrons}) exceed "
                f"total electrons ({self.n_electrons})")
        n_core = (self.n_electrons - self.n_active_electrons) // 2
        if n_core + self.n_active_orbitals > n_basis_orbitals:
            raise ValueError(
                f"active orbitals ({self.n_active_orbitals}) plus {n_core} core "
                f"orbitals exceed basis size ({n_basis_orbitals})")

    def geometry_lines(self) -> list[str]:
        return [
            f"{sym} {xyz[0]:.10f} {xyz[1]:.10f} {xyz[2]:.10f}"
            for sym, xyz in zip(self.symbols, self.coordinates_angstrom)
        ]


def read_molecule_file(path) -> tuple[list[str], np.ndarray, int, int]:
    """Parse element/coordinate lines (angstrom); optional charge/multiplicity lines."""
    symbols: list[str] = []
    rows: list[list[float]] = []
    charge = 0
    multiplicity = 1
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            try:
                if fields[0] == "charge":
                    charge = int(fields[1])
                elif fields[0] == "multiplicity":
                    multiplicity = int(fields[1])
                else:
                    if len(fields) != 4:
                        raise ValueError("expected '<element> <x> <y> <z>'")
                    symbols.append(fields[0])
                    rows.append([float(v) for v in fields[1:]])
            except (ValueError, IndexError) as exc:
                raise MoleculeParseError(str(path), lineno, str(exc)) from exc
    if not symbols:
        raise MoleculeParseError(str(path), 0, "no atoms found")
    return symbols, np.array(rows), charge, multiplicity
