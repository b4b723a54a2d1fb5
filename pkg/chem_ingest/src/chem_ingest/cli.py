"""Command-line entry point: molecule file -> integral file."""

from __future__ import annotations

import argparse
import sys

from .driver import compute, write_integral_file
from .molecule import MoleculeParseError, MoleculeSpec, read_molecule_file
from .scf import ScfError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chem-ingest",
        description="Generate a fermionic integral file for a molecule "
                    "and active space.")
    parser.add_argument("--molecule", required=True,
                        help="molecule file: '<element> <x> <y> <z>' lines in angstrom, "
                             "optional 'charge N' / 'multiplicity N' lines")
    parser.add_argument("--basis", default="sto-3g", help="basis set name")
    parser.add_argument("--active", nargs=2, type=int, required=True,
                        metavar=("NE", "NO"),
                        help="active electrons and active spatial orbitals")
    parser.add_argument("--out", required=True, help="output integral file path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        symbols, coords, charge, multiplicity = read_molecule_file(args.molecule)
        spec = MoleculeSpec(
            symbols=symbols,
            coordinates_angstrom=coords,
            basis=args.basis,
            n_active_electrons=args.active[0],
            n_active_orbitals=args.active[1],
            charge=charge,
            multiplicity=multiplicity,
        )
        summary = compute(spec)
        write_integral_file(summary, spec, args.out)
    except (MoleculeParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(f"basis functions: {summary.n_basis_orbitals}")
    print(f"scf energy:      {summary.scf.energy:.8f}")
    print(f"fci energy:      {summary.fci_energy:.8f}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
