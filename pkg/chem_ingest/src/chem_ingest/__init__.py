"""Fermionic integral file generation for small molecules.

Self-contained electronic-structure engine (STO-3G Gaussian integrals,
restricted Hartree-Fock, active-space reduction, determinant FCI) that
emits the line-oriented integral file format consumed by the VQE
package.  The two packages share only that file format.
"""

__version__ = "0.1.0"

from .driver import GenerationSummary, compute, write_integral_file
from .molecule import MoleculeSpec, read_molecule_file
from .scf import ScfError

__all__ = [
    "GenerationSummary",
    "MoleculeSpec",
    "ScfError",
    "compute",
    "read_molecule_file",
    "write_integral_file",
    "__version__",
]
