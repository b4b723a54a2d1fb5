"""Small-molecule VQE toolkit.

Implements the full workflow for estimating molecular ground-state
energies on simulated quantum hardware: second-quantized Hamiltonians
mapped to qubits, hardware-efficient and chemistry-inspired ansatz
circuits, shot-based energy estimation with qubit-wise commuting
measurement groups, SPSA optimization, and three error-mitigation
schemes (readout matrix inversion, twirled readout extinction, and
zero-noise extrapolation).
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DimensionError,
    MappingInconsistencyError,
    MitigationError,
    MitivqeError,
    OptimizerError,
    ParseError,
    PlanError,
    ResourceError,
)

__all__ = [
    "ConvergenceError",
    "DimensionError",
    "MappingInconsistencyError",
    "MitigationError",
    "MitivqeError",
    "OptimizerError",
    "ParseError",
    "PlanError",
    "ResourceError",
    "__version__",
]
