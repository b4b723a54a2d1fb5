"""Exception types shared across the package.

The CLI maps these onto exit codes, so user-facing failures should raise
one of the classes below rather than bare ValueError where practical.
"""


class MitivqeError(Exception):
    """Base class for package-specific failures."""


class ParseError(MitivqeError):
    """Malformed input file; carries the file name and 1-based line number."""

    def __init__(self, filename: str, lineno: int, message: str):
        self.filename = filename
        self.lineno = lineno
        super().__init__(f"{filename}:{lineno}: {message}")


class DimensionError(MitivqeError):
    """Mismatched register sizes, mode counts, or parameter lengths."""


class MappingInconsistencyError(MitivqeError):
    """Operator violates an assumption of the requested encoding.

    Raised, for example, when qubit tapering meets an X or Y on a qubit
    that the symmetry argument requires to carry only I or Z.
    """


class PlanError(MitivqeError):
    """Measurement plan does not cover the Hamiltonian it is used with."""


class MitigationError(MitivqeError):
    """Error-mitigation step cannot proceed (conditioning, amplification, fits)."""


class OptimizerError(MitivqeError):
    """Optimizer cannot continue (flat calibration landscape, NaN cost)."""


class ResourceError(MitivqeError):
    """Request exceeds a deliberate size guard (dense matrices, shot counts)."""


class ConvergenceError(MitivqeError):
    """Iterative numerical procedure failed to converge."""
