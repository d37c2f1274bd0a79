"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Malformed input: bad indices, mismatched sizes, empty collections."""


class ContractViolationError(ValueError):
    """Input violates a documented numeric contract (e.g. non-normalized state)."""


class UnsupportedSizeError(StructuralError):
    """Size outside the supported range (e.g. search domain smaller than 4)."""


class InvalidIntervalError(StructuralError):
    """Interval width incompatible with the domain size."""


class ResourceCapError(RuntimeError):
    """Request exceeds the dense-simulation qubit cap."""


class DegenerateProblemError(ValueError):
    """Training problem is degenerate (e.g. a single class in the labels)."""
