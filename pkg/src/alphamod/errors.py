"""Exception taxonomy shared by all modules."""


class AlphamodError(Exception):
    """Base class for library errors."""


class ParameterError(AlphamodError, ValueError):
    """Invalid or inconsistent input parameters."""


class DomainError(AlphamodError, ValueError):
    """Inputs outside the mathematical domain of an operation."""


class CoveringError(AlphamodError, RuntimeError):
    """Covering construction failed validation (constants too small)."""


class TruncationError(AlphamodError, RuntimeError):
    """Requested computation exceeds the instantiated index range."""


class GeometryError(AlphamodError, RuntimeError):
    """Grid or period too small for the requested construction."""
