"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(SimulationError, ValueError):
    """A parameter is outside its documented domain."""


class InvalidDataError(SimulationError, ValueError):
    """Input data contains non-finite values or is otherwise unusable."""


class ShapeError(SimulationError, ValueError):
    """Array dimensions do not agree."""


class EmptyDatasetError(SimulationError, ValueError):
    """A dataset of zero rows was requested or supplied."""


class DegenerateSplitError(SimulationError):
    """A dataset has an empty treated or control group."""


class SingularDesignError(SimulationError):
    """The design matrix is rank deficient after intercept augmentation."""


class InsufficientDataError(SimulationError, ValueError):
    """Too few rows for the requested fit or cross-validation."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at its iteration cap."""


class CellAbortError(SimulationError):
    """Too many replicates of one grid cell failed even after retries."""


class EmptySummaryError(SimulationError, ValueError):
    """A summary was requested over an empty set of cells."""


class ConfigError(SimulationError, ValueError):
    """The scenario configuration file failed to parse or validate."""


class PartialReportError(SimulationError):
    """Refusing to emit an incomplete report without explicit permission."""
