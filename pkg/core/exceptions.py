"""
Exceptions Module

Error hierarchy shared by the library and the command-line interface.
Each error carries the process exit code the CLI reports for it.
"""


class NntsError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class DomainError(NntsError, ValueError):
    """An argument lies outside the domain of the operation."""

    exit_code = 2


class DataFormatError(NntsError):
    """An angle file is empty, unreadable, or contains invalid rows."""

    exit_code = 3


class DegenerateSampleError(NntsError):
    """A sample statistic is undefined for the given data (e.g. no mean direction)."""

    exit_code = 3


class ModelValidationError(NntsError):
    """A model document violates the schema or a model invariant."""

    exit_code = 3


class ConfigError(NntsError):
    """An experiment configuration does not match its schema."""

    exit_code = 3


class OptimizerInconsistencyError(NntsError):
    """The symmetric fit beat the general fit by more than optimizer noise."""


class EnvelopeViolationError(NntsError):
    """A rejection-sampling proposal exceeded its envelope."""


class SimulationAbortedError(NntsError):
    """Too many datasets failed inside an experiment."""


class ConvergenceError(NntsError):
    """A fit did not converge and strict mode was requested."""

    exit_code = 4
