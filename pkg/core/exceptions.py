"""
Exceptions shared by every app of the pickling line project.

Library code raises these; management commands turn them into CommandError.
"""


class PicklingLineError(Exception):
    """Base class for all domain errors."""

    pass


class RejectedInputError(PicklingLineError):
    """An input does not have the shape, range or normalization an operation needs."""

    pass


class ProtocolError(PicklingLineError):
    """An operation was called out of order (missing cache, terminal state, ...)."""

    pass


class ConfigurationError(PicklingLineError):
    """A configuration value, speed table or initial condition is unusable."""

    pass


class CheckpointError(PicklingLineError):
    """A checkpoint file is malformed or written by an unknown format version."""

    pass


class TrainingError(PicklingLineError):
    """Training diverged; ``diagnostics`` carries the state at failure."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
