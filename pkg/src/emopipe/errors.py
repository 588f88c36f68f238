"""Exception hierarchy shared by every pipeline stage."""


class EmopipeError(Exception):
    """Base class for all pipeline contract violations."""


class ContractError(EmopipeError, ValueError):
    """A precondition of an operation was not met."""


class SchemaError(ContractError):
    """A CSV header does not match the expected column layout."""


class LabelValueError(ContractError):
    """A label cell holds something other than 0 or 1."""


class DuplicateIdError(ContractError):
    """Two rows of one split share an id."""


class NeutralLabelError(ContractError):
    """An all-zero label vector reached an operation that needs a class."""

    def __init__(self, message: str, ids: tuple[str, ...] = ()):
        super().__init__(message)
        self.ids = ids


class ConfigError(ContractError):
    """A configuration value is out of its legal range."""


class TrainingDivergedError(EmopipeError):
    """The training loss became NaN or infinite."""


class CheckpointError(EmopipeError):
    """A checkpoint is missing, corrupt, or does not fit the backend."""
