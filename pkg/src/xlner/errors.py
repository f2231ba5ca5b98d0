"""Exception hierarchy shared across the toolkit.

``ValidationError`` subclasses map to CLI exit code 1 (bad inputs or
configuration); every other ``XlnerError`` maps to exit code 2 (runtime or
numeric failure).
"""


class XlnerError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(XlnerError, ValueError):
    """Invalid input data, file format, or configuration.

    Also a ``ValueError`` so estimator-style callers can catch it the way
    they would any scikit-learn input-validation failure.
    """


class ParseError(ValidationError):
    """A line-oriented input file could not be parsed."""

    def __init__(self, message, line_number=None, source=None):
        self.line_number = line_number
        self.source = source
        prefix = ""
        if source is not None:
            prefix += f"{source}: "
        if line_number is not None:
            prefix += f"line {line_number}: "
        super().__init__(prefix + message)


class ConfigError(ValidationError):
    """Experiment configuration is missing or inconsistent."""


class AlignmentError(XlnerError):
    """Embedding alignment failed (insufficient supervision or SVD failure)."""


class TrainingError(XlnerError):
    """Training aborted, typically on a non-finite loss."""

    def __init__(self, message, epoch=None, sentence_index=None):
        self.epoch = epoch
        self.sentence_index = sentence_index
        if epoch is not None:
            message = f"{message} (epoch {epoch}, sentence {sentence_index})"
        super().__init__(message)
