"""Exception types shared across the package."""


class BibliographError(Exception):
    """Base class for package errors."""


class ConfigurationError(BibliographError):
    """Bad or missing configuration (unknown dialect, invalid params, ...)."""


class InputFormatError(BibliographError):
    """Input file is structurally unusable (e.g. most rows unparseable)."""


class StageError(BibliographError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
