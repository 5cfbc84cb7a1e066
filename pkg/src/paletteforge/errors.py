"""Exception hierarchy shared across the package.

Two broad classes matter to callers: :class:`InputError` covers anything a
user handed us that fails validation (bad files, bad palettes, empty text),
while :class:`RuntimeFailure` covers failures of the machinery itself.  The
CLI maps the former to exit code 1 and the latter to exit code 2.
"""

from __future__ import annotations


class PaletteForgeError(Exception):
    """Base class for all package errors."""


class InputError(PaletteForgeError):
    """User-supplied data failed validation."""


class PatFormatError(InputError):
    """A text/palette dataset file is malformed.

    Carries the 1-based line number of the offending record.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmbeddingFormatError(InputError):
    """A word-vector file is malformed."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyTextError(InputError):
    """Tokenization produced no tokens."""


class RuntimeFailure(PaletteForgeError):
    """An internal operation failed (not a validation problem)."""


class TrainingDiverged(RuntimeFailure):
    """A loss became NaN/Inf during training."""


class CheckpointError(RuntimeFailure):
    """A checkpoint file is missing, corrupt, or of the wrong kind."""
