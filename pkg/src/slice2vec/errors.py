"""Exception hierarchy.

Everything raised deliberately by the package derives from
:class:`Slice2VecError`.  The CLI maps :class:`DataError` to exit code 2 and
:class:`NumericalError` to exit code 3.
"""


class Slice2VecError(Exception):
    pass


class DataError(Slice2VecError, ValueError):
    """Input data is malformed or violates a precondition."""


class MidiParseError(DataError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class CorpusFormatError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelFormatError(DataError):
    """Model file has the wrong magic, an unknown version, or is truncated."""


class VocabularyError(DataError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NumericalError(Slice2VecError, ArithmeticError):
    """NaN or infinity appeared during optimisation."""


class TruncatedModelError(ModelFormatError):
    def __init__(self, offset):
        super().__init__(f"unexpected end of file at offset {offset}")
        self.offset = offset
