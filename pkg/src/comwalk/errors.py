"""Exception types shared across the package.

The CLI maps these onto exit codes: bad input data exits with 2,
anything signalling a broken internal invariant exits with 3.
"""


class ComwalkError(Exception):
    """Base class for errors raised by this package."""


class DataError(ComwalkError):
    """Input data is malformed or inconsistent with what was requested."""


class EdgeListParseError(DataError):
    """An edge-list line could not be parsed.

    Carries the 1-based line number (and the path, when known) so the
    message pinpoints the offending line.
    """

    def __init__(self, message: str, line_no: int, path=None):
        where = f"{path}:{line_no}" if path else f"line {line_no}"
        super().__init__(f"{where}: {message}")
        self.line_no = line_no
        self.path = path


class InternalError(ComwalkError):
    """An invariant that should hold by construction was violated."""
