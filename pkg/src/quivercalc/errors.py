"""Exception hierarchy shared by all modules.

InputError covers malformed files and invalid structural data (CLI exit
code 2); DomainError covers well-formed inputs outside an operation's
domain, e.g. a non-positive-definite quiver (CLI exit code 1).
"""


class QuiverCalcError(Exception):
    """Base class for all library errors."""

    code: str = "error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InputError(QuiverCalcError):
    code = "input-error"


class DomainError(QuiverCalcError):
    code = "domain-error"
