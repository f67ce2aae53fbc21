"""Exception types shared across the package."""


class RsmodalError(Exception):
    """Base class for all package-specific errors."""


class ContractViolation(RsmodalError):
    """An argument violated an operation's contract (bounds, foreign values)."""


class SizeLimitError(RsmodalError):
    """An input exceeds a configured tractability bound."""


class DegenerateLatticeError(RsmodalError):
    """A lattice with too few irreducibles to induce a polarity."""


class DegenerateResultError(RsmodalError):
    """An operation would produce an empty object or feature sort."""


class PreconditionError(RsmodalError):
    """A named precondition of an operation does not hold."""


class UnknownNameError(RsmodalError):
    """An object, feature, agent, or proposition name is not defined."""


class FormulaSyntaxError(RsmodalError):
    """A formula or inequality does not match the surface grammar."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class FileFormatError(RsmodalError):
    """A .cxt or .rel file is malformed."""

    def __init__(self, message: str, source: str = "<string>", line: int | None = None):
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line
