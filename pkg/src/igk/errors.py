"""Shared exception types."""


class DomainError(ValueError):
    """A parameter, point, or argument lies outside the admissible domain."""


class NumericalError(RuntimeError):
    """An iterative or quadrature computation failed to converge.

    Carries the offending residual when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotKahlerError(ValueError):
    """An observable is not compatible with the Kähler structure at hand."""


class UndefinedProjectionError(ValueError):
    """A state is orthogonal to the requested eigenmanifold."""


class SpecFileError(ValueError):
    """A family spec file failed to parse or validate.

    ``where`` names the offending JSON key (or file) and ``column`` the
    1-based position inside that expression, when known.
    """

    def __init__(self, message, where=None, column=None):
        loc = ""
        if where is not None:
            loc = f"{where}: "
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(loc + message)
        self.where = where
        self.column = column
