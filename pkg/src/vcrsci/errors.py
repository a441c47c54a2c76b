"""Exception hierarchy shared by every vcrsci module."""


class VcrError(Exception):
    """Base class for all library errors."""


class NotFound(VcrError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidRange(VcrError, ValueError):
    pass


class DomainError(VcrError, ValueError):
    pass


class UndefinedDenominator(VcrError, ZeroDivisionError):
    pass


class UndefinedBase(UndefinedDenominator):
    pass


class NoData(VcrError):
    """The cell is structurally absent (nothing to compare), not zero."""


class InconsistentPanel(VcrError, ValueError):
    pass


class InsufficientData(VcrError, ValueError):
    pass


class NonContiguous(VcrError, ValueError):
    pass


class SingularDesign(VcrError, ValueError):
    pass


class InputError(VcrError, ValueError):
    """Malformed input file. Carries the offending line number and column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class SchemaError(InputError):
    pass


class ParseError(InputError):
    pass


class MissingColumn(SchemaError):
    pass


class DuplicateCell(InputError):
    def __init__(self, message, lines=(), column=None):
        self.lines = tuple(lines)
        super().__init__(message, line=self.lines[-1] if self.lines else None, column=column)


class InconsistentTaxonomy(InputError):
    pass
