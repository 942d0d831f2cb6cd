"""Shared exception types."""


class CgkitError(Exception):
    """Base class for errors raised by this package."""


class ParseError(CgkitError):
    """A graph or model file could not be parsed; carries every problem found."""

    def __init__(self, problems):
        # problems: iterable of (line_number, message), 1-based line numbers
        self.problems = sorted(problems)
        text = "; ".join(f"line {n}: {m}" for n, m in self.problems)
        super().__init__(text or "parse error")


class QueryError(CgkitError):
    """A query referenced unknown nodes or violated a query precondition."""


class StructureError(CgkitError):
    """An input graph lacks the structure the requested operation needs."""


class GuardError(CgkitError):
    """A size guard refused work that would not finish at desk scale."""


class NumericError(CgkitError):
    """A numeric routine hit a singular or non positive definite matrix."""
