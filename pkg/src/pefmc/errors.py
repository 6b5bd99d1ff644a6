"""Exception hierarchy shared by every pefmc module."""

from __future__ import annotations


class PefError(Exception):
    """Base class for all errors raised by pefmc."""


class ParseError(PefError):
    """Malformed sentence, template or Q13 text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class FragmentError(ParseError):
    """Input uses a symbol outside the positive equality-free fragment."""


class UnboundVariableError(ParseError):
    pass


class SignatureError(PefError):
    """Relation names or arities do not match the template."""


class BudgetError(PefError):
    """A configured size cap was exceeded."""

    def __init__(self, message: str, candidate: object = None):
        self.candidate = candidate
        super().__init__(message)


class PolicyError(PefError):
    """A strategy policy or guard is not compatible with the template."""


class CertificateError(PefError):
    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(f"step {step}: {message}")


class TransformError(PefError):
    """A syntactic transform does not apply to the given input."""
