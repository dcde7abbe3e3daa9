"""Exception hierarchy shared by every module."""


class PolicyError(Exception):
    """Base class for all errors raised by odrlnorm."""


class ParseError(PolicyError):
    """Malformed input document."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(PolicyError):
    """Well-formed input that violates the attribute schema or operator rules."""


class TypeMismatch(PolicyError):
    """An event value has a different variant than the condition operand."""


class UnsupportedFeature(PolicyError):
    """Input uses a policy feature outside the supported fragment."""

    def __init__(self, term, reason=""):
        msg = f"unsupported feature: {term!r}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.term = term


class InvalidInput(PolicyError):
    """A precondition of an operation does not hold."""


class DomainTooLarge(PolicyError):
    """Enumerating the requested domain would exceed the configured cap."""


class ObligationsUnsupported(PolicyError):
    """Policy comparison was asked to reason about obligations in strict mode."""
