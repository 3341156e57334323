"""Exception types shared across the package."""


class FnefError(Exception):
    """Base class for all package errors."""


class InvalidInputError(FnefError, ValueError):
    """An argument violates a documented precondition."""


class MalformedInputError(FnefError, ValueError):
    """A file or serialized object does not match its format."""


class MalformedDesignError(MalformedInputError):
    """A block design has the wrong shape (block count or block sizes)."""


class VerificationFailedError(FnefError, RuntimeError):
    """An axiom or verification check failed; carries a witness."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class BoundaryFormError(InvalidInputError):
    """A divisor contains psi-type keys where boundary form is required."""
