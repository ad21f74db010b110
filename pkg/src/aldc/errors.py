"""Exception hierarchy shared by all modules."""


class ALDCError(Exception):
    """Base class for every error raised by this package."""


class InvalidCodeError(ALDCError, ValueError):
    """A code configuration violates a structural invariant."""


class DomainError(ALDCError, ValueError):
    pass


class UnsupportedQueryCountError(ALDCError, ValueError):
    pass


class DegeneratePairError(ALDCError, ValueError):
    pass


class ParameterError(ALDCError, ValueError):
    pass


class PreconditionError(ALDCError, ValueError):
    pass


class EmptyCodeError(ALDCError, ValueError):
    pass


class ConfigurationError(ALDCError, ValueError):
    pass


class NumericalError(ALDCError, ArithmeticError):
    pass


class CertificateSearchFailure(ALDCError):
    """Raised when random search exhausts its budget without a valid cut.

    ``diagnostics`` carries whatever the search learned (samples drawn,
    best ratio seen, subset size) so callers can report it.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class EmptyWitnessError(EmptyCodeError):
    """A point subset covers no direction, so no witness matrix exists."""
