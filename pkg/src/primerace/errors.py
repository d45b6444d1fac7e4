"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class PrimeRaceError(Exception):
    """Base class for all library errors."""


class ValidationError(PrimeRaceError, ValueError):
    """Bad user input: malformed polynomial, non-prime field size, bad class list."""


class ComputationError(PrimeRaceError, ArithmeticError):
    """A numerical or arithmetic step failed its own consistency check."""


class ResourceError(PrimeRaceError):
    """A configured enumeration or table-size cap would be exceeded."""


class RHViolation(ComputationError):
    """An inverse root has modulus near neither sqrt(q) nor 1."""


class RootFindingError(ComputationError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class PrecisionError(ComputationError):
    """Working precision too low for the requested relation height."""
