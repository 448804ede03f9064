"""Exception hierarchy shared by the library and the CLI."""
from __future__ import annotations


class StabtelError(Exception):
    """Base class for all package errors."""


class ParseError(StabtelError, ValueError):
    """Malformed problem or protocol input; ``location`` names the line/field."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class GroupValidationError(StabtelError, ValueError):
    """The generator list does not define a valid stabilizer group.

    ``kind`` is one of ``"dimension"``, ``"not_in_G_prime"``,
    ``"noncommuting"``, ``"scalar"`` or ``"dependent"``; ``indices`` holds
    the 1-based generator indices involved and ``exponent`` the commutation
    exponent for ``"noncommuting"``.
    """

    def __init__(self, kind: str, message: str, indices: tuple[int, ...] = (), exponent: int | None = None):
        self.kind = kind
        self.indices = indices
        self.exponent = exponent
        super().__init__(message)


class PartitionError(StabtelError, ValueError):
    """The qudit partition is not a valid sender/receiver split."""


class NoDecompositionError(StabtelError):
    """No decomposition was found.  This never proves impossibility."""


class SimulationInconsistencyError(StabtelError, ArithmeticError):
    """Every measurement branch had negligible probability: the protocol is broken."""


class BudgetError(StabtelError, ValueError):
    """A dense object would exceed the configured dimension budget."""
