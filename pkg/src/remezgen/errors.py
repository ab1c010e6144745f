"""Exception hierarchy shared by the solvers and the CLI."""

from __future__ import annotations


class RemezError(Exception):
    """Base class for all errors raised by remezgen."""


class DomainError(RemezError, ValueError):
    """A point lies outside the domain, or the domain kind is wrong for the call."""


class CapabilityError(RemezError):
    """A basis family cannot provide the requested derivative order."""


class DependentSystemError(RemezError):
    """Basis functions (or their projections) are linearly dependent."""


class NonDecayingSystemError(RemezError):
    """Half-line truncation did not find a decay point within the horizon."""


class DegeneracyError(RemezError):
    """A linear system in the exchange machinery is singular or ill-conditioned."""

    def __init__(self, message: str, cond: float = float("inf")):
        super().__init__(message)
        self.cond = cond


class ExchangeError(DegeneracyError):
    """The ratio rule of the vertex exchange could not pick a vertex."""


class InitializationError(RemezError):
    """No nondegenerate starting node set could be produced."""


class ConstraintError(RemezError):
    """Constraint functionals are dependent, unsupported, or infeasible."""


class LPError(RemezError):
    """The grid linear program is infeasible or unbounded."""


class ParseError(RemezError, ValueError):
    """A problem, system or target description is malformed."""


class TailSweepError(RemezError):
    """The error beyond the truncation point exceeds the computed upper bound."""


class StabilityError(RemezError, ValueError):
    """A spectrum or characteristic polynomial has an eigenvalue with nonnegative real part."""


class HorizonError(RemezError):
    """A bisection bracket could not be established within the search horizon."""
