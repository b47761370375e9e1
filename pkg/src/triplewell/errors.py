"""Exception hierarchy.

Input mistakes derive from ``ValueError``; failures of a numerical regime
(asymptotics not reached, box too small, overflow) derive from
``NumericalRegimeError`` so the CLI can map them to a distinct exit code.
"""

from __future__ import annotations


class NumericalRegimeError(RuntimeError):
    """A computation left the regime in which its contract holds."""

    contract = "numerical regime"

    def __str__(self) -> str:
        return f"{self.contract}: {super().__str__()}"


class NonAdjacentMinima(ValueError):
    """The requested endpoints are not neighbouring minima of the potential."""


class EvenK(ValueError):
    """An even instanton count was requested in the 0 -> 1 channel."""


class QuadratureFailure(NumericalRegimeError):
    contract = "QuadratureFailure"


class InsufficientTail(NumericalRegimeError):
    contract = "InsufficientTail"


class ZeroModeVanishes(NumericalRegimeError):
    contract = "ZeroModeVanishes"


class GYOverflow(NumericalRegimeError, OverflowError):
    contract = "Overflow"


class AsymptoticRegimeViolated(NumericalRegimeError):
    contract = "AsymptoticRegimeViolated"


class BoxTooSmall(NumericalRegimeError):
    contract = "BoxTooSmall"
