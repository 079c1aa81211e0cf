from __future__ import annotations

from typing import Optional


class ProbeWitnessError(Exception):
    """Base class for every error raised by probe_witness."""


class UsageError(ProbeWitnessError, ValueError):
    """An argument is outside the domain of the operation."""


class DimensionError(UsageError):
    """Operator shapes do not match each other, their layout, or the dimension cap."""


class ContractError(ProbeWitnessError, ValueError):
    """A physics contract is violated: non-Hermitian input, non-PSD state, signed observable where PSD is required."""


class ConvergenceError(ContractError):
    """The Hermitian eigensolver ran out of sweeps."""


class FitError(ProbeWitnessError, ValueError):
    """The fringe design matrix is rank deficient."""


class ConfigError(ProbeWitnessError):
    """
    A scenario config could not be parsed or validated.

    Attributes:
        field: Dotted path of the offending field, if known.
        line: 1-based line in the config document, if known.
    """

    def __init__(self, message: str, *, field: Optional[str] = None, line: Optional[int] = None) -> None:
        super().__init__(message)
        self.field = field
        self.line = line
