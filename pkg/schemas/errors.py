from __future__ import annotations


class SpikeTestError(Exception):
    pass


class DomainError(SpikeTestError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ValidationError(SpikeTestError, ValueError):
    """Config or data problem; the message names the offending field or line."""


class ConvergenceError(SpikeTestError, RuntimeError):
    pass
