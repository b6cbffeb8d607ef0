#!/usr/bin/env python3
"""
Exception types shared by the pricing modules
The CLI maps these onto exit codes
"""


class PricingError(Exception):
    """Base class for every error raised by the pricing library"""


class ConfigurationError(PricingError, ValueError):
    """Invalid problem set-up: grids, qubit counts, payoffs, shot budgets"""


class UsageError(PricingError, ValueError):
    """Invalid call: mismatched dimensions, bad indices, out-of-range times"""


class NumericalError(PricingError, ArithmeticError):
    """A numerical invariant was violated during a run"""


class DivergenceError(NumericalError):
    """
    Raised when the parameter velocity blows up during the Euler march

    Args:
        message: Human readable diagnostic
        trace: Partial EvolutionTrace recorded up to the failing step
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class AnchoringError(NumericalError):
    """Boundary amplitude too small to recover the price normalisation"""


class ExtrapolationError(PricingError, ValueError):
    """Requested point lies outside the space grid"""
