"""Exception types raised by the numerical routines."""


class KamPropError(Exception):
    """Base class for numerical failures (CLI exit code 3)."""


class NumericError(KamPropError, ValueError):
    """Non-finite input or output."""


class IntegrationError(KamPropError):
    """The reference ODE integrator could not advance."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class QuadratureError(KamPropError):
    """Panel doubling did not reach the requested accuracy."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SeriesDivergenceError(KamPropError):
    """The nested-commutator series did not converge."""

    def __init__(self, message, last_term_norm=None):
        super().__init__(message)
        self.last_term_norm = last_term_norm
