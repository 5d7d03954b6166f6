"""Exception types shared across the package."""


class NumericalFailure(ArithmeticError):
    """Raised when a computation leaves its trusted floating-point regime.

    Examples are an FFT convolution returning clearly negative mass, a
    probability exceeding one by more than rounding slack, or a root
    bracket that is not monotone.
    """
