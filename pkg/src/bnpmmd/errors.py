"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter is outside its documented domain."""


class InvalidInputError(ValueError):
    """An input array has the wrong shape, dimension, or is empty."""


class NumericUnderflowError(ArithmeticError):
    """A sampler produced all-zero draws even after bounded retries."""


class UnsupportedKernelError(ValueError):
    """The requested kernel operation is not defined for this spec."""


class DegeneratePriorError(RuntimeError):
    """The prior Monte Carlo sample is constant, so quantile cells collapse.

    Carries the raw samples so a caller can inspect the ECDFs.
    """

    def __init__(self, message, prior_samples=None, posterior_samples=None):
        super().__init__(message)
        self.prior_samples = prior_samples
        self.posterior_samples = posterior_samples


class IdxFormatError(ValueError):
    """An IDX file is malformed; ``offset`` locates the problem byte."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
