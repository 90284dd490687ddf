"""Exception types raised by :mod:`convfy`."""


class DomainError(ValueError):
    """An argument lies outside the domain of a negentropy."""


class ResourceLimitError(ValueError):
    """A requested enumeration is too large to hold densely in memory."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    The last iterate and its certificate are kept so callers can inspect or
    reuse them.
    """

    def __init__(self, message, iterate=None, gap=None, iterations=None):
        super().__init__(message)
        self.iterate = iterate
        self.gap = gap
        self.iterations = iterations
