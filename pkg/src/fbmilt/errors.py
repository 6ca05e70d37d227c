"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""


class QuadratureBudgetError(RuntimeError):
    """The subdivision budget was exhausted before reaching the tolerance.

    Carries the partial result so callers can decide whether it is usable.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class IndeterminateError(RuntimeError):
    """A sweep could not be classified even after extending the ladder.

    Carries the sweep series that led to the tie.
    """

    def __init__(self, message, series=None):
        super().__init__(message)
        self.series = series
