"""Exception hierarchy shared by all solvers and learners."""


class MarkovRLError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(MarkovRLError, ValueError):
    pass


class RowSumError(MarkovRLError, ValueError):
    def __init__(self, row, total):
        self.row = row
        self.total = total
        super().__init__(f"row {row} sums to {total!r}, not 1")


class NegativeEntryError(MarkovRLError, ValueError):
    def __init__(self, row, col, value):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"entry ({row}, {col}) is negative: {value!r}")


class NotIrreducibleError(MarkovRLError, ValueError):
    pass


class RankDeficientBasis(MarkovRLError, ValueError):
    pass


class MaxItersExceeded(MarkovRLError, RuntimeError):
    """Iteration budget exhausted; carries the last iterate and its residual."""

    def __init__(self, last, residual, iterations):
        self.last = last
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class NonFiniteUpdate(MarkovRLError, FloatingPointError):
    def __init__(self, t, detail=""):
        self.t = t
        msg = f"non-finite value produced at step {t}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class ConfigError(MarkovRLError, ValueError):
    pass


class ModelParseError(MarkovRLError, ValueError):
    pass


class UnknownFixture(MarkovRLError, KeyError):
    pass
