"""Exception hierarchy shared by all modules."""


class LeakageError(Exception):
    """Base class for errors raised by qleak."""


class NonDistribution(LeakageError, ValueError):
    """Probabilities are negative or do not sum to one."""


class ZeroProbabilityEvent(LeakageError, ValueError):
    """Conditioning on an event of probability zero."""


class AlphabetTooLarge(LeakageError, ValueError):
    """Exhaustive relabeling search would exceed the configured bound."""


class DimensionMismatch(LeakageError, ValueError):
    """Subsystem dimensions are inconsistent with the data."""


class PhaseDomainMismatch(LeakageError, ValueError):
    """A phase function is not defined exactly on the support."""


class InvalidSpec(LeakageError, ValueError):
    """Primitive parameters are missing or out of range."""


class TooManyParameters(LeakageError, ValueError):
    """Too many free phases for the optimizer."""


class NotAPovm(LeakageError, ValueError):
    """POVM elements are not PSD or do not sum to the identity."""


class IncorrectEmbedding(LeakageError, ValueError):
    """A state does not reproduce the target distribution."""


class FormatError(LeakageError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, source="<input>", line=None):
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class NumericalError(LeakageError, ArithmeticError):
    """An internal numerical consistency check failed."""


class NotHermitian(NumericalError):
    pass


class NotPositiveSemidefinite(NumericalError):
    pass
