"""Shared exception types."""


class ParameterError(ValueError):
    """A parameter tuple violates one of its invariants."""


class ConstructionError(RuntimeError):
    """A support structure cannot be materialized consistently."""


class TableAmbiguityError(ConstructionError):
    """More than one lookup-table case matches the same input."""


class SpanViolation(RuntimeError):
    """The all-ones row is not in the span of the selected rows."""

    def __init__(self, m_set, i1, i2, residual, message=None):
        self.m_set = tuple(m_set)
        self.i1 = tuple(i1)
        self.i2 = tuple(i2)
        self.residual = float(residual)
        if message is None:
            message = (
                f"span violation for M={self.m_set} I1={self.i1} "
                f"I2={self.i2}: residual={self.residual:.3e}"
            )
        super().__init__(message)


class EnumerationGuard(RuntimeError):
    """An exhaustive check would exceed the tuple budget."""


class DumpFormatError(ValueError):
    """A text dump does not parse back into a matrix."""
