"""Exception hierarchy shared by every module."""


class EmbedcapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EmbedcapError, ValueError):
    """A table, alphabet, or parameter violates its invariants."""


class AxisError(ValidationError):
    """Axis names are unknown, duplicated, or inconsistent between operands."""


class BudgetExceeded(EmbedcapError):
    """An exhaustive enumeration would exceed its configured budget."""


class InfeasibleProblem(EmbedcapError):
    """No choice of embedded symbol can meet the distortion budget."""


class InfeasibleTuple(ValidationError):
    """A candidate tuple violates the distortion constraint or the host marginal."""


class SpecError(EmbedcapError):
    """A problem-spec file could not be parsed or validated."""

    def __init__(self, message, *, section=None, line=None, col=None):
        self.section = section
        self.line = line
        self.col = col
        where = []
        if section:
            where.append(f"[{section}]")
        if line is not None:
            where.append(f"line {line}" + (f", column {col}" if col is not None else ""))
        prefix = " ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
