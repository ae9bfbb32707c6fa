"""Exception types shared across the engines."""


class ContractViolation(ValueError):
    """A caller broke an operation's precondition (bad width, out-of-range argument...)."""


class TableFormatError(ContractViolation):
    """A function-table file could not be parsed."""


class CapExceeded(RuntimeError):
    """The requested problem size exceeds a hard simulation cap."""


class DegenerateInput(ValueError):
    """The input carries no accepted probability mass, so nothing can be reported."""
