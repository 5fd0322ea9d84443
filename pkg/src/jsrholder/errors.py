"""Exception hierarchy shared by all modules."""


class JSRError(Exception):
    """Base class for errors raised by jsrholder."""


class InvalidInputError(JSRError, ValueError):
    """Malformed matrices, mismatched dimensions or out-of-range arguments."""


class BudgetExceededError(JSRError, RuntimeError):
    """An enumeration would produce more products than the configured budget."""

    def __init__(self, count, budget):
        self.count = count
        self.budget = budget
        super().__init__(
            f"enumeration needs {count} products (|M|^k), budget is {budget}; "
            "raise the budget (JSR_BUDGET) or lower the depth"
        )


class PreconditionError(JSRError, ValueError):
    """A documented precondition of an operation does not hold."""


class InconclusiveError(JSRError):
    """The numerics cannot support a conclusion (e.g. a bracket is too wide).

    The offending object (usually a :class:`~jsrholder.bounds.BoundsBracket`)
    is kept in ``context``.
    """

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context
