"""Exception types shared across the package.

Plain ValueError is used for invalid arguments; the classes below mark
failures that callers may want to distinguish (the CLI maps each to its
own exit code).
"""


class EvaluationError(RuntimeError):
    """A function or symbol produced a non-finite value at a grid node."""


class NumericalError(RuntimeError):
    """An iterative linear-algebra routine failed to converge."""


class UnsupportedExponentError(ValueError):
    """(p1, p2) falls outside the nine supported summability regimes."""


class ExpressionError(ValueError):
    """Symbol expression rejected at parse time; carries the position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at column {position + 1})")
        self.position = position
