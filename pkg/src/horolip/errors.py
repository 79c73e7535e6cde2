"""Shared exception types.

The CLI maps ContractError to exit status 2 and DegenerateError to 3.
"""


class ContractError(ValueError):
    """An input violates a documented precondition or invariant."""


class DegenerateError(ArithmeticError):
    """A computation hit a numerical degeneracy (e.g. trace ~ 2, overflow)."""


class EvaluationError(RuntimeError):
    """A distance or function evaluation failed (e.g. infinite distance)."""
