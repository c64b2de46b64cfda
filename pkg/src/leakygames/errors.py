"""Shared exception types.

The CLI maps these onto distinct exit codes, so solver and parser code
should raise them rather than bare ValueError/RuntimeError where the
distinction matters to a caller.
"""

from __future__ import annotations


class InvalidInputError(ValueError):
    """Malformed file, table, or argument."""


class FormatError(InvalidInputError):
    """Parse error in a game or CSP file, carrying a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class BudgetExceededError(RuntimeError):
    """An exact enumeration would exceed the configured budget.

    Callers can retry with a larger budget, or fall back to Monte Carlo /
    upper-bound methods.
    """

    def __init__(self, required: int, budget: int, what: str = "enumeration"):
        super().__init__(f"{what} needs {required} steps, budget is {budget}")
        self.required = required
        self.budget = budget


class GeneratorCapError(RuntimeError):
    """Random instance search exhausted its attempt cap without a hit."""
