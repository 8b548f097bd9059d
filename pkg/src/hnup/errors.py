"""Exception hierarchy.

The CLI maps these onto exit codes: budget problems exit 2, invariant
violations exit 3.
"""


class HnupError(Exception):
    pass


class BudgetError(HnupError):
    """Some configured resource limit was hit."""


class ExactBudgetExceeded(BudgetError):
    """Exact rationals were dropped because they outgrew the bit budget."""


class EnumerationBudget(BudgetError):
    """Refused to enumerate (or visit) more objects than allowed."""


class InvariantViolation(HnupError):
    pass


class ContainmentFailure(InvariantViolation):
    pass


class Unsupported(HnupError, ValueError):
    pass


class DuplicatePoints(HnupError, ValueError):
    pass


class Degenerate(HnupError, ValueError):
    pass


class WitnessNotFound(HnupError):
    """No witness within the depth budget.

    ``conclusive`` is True only when a theorem-backed bound rules a witness
    out (constant ratio sequences); otherwise the search simply ran out of
    depth and says nothing about the infinite set.
    """

    def __init__(self, depth_budget, reason, conclusive=False):
        super().__init__(reason)
        self.depth_budget = depth_budget
        self.reason = reason
        self.conclusive = conclusive
