"""Exception hierarchy.

Witness searches and constructions raise; audits and hypothesis checks return
a :class:`~growthtypes.verdict.Verdict` instead.
"""


class GrowthError(Exception):
    """Base class for every error raised by this package."""


class IndexOutOfHorizon(GrowthError, IndexError):
    pass


class NotBgd(GrowthError):
    """The sequence has no bounded-growth-of-derivative constant.

    ``index`` is the first ``n`` at which ``v(n+2) - v(n+1)`` is zero, or at
    which a positive increment follows a zero one.
    """

    def __init__(self, index, reason=""):
        self.index = index
        self.reason = reason
        super().__init__(f"not a bgd-function at index {index}: {reason}".rstrip(": "))


class NoWitness(GrowthError):
    pass


class DegenerateRange(GrowthError):
    pass


class InvalidWitness(GrowthError):
    pass


class PrecisionExhausted(GrowthError):
    pass


class NotSuperlinear(GrowthError):
    pass


class BudgetOverflow(GrowthError):
    def __init__(self, level, budget, capacity):
        self.level = level
        self.budget = budget
        self.capacity = capacity
        super().__init__(
            f"level {level}: {budget} new vertices exceed capacity {capacity}"
        )


class BudgetUnderflow(GrowthError):
    """A level would receive no children, so the trunk could not continue."""

    def __init__(self, level, budget):
        self.level = level
        self.budget = budget
        super().__init__(f"level {level}: budget {budget} < 1 ends the tree")


class BudgetUnderflowAtS(GrowthError):
    pass


class GuardTooLarge(GrowthError):
    pass


class NegativeExponent(GrowthError):
    pass


class InfeasibleBounds(GrowthError):
    pass


class TrunkTooShort(GrowthError):
    pass


class MissingProfile(GrowthError):
    pass


class MissingSelection(GrowthError):
    pass


class HorizonExceeded(GrowthError):
    pass


class ModeInfeasible(GrowthError):
    pass


class StretchGap(GrowthError):
    """The middle interval of the stretch argument fails for this ``v``.

    Raised when ``C (v(x) - v(a))`` exceeds ``B (v(Bx) - v(Ba))`` (or the
    mirror lower-side inequality) for some ``x`` in ``[a, a+R]``; this cannot
    happen for convex ``v``.
    """


class PipelineError(GrowthError):
    """A synthesis stage failed; ``cause`` is the original exception."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
