"""Exception types shared across the toolkit."""


class MilpDecompError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(MilpDecompError):
    """A matrix or vector has a shape inconsistent with the rest of the instance."""

    def __init__(self, field: str, detail: str = ""):
        self.field = field
        msg = f"dimension mismatch in field '{field}'"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonFiniteEntry(MilpDecompError):
    """A matrix or vector contains NaN or infinity."""

    def __init__(self, field: str):
        self.field = field
        super().__init__(f"non-finite entry in field '{field}'")


class TooManyBinaries(MilpDecompError):
    """Enumeration guard: too many binary variables for brute force."""


class NumericalBreakdown(MilpDecompError):
    """LP pivoting stalled beyond the iteration cap or the basis went singular."""


class Infeasible(MilpDecompError):
    """No point satisfies the constraint system."""


class LengthMismatch(MilpDecompError):
    """A bit vector or coefficient vector has the wrong length."""


class NoPointCuts(MilpDecompError):
    """The Benders master needs at least one optimality (point) cut."""


class TooLarge(MilpDecompError):
    """Exhaustive QUBO enumeration guard exceeded."""


class SubInfeasible(MilpDecompError):
    """The Benders dual subproblem has no feasible multiplier (malformed instance)."""


class MasterInfeasible(MilpDecompError):
    """Every candidate assignment violates the master constraints."""


class PricingInfeasible(MilpDecompError):
    """The pricing feasible set is empty."""


class PricingUnbounded(MilpDecompError):
    """A pricing LP is unbounded; only extreme points are supported."""


class TooManyUnstable(MilpDecompError):
    """Exact certification guard: too many unstable neurons to enumerate."""


class ParseError(MilpDecompError):
    """An input file does not match its schema."""
