"""Exception types shared across the package.

Every failure a Monte Carlo trial is allowed to survive derives from
NumericalError, so the harness can count and exclude it with a single
except clause. Anything else (bad shapes, bad arguments) is a plain
ValueError and propagates.
"""


class NumericalError(Exception):
    """Base class for numerical failures that callers may catch and exclude."""


class IllConditioned(NumericalError):
    """A matrix that must be inverted has condition number above the limit."""

    def __init__(self, matrix_name: str, cond: float):
        super().__init__(
            f"{matrix_name} is ill-conditioned (condition estimate {cond:.3e})"
        )
        self.matrix_name = matrix_name
        self.cond = cond


class RankDeficient(NumericalError):
    """A matrix required to have full rank does not."""


class InsufficientData(NumericalError):
    """The observation cannot support the requested subspace decomposition."""


class SolverDegenerate(NumericalError):
    """The estimator's eigenproblem has no isolated minimizer."""


class ZeroAnchorTap(NumericalError):
    """The anchor tap of a channel estimate is too small to divide by."""


class ExclusionBudgetExceeded(NumericalError):
    """Too large a fraction of Monte Carlo trials failed for the cell to stand."""
