"""Exception hierarchy shared by every pipeline stage."""


class TensorSandwichError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(TensorSandwichError, ValueError):
    """Shapes, indices or lengths that do not fit together."""


class PreconditionError(TensorSandwichError, ValueError):
    """Input is well-formed but violates a mathematical precondition."""


class BudgetExceeded(TensorSandwichError):
    """A slice used up its query budget before every column was processed."""

    def __init__(self, message, slice_index=None, queries=None, budget=None):
        super().__init__(message)
        self.slice_index = slice_index
        self.queries = queries
        self.budget = budget


class RankCapExceeded(TensorSandwichError):
    """More columns had to be fully sampled than the configured rank allows."""

    def __init__(self, message, slice_index=None):
        super().__init__(message)
        self.slice_index = slice_index


class DegenerateEigenvalues(TensorSandwichError):
    """Eigenvalue ratios too close together to separate components."""


class NonRealSpectrum(TensorSandwichError):
    """The simultaneous-diagonalization matrix produced a complex eigenpair."""


class RankDeficient(TensorSandwichError):
    """A matrix that must have rank r has numerically lower rank."""


class IllConditionedFibers(TensorSandwichError):
    """The restricted Khatri-Rao system is too ill-conditioned to solve for C."""
