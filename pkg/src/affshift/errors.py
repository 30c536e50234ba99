"""Exception types shared across the package."""


class ModelError(ValueError):
    """Invalid model data: bad chain, weights, potential or measure spec."""


class BudgetError(RuntimeError):
    """An enumeration would exceed the configured work budget."""


class ConstraintError(ValueError):
    """A marginal constraint is infeasible or outside the open simplex."""


class EnclosureWidthError(RuntimeError):
    """A pressure value is too uncertain for the requested derivative step."""


class IterationLimitError(RuntimeError):
    """An iterative solver hit its iteration cap before converging."""
