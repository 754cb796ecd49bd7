"""Exception and warning types raised across the package."""


class ValidationError(ValueError):
    """Input failed a precondition (shape, finiteness, parameter range)."""


class DegenerateVariableError(ValidationError):
    """One or more variables have zero variance where a positive one is required.

    Attributes
    ----------
    variables : list of int
        Column indices of the offending variables.
    """

    def __init__(self, variables, what="zero variance in both samples"):
        self.variables = [int(v) for v in variables]
        shown = ", ".join(str(v) for v in self.variables[:10])
        more = "" if len(self.variables) <= 10 else f" (+{len(self.variables) - 10} more)"
        super().__init__(f"degenerate variable(s) {shown}{more}: {what}")


class ExperimentAborted(RuntimeError):
    """A Monte Carlo campaign exceeded its tolerated failure fraction."""


class AsymptoticRegimeWarning(UserWarning):
    """Dimension is too large relative to the sample size for the limit law."""
