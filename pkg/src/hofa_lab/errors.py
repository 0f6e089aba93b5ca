"""Exception hierarchy shared by every module.

The CLI maps :class:`ValidationError` to exit code 2 and
:class:`BudgetError` to exit code 3.
"""


class HofaError(Exception):
    """Base class for all library errors."""


class ValidationError(HofaError, ValueError):
    """Malformed or mismatched input."""


class BudgetError(HofaError):
    """An exhaustive enumeration would exceed its configured budget."""

    def __init__(self, what: str, required: int, budget: int):
        super().__init__(f"{what}: requires {required} evaluations, budget is {budget}")
        self.what = what
        self.required = required
        self.budget = budget


class ScalarMultipleError(ValidationError):
    """Two forms of a system are scalar multiples (or a form is zero)."""

    code = "scalar-multiple"

    def __init__(self, i: int, j: int | None):
        if j is None:
            msg = f"form {i} is the zero form"
        else:
            msg = f"forms {i} and {j} are scalar multiples of each other"
        super().__init__(msg)
        self.pair = (i, j)


class NoQualifyingDegreeError(HofaError):
    """No degree up to ``d_max`` makes the tensor powers independent."""

    def __init__(self, d_max: int, reason: str):
        super().__init__(f"no d <= {d_max} qualifies ({reason})")
        self.d_max = d_max
        self.reason = reason


class UnsupportedError(ValidationError):
    """Input combination for which no criterion is available."""
