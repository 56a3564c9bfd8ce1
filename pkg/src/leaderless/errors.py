"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`LeaderlessError`, and the CLI maps the three families below to
exit codes (validation -> 1, numerical -> 2).
"""


class LeaderlessError(Exception):
    """Base class for all package errors."""


class ValidationError(LeaderlessError, ValueError):
    """Input failed validation.

    ``problems`` holds ``(field_path, message)`` pairs so callers can report
    every violation at once rather than only the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [("", problems)]
        self.problems = list(problems)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.problems]
        super().__init__("; ".join(lines))


class WeightsError(ValidationError):
    pass


class NonZeroDiagonal(WeightsError):
    pass


class RowSumNotOne(WeightsError):
    def __init__(self, row, deviation, problems=None):
        self.row = row
        self.deviation = deviation
        super().__init__(
            problems or [(f"weights[{row}]", f"row sums to 1{deviation:+.3e}, expected 1")]
        )


class NegativeEntry(WeightsError):
    pass


class ParseError(ValidationError):
    pass


class NumericalError(LeaderlessError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy answer."""


class KernelDimensionError(NumericalError):
    def __init__(self, dimension, msg=None):
        self.dimension = dimension
        super().__init__(msg or f"numerical kernel has dimension {dimension}, expected 1")


class NonPositiveKernel(NumericalError):
    pass


class DegenerateRatio(NumericalError):
    pass


class DegenerateSum(NumericalError):
    pass


class SingularBeyondKernel(NumericalError):
    pass


class IncompatibleEquilibrium(NumericalError):
    pass


class IntegrationError(NumericalError):
    pass


class StepUnderflow(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"non-finite state encountered at t={t!r}")


class GridMismatch(LeaderlessError, ValueError):
    pass
