"""Exception hierarchy.

``ValidationError`` subclasses are bad input (CLI exit code 2);
``NumericalError`` subclasses are numerical failures (exit code 3).
"""


class RmstMatchError(Exception):
    """Base class for all package errors."""


class ValidationError(RmstMatchError, ValueError):
    pass


class NumericalError(RmstMatchError, ArithmeticError):
    pass


# ingest
class MissingColumn(ValidationError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"missing column {column!r}")


class NonNumericCell(ValidationError):
    def __init__(self, row, column, value):
        self.row, self.column, self.value = row, column, value
        super().__init__(f"row {row}, column {column!r}: non-numeric value {value!r}")


class NegativeTime(ValidationError):
    def __init__(self, row, value):
        self.row, self.value = row, value
        super().__init__(f"row {row}: time must be strictly positive, got {value!r}")


class NonBinaryFlag(ValidationError):
    def __init__(self, row, column, value):
        self.row, self.column, self.value = row, column, value
        super().__init__(f"row {row}, column {column!r}: expected 0 or 1, got {value!r}")


class EmptyArm(ValidationError):
    pass


# propensity
class RankDeficient(NumericalError):
    pass


class NotConverged(NumericalError):
    def __init__(self, iterations, gradient):
        self.iterations, self.gradient = iterations, gradient
        super().__init__(
            f"IRLS did not converge after {iterations} iterations "
            f"(max |gradient| = {gradient:.3g})"
        )


class Separation(NumericalError):
    pass


class ZeroVariance(ValidationError):
    def __init__(self, covariate):
        self.covariate = covariate
        super().__init__(f"covariate {covariate!r} has zero pooled standard deviation")


# matcher
class InsufficientControls(ValidationError):
    def __init__(self, n_treated, n_control):
        self.n_treated, self.n_control = n_treated, n_control
        super().__init__(
            f"1:1 matching needs at least as many controls as treated "
            f"({n_treated} treated, {n_control} controls)"
        )


# km / rmst
class TauBeyondFollowUp(ValidationError):
    def __init__(self, tau, t_max, arm=None):
        self.tau, self.t_max, self.arm = tau, t_max, arm
        where = f" in arm {arm}" if arm is not None else ""
        super().__init__(f"tau={tau:g} exceeds the largest follow-up time{where} (t_max={t_max:g})")


class TooFewEvents(NumericalError):
    def __init__(self, m):
        self.m = m
        super().__init__(f"need at least 2 events before tau for the variance, found {m}")


# estimator / sensitivity
class EmptyMatch(ValidationError):
    pass


class ParamBelowOne(ValidationError):
    pass


class NegativeMean(ValidationError):
    pass


class MissingMeans(ValidationError):
    pass


class PotentialOutcomesMissing(ValidationError):
    pass


# cli
class ImbalanceError(ValidationError):
    """Post-matching standardized mean difference above the configured threshold."""
