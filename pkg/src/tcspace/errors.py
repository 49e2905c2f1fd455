"""Exception hierarchy shared by all tcspace modules."""

from __future__ import annotations

__all__ = [
    "CaseUnresolvable",
    "DimensionMismatch",
    "DuplicateLabel",
    "DuplicatePoint",
    "InvalidInstance",
    "InvalidSpec",
    "MetricViolation",
    "MissingValue",
    "NegativeOrZeroOffDiagonal",
    "NonSymmetric",
    "NonZeroDiagonal",
    "NotAMember",
    "NotAMinimumMatching",
    "NotZeroSum",
    "RationalSyntaxError",
    "SpaceSyntaxError",
    "TCSpaceError",
    "TooLarge",
    "TriangleViolation",
    "UncrossingFailed",
    "UnknownLabel",
    "WellDefinednessViolation",
]


class TCSpaceError(ValueError):
    """Base class for every error raised by tcspace."""


# metric spaces and input parsing

class SpaceSyntaxError(TCSpaceError):
    pass


class RationalSyntaxError(SpaceSyntaxError):
    pass


class DuplicateLabel(TCSpaceError):
    pass


class UnknownLabel(TCSpaceError):
    pass


class MetricViolation(TCSpaceError):
    """A distance table fails one of the metric axioms.

    ``points`` holds the witnessing labels (a pair or a triple).
    """

    def __init__(self, message: str, points: tuple[str, ...]):
        super().__init__(message)
        self.points = points


class NonSymmetric(MetricViolation):
    pass


class NegativeOrZeroOffDiagonal(MetricViolation):
    pass


class NonZeroDiagonal(MetricViolation):
    pass


class TriangleViolation(MetricViolation):
    pass


# linear programming

class DimensionMismatch(TCSpaceError):
    pass


# transport

class NotZeroSum(TCSpaceError):
    pass


class MissingValue(TCSpaceError):
    pass


# matching

class TooLarge(TCSpaceError):
    pass


class DuplicatePoint(TCSpaceError):
    pass


class InvalidInstance(TCSpaceError):
    pass


class UncrossingFailed(TCSpaceError):
    pass


# projection

class NotAMember(TCSpaceError):
    pass


class NotAMinimumMatching(TCSpaceError):
    def __init__(self, k: int, weight, optimum):
        super().__init__(
            f"prefix of length {k} has weight {weight} but the minimum "
            f"perfect matching on its points weighs {optimum}")
        self.k = k
        self.weight = weight
        self.optimum = optimum


class WellDefinednessViolation(TCSpaceError):
    pass


class CaseUnresolvable(TCSpaceError):
    pass


# harness

class InvalidSpec(TCSpaceError):
    pass
