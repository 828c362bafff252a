"""Exception hierarchy shared across the package."""


class CompstatError(Exception):
    """Base class for all library errors."""


class CycleError(CompstatError):
    pass


class DuplicateElement(CompstatError):
    pass


class UnknownElement(CompstatError):
    pass


class SpaceMismatch(CompstatError):
    pass


class PartitionMismatch(CompstatError):
    pass


class DimensionMismatch(CompstatError):
    pass


class NonPositiveJoint(CompstatError):
    pass


class RegionNotNested(CompstatError):
    pass


class InvalidRegion(CompstatError):
    pass


class TooLarge(CompstatError):
    pass


class PositivityRequired(CompstatError):
    pass


class NonPositiveBelief(CompstatError):
    pass


class InfeasibleInput(CompstatError):
    pass


class DegenerateBelief(CompstatError):
    pass


class NotConverged(CompstatError):
    pass


class CheckFailed(CompstatError):
    pass


class ValidationError(CompstatError):
    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class ParseError(CompstatError):
    """Malformed specification file; ``location`` points at the offending node."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class NumericalRankWarning(UserWarning):
    pass
