"""Exception types raised across the package."""


class RegDigraphError(ValueError):
    """Base class for all package errors."""


class NotZeroOne(RegDigraphError):
    pass


class NotRegular(RegDigraphError):
    def __init__(self, axis, index, total, d):
        self.axis = axis
        self.index = index
        self.total = total
        self.d = d
        super().__init__(
            f"{axis} {index + 1} sums to {total}, expected {d}"
        )


class NotSquare(RegDigraphError):
    pass


class DegreeOverflow(RegDigraphError):
    pass


class DegenerateScale(RegDigraphError):
    pass


class SameVertex(RegDigraphError):
    pass


class IndexOutOfRange(RegDigraphError, IndexError):
    pass


class BadDegree(RegDigraphError):
    pass


class Exhausted(RegDigraphError):
    pass


class TooLarge(RegDigraphError):
    pass


class InvalidSpec(RegDigraphError):
    pass


class PlanMismatch(RegDigraphError):
    pass


class BadParams(RegDigraphError):
    pass


class PrerequisiteMissing(RegDigraphError):
    pass


class IsFlat(RegDigraphError):
    pass


class ZeroVector(RegDigraphError):
    pass


class NumericalFailure(RegDigraphError):
    pass


class IllConditioned(RegDigraphError):
    pass


class BadP(RegDigraphError):
    pass


class BadFunctionSpec(RegDigraphError):
    pass


class InvalidZ(RegDigraphError):
    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        super().__init__(f"hypothesis violated: {hypothesis} {detail}".strip())


class NonIntegralD(RegDigraphError):
    pass
