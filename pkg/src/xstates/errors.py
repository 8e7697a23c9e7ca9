"""Exception hierarchy shared by all modules."""


class XStateError(Exception):
    """Base class for every error raised by this package."""

    code = "error"


class InvalidArgument(XStateError, ValueError):
    code = "invalid-argument"


class MalformedState(XStateError, ValueError):
    code = "malformed-state"


class NotGeneric(XStateError):
    """Input is outside the general-position locus required by an operation."""

    code = "not-generic"


class ReductionFailed(XStateError):
    """The normal-form reduction did not reproduce the input state.

    Either the state is not an X-state or it is not in general position.
    """

    code = "reduction-failed"


class NotSameOrbit(XStateError):
    code = "not-same-orbit"


class Degenerate(XStateError):
    code = "degenerate"


class LocalizationViolated(XStateError):
    code = "localization-violated"


class DegenerateSample(XStateError):
    code = "degenerate-sample"


class EvaluationError(XStateError, ArithmeticError):
    code = "evaluation-error"
