"""Exception hierarchy.

Input problems (bad shapes, unknown points, violated preconditions, exceeded
guard limits) raise ValidationError or a subclass; the CLI maps these to exit
code 1.  InternalCheckError signals a broken internal certificate (an LP
solution that fails re-verification, a witness that does not re-evaluate) and
maps to exit code 2.  Solver statuses such as infeasible/unbounded are never
reported through exceptions.
"""


class LiftlabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LiftlabError):
    """Malformed or inconsistent input."""


class GuardLimitError(ValidationError):
    """A combinatorial guard limit was exceeded.

    Raised before starting an enumeration whose size would blow up; the
    limits can be lifted explicitly via LIFTLAB_GUARD_* environment
    variables or per-call arguments.
    """


class PreconditionError(ValidationError):
    """A documented operation precondition does not hold for the inputs."""


class InternalCheckError(LiftlabError):
    """An internal certificate failed re-verification.  Indicates a bug."""
