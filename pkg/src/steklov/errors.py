"""Exception types raised by the numerical routines."""


class SteklovError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ConfigError(SteklovError):
    exit_code = 2


class BoundaryAmbiguous(SteklovError):
    """Point lies within the boundary tolerance of the curve."""


class DegenerateCurve(SteklovError):
    pass


class ZeroAtOrigin(SteklovError):
    pass


class RootInsideDisk(SteklovError):
    """Truncated square-root polynomial has a root in the closed unit disk.

    The offending roots are kept on ``roots``.
    """

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = tuple(roots)


class NoIntersection(SteklovError):
    pass


class SingularRHS(SteklovError):
    pass


class TooFewConverged(SteklovError):
    pass


class NotPositiveDefinite(SteklovError):
    pass


class OutsideDomain(SteklovError):
    pass


class InteriorRequired(OutsideDomain):
    pass


class NewtonFailed(SteklovError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BranchJump(SteklovError):
    pass


class NoSignConstantCell(SteklovError):
    pass
