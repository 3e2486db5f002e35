"""Exception hierarchy.  Every error carries a short machine-readable code."""


class WarpfillError(Exception):
    code = "ERROR"

    def __init__(self, message=""):
        super().__init__(f"[{self.code}] {message}" if message else f"[{self.code}]")


class ValidationError(WarpfillError):
    code = "VALIDATION"


class SlopeOrderError(WarpfillError):
    code = "SLOPE_ORDER"


class IntersectionOutsideError(WarpfillError):
    code = "INTERSECTION_OUTSIDE"


class MismatchError(WarpfillError):
    code = "MISMATCH"


class OutOfDomainError(WarpfillError):
    code = "OUT_OF_DOMAIN"


class DomainError(WarpfillError):
    code = "DOMAIN"


class DegenerateError(WarpfillError):
    code = "DEGENERATE"


class OutOfRangeError(WarpfillError):
    code = "OUT_OF_RANGE"


class NonpositiveWarpError(WarpfillError):
    code = "NONPOSITIVE_WARP"


class SingularPointError(WarpfillError):
    code = "SINGULAR_POINT"


class WindowTooSmallError(WarpfillError):
    code = "WINDOW_TOO_SMALL"


class SolverFailureError(WarpfillError):
    code = "SOLVER_FAILURE"


class RankDeficientError(WarpfillError):
    code = "RANK_DEFICIENT"


class TopMismatchError(WarpfillError):
    code = "TOP_MISMATCH"


class EmptyJoinError(WarpfillError):
    code = "EMPTY"


class ScheduleEmptyError(WarpfillError):
    code = "SCHEDULE_EMPTY"
