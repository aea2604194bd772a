"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class AlignmentError(Exception):
    code = "alignment-error"

    def __init__(self, message, curve_id=None):
        if curve_id is not None:
            message = f"curve {curve_id!r}: {message}"
        super().__init__(message)
        self.curve_id = curve_id


class InvalidBasisError(AlignmentError, ValueError):
    code = "invalid-basis"


class InvalidDomainError(AlignmentError, ValueError):
    code = "invalid-domain"


class RankDeficiencyError(AlignmentError):
    code = "rank-deficiency"


class WarpOverflowError(AlignmentError):
    code = "warp-overflow"


class DegenerateWarpError(AlignmentError):
    code = "degenerate-warp"


class FlatCurveError(AlignmentError):
    code = "flat-curve"


class DimensionMismatchError(AlignmentError, ValueError):
    code = "dimension-mismatch"


class LandmarkOrderError(AlignmentError):
    code = "landmark-order"


class DegenerateLandmarkError(AlignmentError):
    code = "degenerate-landmark"


class UndefinedSyncError(AlignmentError):
    code = "undefined-sync"


class DataFormatError(AlignmentError, ValueError):
    code = "data-format"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(AlignmentError, ValueError):
    code = "config"
