"""Exception hierarchy.  Every error raised on purpose derives from ``SchottkyLabError``."""


class SchottkyLabError(Exception):
    pass


class DomainError(SchottkyLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateProfileError(DomainError):
    """A profile derivative vanished where it must stay positive."""


class CalibrationError(SchottkyLabError):
    pass


class RangeError(SchottkyLabError, ValueError):
    """A value could not be bracketed or a search ran off its interval."""


class GeometryError(SchottkyLabError):
    pass


class AccuracyError(SchottkyLabError):
    """An adaptive procedure exhausted its budget before reaching its tolerance."""


class DepthError(SchottkyLabError):
    """A boundary-point code is too short for the requested operation."""


class ModelConsistencyError(SchottkyLabError):
    pass


class BracketError(SchottkyLabError, ValueError):
    pass


class SpectralError(SchottkyLabError):
    pass


class BudgetError(SchottkyLabError):
    """A brute-force computation would exceed its size guard."""


class ConfigError(SchottkyLabError):
    pass
