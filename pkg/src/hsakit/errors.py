"""Exception types raised across the toolkit.

Every error derives from :class:`HsaError` so callers (and the CLI) can
separate domain failures from programming errors.  Input/format problems
additionally derive from :class:`InputError`.
"""


class HsaError(Exception):
    """Base class for all toolkit errors."""


class InputError(HsaError, ValueError):
    """Malformed or unusable input data."""


class UnknownDesignPoint(HsaError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ThetaOutOfRange(HsaError, ValueError):
    pass


class LengthUnreachable(HsaError, ValueError):
    pass


class DegenerateCoupling(HsaError, ValueError):
    pass


class DegenerateDesignMatrix(HsaError, ValueError):
    pass


class LengthMismatch(InputError):
    pass


class NonPositiveInput(InputError):
    pass


class NoCyclesFound(HsaError, ValueError):
    pass


class InsufficientCycles(HsaError, ValueError):
    pass


class NoForceMinimum(HsaError, ValueError):
    pass


class NonDecreasingSeries(HsaError, ValueError):
    pass


class FitDivergence(HsaError, RuntimeError):
    pass


class ModeUnsupported(HsaError, ValueError):
    pass


class EmptyCatalog(InputError):
    pass


class NoFeasibleDesign(HsaError):
    pass


class UnknownDesign(InputError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class MalformedHeader(InputError):
    pass


class NonMonotoneTime(InputError):
    pass


class UnparseableRow(InputError):
    def __init__(self, line, message=""):
        self.line = line
        super().__init__(f"line {line}: {message}" if message else f"line {line}")
