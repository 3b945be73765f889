"""Exception hierarchy shared across the package."""


class BullwhipError(Exception):
    """Base class for all domain errors raised by this package."""


class TooShort(BullwhipError):
    """Input sequence is shorter than the operation requires."""


class NonPositiveValue(BullwhipError):
    """A strictly-positive input contains a value <= 0."""


class LengthMismatch(BullwhipError):
    """Two sequences that must align have different lengths."""


class DegenerateRange(BullwhipError):
    """Min-max scaling requested on a constant sequence."""


class MalformedRow(BullwhipError):
    """A CSV row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicatePeriod(BullwhipError):
    """The same period appears twice within one series."""


class UnknownStage(BullwhipError):
    """Stage code not one of the supported supply-chain stages."""


class UnknownKind(BullwhipError):
    """Series kind not one of demand/inventory/production."""


class GapTooLong(BullwhipError):
    """More than two consecutive months are missing from a series."""


class Misaligned(BullwhipError):
    """Series that must share a period range do not."""


class NonPositiveDeflator(BullwhipError):
    """Price deflator contains a value <= 0."""


class MissingRate(BullwhipError):
    """No gross-margin rate configured for a stage."""


class OutOfRange(BullwhipError):
    """A requested period falls outside the available coverage."""


class SingularDesign(BullwhipError):
    """Regression design matrix is rank deficient."""


class NonConvergence(BullwhipError):
    """Optimizer hit its iteration budget; carries the best model so far."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class MissingForecast(BullwhipError):
    """A benchmark input lacks forecasts for an industry/kind."""


class ZeroActual(BullwhipError):
    """MAPE undefined because an actual value is exactly zero."""


class ZeroDemandVariance(BullwhipError):
    """Amplification ratio undefined: demand is constant on the window."""


class DivergenceDetected(BullwhipError):
    """Training loss became non-finite."""


class NonPositiveGenerated(BullwhipError):
    """Synthetic generator produced a value <= 0; raise the base level."""


class ManifestError(BullwhipError):
    """Run manifest is missing, malformed, or holds an invalid value."""
