"""Exception hierarchy for the pack imbalance simulator."""


class PackSimError(Exception):
    """Base class for all simulator errors."""


class SocDomainError(PackSimError):
    """An SOC value fell outside [0, 1] (beyond the roundoff tolerance)."""

    def __init__(self, soc: float, cell: str | None = None, time_h: float | None = None):
        self.soc = soc
        self.cell = cell
        self.time_h = time_h
        where = f" for cell {cell}" if cell else ""
        when = f" at t={time_h} h" if time_h is not None else ""
        super().__init__(f"SOC {soc} outside [0, 1]{where}{when}")


class TimeDomainError(PackSimError):
    """A negative time was passed to a closed-form trajectory."""


class UnsupportedModelError(PackSimError):
    """An operation defined only for affine OCV was called with another model."""


class FitError(PackSimError):
    """Piecewise-affine fitting produced a non-monotone segment."""


class OcvTableError(PackSimError):
    """A tabulated OCV file failed strict parsing (non-monotone, bad header...)."""


class NonTerminationError(PackSimError):
    """An integration run exceeded max_steps without hitting its termination."""

    def __init__(self, message: str, time_h: float | None = None):
        self.time_h = time_h
        super().__init__(message)


class ProtocolError(PackSimError):
    """A protocol segment failed; carries the offending step index."""

    def __init__(self, step_index: int, cause: Exception):
        self.step_index = step_index
        self.cause = cause
        super().__init__(f"protocol step {step_index} failed: {cause}")


class SeriesStructureError(PackSimError):
    """A time series lacks the leg a summary operation asked for."""


class ConfigError(PackSimError):
    """Config validation failure; message carries the field path."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")
