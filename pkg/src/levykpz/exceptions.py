"""Exception types raised across the package."""

from __future__ import annotations


class InvalidSymbolError(ValueError):
    """A symbol definition violates its structural invariants."""


class OutOfRangeError(ValueError):
    """A tabulated symbol was queried outside its sampled range."""


class ResolutionError(ValueError):
    """A kernel or field is not resolved by the grid."""


class InvalidDataError(ValueError):
    """Input data cannot be used (e.g. nonpositive values in a log fit)."""


class UndefinedNormalizationError(ValueError):
    """A normalized diagnostic was requested with a zero normalizer."""


class BlowUpError(RuntimeError):
    """The solution left the band allowed by the maximum principle."""

    def __init__(self, t: float, sup: float, bound: float):
        super().__init__(f"blow-up at t={t:.6g}: sup|u|={sup:.6g} exceeds {bound:.6g}")
        self.t = t
        self.sup = sup
        self.bound = bound


class StepControlError(RuntimeError):
    """A step produced non-finite values."""

    def __init__(self, t: float, message: str = "non-finite values"):
        super().__init__(f"step-control failure at t={t:.6g}: {message}")
        self.t = t


class HorizonTooLargeError(RuntimeError):
    """Picard iteration failed to contract on the requested horizon."""


class NoConvergenceError(RuntimeError):
    """Picard iteration hit its iteration cap before converging."""


class ConfigError(ValueError):
    """One or more problems found while parsing an experiment config.

    ``violations`` is a list of ``(line_number, message)`` pairs; the line
    number is 0 when the problem is not tied to a single line.
    """

    def __init__(self, violations: list[tuple[int, str]]):
        self.violations = list(violations)
        lines = [f"line {ln}: {msg}" if ln else msg for ln, msg in self.violations]
        super().__init__("; ".join(lines))
