"""Exception hierarchy shared by all modules."""


class MacroqError(Exception):
    """Base class for errors raised by macroq."""


class DomainError(MacroqError, ValueError):
    """An input lies outside the domain where a formula is defined."""


class TruncationError(MacroqError):
    """A series cannot meet its tail tolerance within the allowed number of terms."""

    def __init__(self, message, required_terms=None, cap=None, dropped_bound=None):
        super().__init__(message)
        self.required_terms = required_terms
        self.cap = cap
        self.dropped_bound = dropped_bound


class SamplingError(MacroqError):
    """A distribution cannot be sampled (for example, it is identically zero)."""


class ResolutionError(MacroqError):
    """An evaluation grid is too coarse to resolve the feature being measured."""


class UnitMismatchError(MacroqError, ValueError):
    """Two quantities with incompatible units were compared or combined."""


class ConfigError(MacroqError, ValueError):
    """A configuration or plan file does not match its schema.

    ``path`` names the offending key, e.g. ``"plan.grating.phi0"``.
    """

    def __init__(self, message, path=None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
