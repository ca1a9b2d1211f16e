"""Error taxonomy shared across modules.

ConfigError maps to CLI exit code 2, BreachError (numerical invariant
violations, with a machine-readable report) to exit code 3.
"""


class ConfigError(ValueError):
    pass


class BreachError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = dict(report or {})


class SurfaceError(BreachError):
    """Invalid or degenerate graph surface."""


class ReductionError(BreachError):
    """Newton solve or operator assembly failure."""


class ActionError(BreachError):
    """Area level or critical-point search failure."""


class BarycenterError(BreachError):
    """Resampling or pairing-condition solve failure."""


class FlowError(BreachError):
    """Time stepping stagnation or surface invalidation."""
