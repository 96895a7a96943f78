"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so solver and data code should
raise the most specific class that applies.
"""


class HiersvmError(Exception):
    """Base class for all package errors."""


class InputError(HiersvmError, ValueError):
    """Malformed or inconsistent caller-supplied data (shapes, labels, files)."""


class ConfigError(HiersvmError, ValueError):
    """Invalid solver or run configuration (step sizes, radii, schedules)."""


class DegeneratePairError(InputError):
    """A pairwise operation was requested for classes with w_r == w_s."""


class UnsupportedDimensionError(InputError):
    """Operation only defined for a specific feature dimension (e.g. 2-D plots)."""


class DivergenceError(HiersvmError, RuntimeError):
    """Iterates left the finite range or the objective blew up."""


class InternalError(HiersvmError, RuntimeError):
    """Numerical state that should be impossible (e.g. an SPD factorization failing)."""
