"""Exception and warning types raised across the package."""


class BroadfocusError(Exception):
    """Base class for all package errors."""


class NonContiguousAtOrigin(BroadfocusError, ValueError):
    """The difference coarray has no lag 1, so no contiguous region exists."""


class DimensionMismatch(BroadfocusError, ValueError):
    """Array shapes disagree with the geometry or band plan."""


class GridMismatch(BroadfocusError, ValueError):
    """Spectra defined on different direction grids were combined."""


class IrrationalRatio(BroadfocusError, ValueError):
    """Two frequencies have no rational ratio within the allowed denominator."""


class InsufficientSupport(BroadfocusError, ValueError):
    """Resampling would need correlation lags outside the coarray support."""


class MissingLags(BroadfocusError, ValueError):
    """A correlation vector does not cover the lags an operation needs."""


class NonPositiveEigenvalueMagnitudes(BroadfocusError, ValueError):
    """Every eigenvalue magnitude is zero; information criteria are undefined."""


class ConvergenceFailure(BroadfocusError, ArithmeticError):
    """The eigensolver did not converge."""


class CountMismatch(BroadfocusError, ValueError):
    """Estimate and truth counts cannot be matched."""


class UnknownPreset(BroadfocusError, KeyError):
    """No preset scenario with the requested name."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown preset"


class ConfigError(BroadfocusError, ValueError):
    """Invalid scenario configuration.

    Parameters
    ----------
    message : str
        What is wrong.
    key : str, optional
        Dotted path of the offending key, e.g. ``"band.num_bands"``.
    line : int, optional
        Line number in the configuration file, when known.
    """

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class DegenerateSubspaceWarning(RuntimeWarning):
    """MUSIC denominator underflowed and was clamped at some grid points."""
