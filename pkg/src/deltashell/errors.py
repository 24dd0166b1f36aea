"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so each class corresponds to one kind
of failure a user can act on.
"""


class DeltaShellError(Exception):
    """Base class for all package errors."""


class ConfigError(DeltaShellError, ValueError):
    """Invalid or incomplete experiment configuration."""


class EllipticityError(DeltaShellError, ValueError):
    """Coefficient field is not uniformly elliptic at some sampled point."""


class AdmissibilityError(DeltaShellError, ValueError):
    """An interface operator is not invertible (0 is not in the resolvent set).

    Parameters
    ----------
    message : str
        Human readable reason.
    mode : int, optional
        Offending mode index.
    min_shift : float, optional
        Smallest shift root ``m0`` that restores admissibility, when known.
    """

    def __init__(self, message, mode=None, min_shift=None):
        super().__init__(message)
        self.mode = mode
        self.min_shift = min_shift


class BesselRangeError(DeltaShellError, OverflowError):
    """Requested Bessel value is not representable in double precision."""


class QuadratureError(DeltaShellError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""
