"""Fit asymptotic constants and remainder rates to computed spectra."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

MIN_WINDOW = 50
DISK_WINDOW = (500, 4000)
BALL_DEGREES = (300, 2000)
SLOPE_SLACK = 0.15


@dataclass(frozen=True)
class FitReport:
    """Result of :func:`fit_constant`.

    Attributes
    ----------
    exponent : float
        ``p`` in ``y_j = j^p s_j``.
    C_est : float
        Intercept of ``y_j`` against ``j^{-1/(n-1)}``.
    C_ref : float or None
        Reference constant.
    rel_error : float or None
        ``|C_est - C_ref| / C_ref``.
    remainder_slope : float or None
        Slope of ``log |y_j - C_ref|`` against ``log j``.
    window : (int, int)
        Inclusive 1-based flat index range.
    stderr : float
        Standard error of the intercept (0 for the median fallback).
    method : {"regression", "median"}
    verdict : dict
        Named pass/fail flags, filled in when tolerances are supplied.
    """

    exponent: float
    C_est: float
    C_ref: float | None
    rel_error: float | None
    remainder_slope: float | None
    window: tuple
    stderr: float
    method: str
    n: int
    verdict: dict = field(default_factory=dict)

    def as_dict(self):
        out = asdict(self)
        out["window"] = list(self.window)
        return out


def degree_window(l_min, l_max):
    """Flat index range covering spherical degrees ``l_min..l_max`` (multiplicity ``2l+1``)."""
    return (l_min * l_min + 1, (l_max + 1) ** 2)


def default_window(spectrum_or_length, n):
    """Built-in windows, clipped to the spectrum length.

    Disk ``[500, 4000]``; ball degrees ``300..2000``. Short spectra fall
    back to their upper 7/8.
    """
    length = spectrum_or_length if isinstance(spectrum_or_length, int) else len(spectrum_or_length)
    lo, hi = DISK_WINDOW if n == 2 else degree_window(*BALL_DEGREES)
    hi = min(hi, length)
    if hi - lo + 1 < MIN_WINDOW:
        lo = max(1, length // 8)
    return (lo, hi)


def _flat_values(spectrum):
    if not isinstance(spectrum, np.ndarray) and hasattr(spectrum, "flat"):
        return np.asarray(spectrum.flat, dtype=float), spectrum.n
    return np.asarray(spectrum, dtype=float), None


def fit_constant(spectrum, p, window=None, c_ref=None, rel_tol=None, n=None):
    """Estimate ``C`` in ``s_j ~ C j^{-p}`` by extrapolation.

    ``y_j = j^p s_j`` is regressed linearly on ``j^{-1/(n-1)}`` and the
    intercept is returned. The window median is used if the regression is
    ill-conditioned.

    Parameters
    ----------
    spectrum : SingularSpectrum or array_like
        Descending singular values ``s_1, s_2, ...``.
    p : float
        Decay exponent, ``p > 0``.
    window : (int, int), optional
        Inclusive 1-based range; defaults to :func:`default_window`.
    c_ref : float, optional
        Reference constant for the error and remainder slope.
    rel_tol : float, optional
        Adds ``verdict["constant"]``.
    n : int, optional
        Ambient dimension, required for plain arrays.

    Raises
    ------
    ValueError
        If the window is outside the spectrum, shorter than 50 points, or
        the spectrum vanishes while ``c_ref`` does not.
    """
    s, dim = _flat_values(spectrum)
    n = n or dim
    if n not in (2, 3):
        raise ValueError("dimension n must be 2 or 3")
    if not p > 0:
        raise ValueError("exponent must be positive")
    j_min, j_max = window if window is not None else default_window(s.size, n)
    j_min, j_max = int(j_min), int(j_max)
    if j_min < 1 or j_max > s.size or j_max < j_min:
        raise ValueError(f"window [{j_min}, {j_max}] outside spectrum of length {s.size}")
    if j_max - j_min + 1 < MIN_WINDOW:
        raise ValueError(f"window [{j_min}, {j_max}] shorter than {MIN_WINDOW} points")
    j = np.arange(j_min, j_max + 1, dtype=float)
    y = j**p * s[j_min - 1 : j_max]
    if not np.any(y) and c_ref:
        raise ValueError("spectrum vanishes but the reference constant does not")

    z = j ** (-1.0 / (n - 1))
    design = np.stack([np.ones_like(z), z], axis=1)
    method = "regression"
    stderr = 0.0
    spread = (z.max() - z.min()) / z.mean()
    if spread > 1e-6 and np.all(np.isfinite(y)):
        coef, _, rank, sv = np.linalg.lstsq(design, y, rcond=None)
        if rank < 2 or sv[-1] / sv[0] < 1e-10:
            method = "median"
    else:
        method = "median"
    if method == "regression":
        c_est = float(coef[0])
        dof = y.size - 2
        resid = y - design @ coef
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.inv(design.T @ design)
        stderr = math.sqrt(max(cov[0, 0], 0.0))
    else:
        c_est = float(np.median(y))

    rel_error = slope = None
    verdict = {}
    if c_ref is not None:
        c_ref = float(c_ref)
        if c_ref != 0:
            rel_error = abs(c_est - c_ref) / abs(c_ref)
        else:
            rel_error = abs(c_est)
        dev = np.abs(y - c_ref)
        mask = dev > 0
        if mask.sum() >= 2:
            slope = float(np.polyfit(np.log(j[mask]), np.log(dev[mask]), 1)[0])
        if rel_tol is not None:
            verdict["constant"] = bool(rel_error <= rel_tol)
    return FitReport(float(p), c_est, c_ref, rel_error, slope, (j_min, j_max), stderr,
                     method, int(n), verdict)


def check_remainder_order(report, expected_slope):
    """Pass iff the measured remainder slope is at most ``expected_slope + 0.15``."""
    if report.C_ref is None:
        raise ValueError("remainder check needs a reference constant")
    if report.remainder_slope is None:
        return False
    return bool(report.remainder_slope <= expected_slope + SLOPE_SLACK)
