"""Modified Bessel functions for real positive argument.

Integer orders ``I_k, K_k`` and the spherical pair ``i_l, k_l`` with

    i_l(x) = sqrt(pi / (2x)) I_{l+1/2}(x),
    k_l(x) = sqrt(pi / (2x)) K_{l+1/2}(x) = (pi / (2x)) e^{-x} sum_m ...,

so that ``k_0(x) = (pi / (2x)) e^{-x}`` and ``x^2 (i_l k_l' - i_l' k_l) = -pi/2``.

Everything is built from ratio sequences, which never overflow:

* ``I`` ratios come from the backward continued fraction (Miller's
  algorithm); absolute values are fixed by the identities
  ``e^x = I_0 + 2 sum_k I_k`` and ``e^x = sum_l (2l + 1) i_l``.
* ``K`` ratios come from the forward three-term recurrence, the stable
  direction for the recessive-at-infinity solution, started from ``K_0,
  K_1`` (power series for ``x <= 2``, trapezoid rule on the integral
  ``e^x K_nu(x) = int_0^inf exp(-2x sinh^2(t/2)) cosh(nu t) dt`` above)
  or from ``k_{-1} = k_0`` in the spherical case.

Values are accumulated as logarithms, so ``log_value`` is available even
where the value itself is not representable.

Derivative conventions::

    I_k' = I_{k-1} - (k/x) I_k = I_{k+1} + (k/x) I_k
    K_k' = -K_{k-1} - (k/x) K_k
    i_l' = i_{l-1} - ((l+1)/x) i_l = i_{l+1} + (l/x) i_l
    k_l' = -k_{l-1} - ((l+1)/x) k_l

The second form is used for ``I`` and ``i`` because both terms are
positive. Scaled variants multiply value and derivative by the same
factor: ``e^{-x}`` for ``I, i`` and ``e^{x}`` for ``K, k``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BesselRangeError

EULER_GAMMA = 0.57721566490153286061
_LOG_MAX = math.log(np.finfo(float).max)
_LOG_TINY = math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class BesselValue:
    """One evaluated Bessel function.

    Attributes
    ----------
    order : int
        Integer order ``k`` (or degree ``l`` for spherical functions).
    x : float
        Argument.
    value, derivative : float
        Function value and x-derivative, both multiplied by the scale
        factor when ``scaled`` is set.
    scaled : bool
        ``I, i`` carry ``e^{-x}``, ``K, k`` carry ``e^{x}``.
    log_value : float
        Natural log of the *unscaled* value.
    """

    order: int
    x: float
    value: float
    derivative: float
    scaled: bool
    log_value: float


def _check_args(order, x):
    if not (isinstance(order, (int, np.integer)) and order >= 0):
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    x = float(x)
    if not (x > 0.0 and math.isfinite(x)):
        raise ValueError(f"argument must be positive and finite, got {x!r}")
    return int(order), x


def _miller_length(count, x):
    # Backward start far enough that the truncation error of the continued
    # fraction and of the normalization sum is below rounding.
    return count + int(8.0 * math.sqrt(x)) + 40


def i_ratios(nu0, count, x):
    """Ratios ``I_{nu0+j} / I_{nu0+j-1}`` for ``j = 0..count``.

    Parameters
    ----------
    nu0 : float
        Base order, 0 or 1/2 in this package.
    count : int
        Highest ``j``.
    x : float
        Positive argument.

    Returns
    -------
    ndarray, shape (count + 1,)
        Entry ``j = 0`` is ``I_{nu0} / I_{nu0-1}``, equal to ``I_0 / I_1``
        for ``nu0 = 0`` and ``tanh x`` for ``nu0 = 1/2``.
    """
    return _i_ratios_full(nu0, count, x)[: count + 1]


def _i_ratios_full(nu0, count, x):
    top = _miller_length(count, x)
    out = np.empty(top + 1)
    two_over_x = 2.0 / x
    g = 0.0
    for mu in range(top, -1, -1):
        g = 1.0 / ((nu0 + mu) * two_over_x + g)
        out[mu] = g
    return out


def k_ratios(nu0, count, x):
    """Ratios ``K_{nu0+j} / K_{nu0+j-1}`` for ``j = 0..count``.

    Parameters
    ----------
    nu0 : float
        Base order, 0 or 1/2.
    count : int
        Highest ``j``.
    x : float
        Positive argument.

    Returns
    -------
    ndarray, shape (count + 1,)
        Entry ``j = 0`` is ``K_0 / K_1`` for ``nu0 = 0`` and exactly 1 for
        ``nu0 = 1/2``.
    """
    out = np.empty(count + 1)
    if nu0 == 0:
        k0, k1 = k0_k1_scaled(x)
        h = k0 / k1
    elif nu0 == 0.5:
        h = 1.0
    else:
        raise ValueError("base order must be 0 or 1/2")
    out[0] = h
    two_over_x = 2.0 / x
    for j in range(1, count + 1):
        h = 1.0 / h + (nu0 + j - 1) * two_over_x
        out[j] = h
    return out


def _i0_i1_series(x):
    t = 0.25 * x * x
    term0 = 1.0
    term1 = 0.5 * x
    s0 = term0
    s1 = term1
    j = 0
    while True:
        j += 1
        term0 *= t / (j * j)
        term1 *= t / (j * (j + 1))
        s0 += term0
        s1 += term1
        if term0 < 1e-18 * s0 and term1 < 1e-18 * s1:
            return s0, s1


def _k0_k1_series(x):
    t = 0.25 * x * x
    i0, i1 = _i0_i1_series(x)
    log_half = math.log(0.5 * x)
    # sum_j H_j t^j/(j!)^2 and sum_j (psi(j+1) + psi(j+2)) t^j/(j!(j+1)!)
    harmonic = 0.0
    term0 = 1.0
    term1 = 1.0
    sum0 = 0.0
    sum1 = (-EULER_GAMMA) + (1.0 - EULER_GAMMA)
    j = 0
    while True:
        j += 1
        harmonic += 1.0 / j
        term0 *= t / (j * j)
        term1 *= t / (j * (j + 1))
        a = harmonic * term0
        b = (2.0 * harmonic + 1.0 / (j + 1) - 2.0 * EULER_GAMMA) * term1
        sum0 += a
        sum1 += b
        if abs(a) < 1e-18 * abs(sum0) and abs(b) < 1e-18 * abs(sum1):
            break
    k0 = -(log_half + EULER_GAMMA) * i0 + sum0
    k1 = 1.0 / x + log_half * i1 - 0.25 * x * sum1
    return k0, k1


def _k0_k1_scaled_integral(x):
    # Trapezoid rule on a rapidly decaying entire integrand: the error is
    # exponentially small in 1/step.
    step = min(0.25, 0.4 / math.sqrt(x))
    upper = 2.0 * math.asinh(math.sqrt(25.0 / x))
    t = np.arange(0.0, upper + step, step)
    weight = np.exp(-2.0 * x * np.sinh(0.5 * t) ** 2)
    weight[0] *= 0.5
    return step * float(np.sum(weight)), step * float(np.sum(weight * np.cosh(t)))


def k0_k1_scaled(x):
    """Return ``(e^x K_0(x), e^x K_1(x))`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise ValueError("argument must be positive")
    if x <= 2.0:
        k0, k1 = _k0_k1_series(x)
        scale = math.exp(x)
        return k0 * scale, k1 * scale
    return _k0_k1_scaled_integral(x)


def log_i_sequence(count, x, spherical=False):
    """Natural logs of ``I_0..I_count`` (or ``i_0..i_count``) at ``x``.

    Parameters
    ----------
    count : int
        Highest order.
    x : float
        Positive argument.
    spherical : bool
        Return the spherical family ``i_l`` instead.

    Returns
    -------
    logs : ndarray, shape (count + 1,)
    ratios : ndarray, shape (count + 2,)
        ``ratios[j] = value_j / value_{j-1}``, including one order above
        ``count`` (used for derivatives).
    """
    nu0 = 0.5 if spherical else 0.0
    full = _i_ratios_full(nu0, count + 1, x)
    # relative sizes value_j / value_0 for the normalization identity
    rel = np.cumprod(full[1:])
    if spherical:
        weights = 2.0 * np.arange(1, rel.size + 1) + 1.0
        total = 1.0 + math.fsum(weights * rel)
    else:
        total = 1.0 + 2.0 * math.fsum(rel)
    log0 = x - math.log(total)
    logs = np.empty(count + 1)
    logs[0] = log0
    logs[1:] = log0 + np.cumsum(np.log(full[1 : count + 1]))
    return logs, full[: count + 2]


def log_k_sequence(count, x, spherical=False):
    """Natural logs of ``K_0..K_count`` (or ``k_0..k_count``) at ``x``.

    Returns
    -------
    logs : ndarray, shape (count + 1,)
    ratios : ndarray, shape (count + 1,)
        ``ratios[j] = value_j / value_{j-1}``.
    """
    if spherical:
        ratios = k_ratios(0.5, count, x)
        log0 = math.log(0.5 * math.pi / x) - x
    else:
        ratios = k_ratios(0.0, count, x)
        k0, _ = k0_k1_scaled(x)
        log0 = math.log(k0) - x
    logs = np.empty(count + 1)
    logs[0] = log0
    logs[1:] = log0 + np.cumsum(np.log(ratios[1:]))
    return logs, ratios


def _finish(name, order, x, log_value, log_scale, dlog, scaled):
    # dlog is the logarithmic derivative f'/f
    log_out = log_value + (log_scale if scaled else 0.0)
    log_deriv = log_out + math.log(abs(dlog))
    if max(log_out, log_deriv) > _LOG_MAX:
        hint = "use log_value via log_bessel" if scaled else "use scaled=True"
        raise BesselRangeError(
            f"{name}({order}, {x}) overflows double precision; {hint}"
        )
    if min(log_out, log_deriv) < _LOG_TINY:
        raise BesselRangeError(
            f"{name}({order}, {x}) underflows double precision; "
            "use log_value via log_bessel"
        )
    value = math.exp(log_out)
    return BesselValue(order, x, value, value * dlog, bool(scaled), log_value)


def log_bessel(family, order, x):
    """Natural log of an unscaled value; never overflows.

    Parameters
    ----------
    family : {"I", "K", "i", "k"}
    order : int
    x : float
    """
    order, x = _check_args(order, x)
    if family in ("I", "i"):
        logs, _ = log_i_sequence(order, x, spherical=family == "i")
    elif family in ("K", "k"):
        logs, _ = log_k_sequence(order, x, spherical=family == "k")
    else:
        raise ValueError(f"unknown family {family!r}")
    return float(logs[order])


def bessel_I(k, x, scaled=False):
    """Modified Bessel function of the first kind ``I_k(x)``.

    Parameters
    ----------
    k : int
        Order, ``k >= 0``.
    x : float
        Argument, ``x > 0``.
    scaled : bool
        Return ``e^{-x} I_k(x)`` and its matching derivative.

    Raises
    ------
    BesselRangeError
        If the requested (scaled or unscaled) value is not representable.
    """
    k, x = _check_args(k, x)
    logs, ratios = log_i_sequence(k, x)
    dlog = ratios[k + 1] + k / x
    return _finish("I", k, x, float(logs[k]), -x, dlog, scaled)


def bessel_K(k, x, scaled=False):
    """Modified Bessel function of the second kind ``K_k(x)``.

    Parameters
    ----------
    k : int
        Order, ``k >= 0``.
    x : float
        Argument, ``x > 0``.
    scaled : bool
        Return ``e^{x} K_k(x)`` and its matching derivative.
    """
    k, x = _check_args(k, x)
    logs, ratios = log_k_sequence(k, x)
    dlog = -1.0 / ratios[k] - k / x
    return _finish("K", k, x, float(logs[k]), x, dlog, scaled)


def spherical_i(l, x, scaled=False):
    """Spherical modified Bessel function ``i_l(x)``, e.g. ``i_0 = sinh(x)/x``."""
    l, x = _check_args(l, x)
    logs, ratios = log_i_sequence(l, x, spherical=True)
    dlog = ratios[l + 1] + l / x
    return _finish("i", l, x, float(logs[l]), -x, dlog, scaled)


def spherical_k(l, x, scaled=False):
    """Spherical modified Bessel function ``k_l(x)``, e.g. ``k_0 = (pi/2x) e^{-x}``."""
    l, x = _check_args(l, x)
    logs, ratios = log_k_sequence(l, x, spherical=True)
    dlog = -1.0 / ratios[l] - (l + 1) / x
    return _finish("k", l, x, float(logs[l]), x, dlog, scaled)
