"""Interaction strengths on the surface: constants and trigonometric polynomials."""

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np


@dataclass(frozen=True)
class FourierStrength:
    """Real trigonometric polynomial in the polar angle of a planar point.

    ``coefficients[m]`` is the Fourier coefficient of ``e^{i m theta}`` for
    ``m >= 0``; negative frequencies are the complex conjugates, so the
    function is real. ``2 + cos(theta)`` is ``(2, 0.5)``.
    """

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("empty coefficient list")
        if abs(coeffs[0].imag) > 0:
            raise ValueError("zeroth coefficient must be real")
        if not all(math.isfinite(abs(c)) for c in coeffs):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def is_constant(self):
        return all(c == 0 for c in self.coefficients[1:])

    def at_angle(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, self.coefficients[0].real)
        for m, c in enumerate(self.coefficients[1:], start=1):
            out = out + 2.0 * np.real(c * np.exp(1j * m * theta))
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.at_angle(np.arctan2(x[..., 1], x[..., 0]))

    def toeplitz_entry(self, d):
        """Coefficient of ``e^{i d theta}`` for any integer ``d``."""
        if abs(d) > self.degree:
            return 0.0
        c = self.coefficients[abs(d)]
        return c if d >= 0 else c.conjugate()


@dataclass(frozen=True)
class ConstantStrength:
    value: float

    @property
    def is_constant(self):
        return True

    def __call__(self, x):
        return np.full(np.asarray(x).shape[:-1], self.value)


def as_strength(value):
    """Normalize a number, coefficient sequence or callable to a callable on points."""
    if value is None:
        return None
    if isinstance(value, (ConstantStrength, FourierStrength)):
        return value
    if isinstance(value, Real):
        if not math.isfinite(value):
            raise ValueError("strength must be finite")
        return ConstantStrength(float(value))
    if callable(value):
        return value
    seq = tuple(value)
    if len(seq) == 1:
        return ConstantStrength(float(np.real(seq[0])))
    return FourierStrength(seq)


def constant_value(strength):
    """The value of a constant strength, or ``None`` if it is not constant."""
    s = as_strength(strength)
    if isinstance(s, ConstantStrength):
        return s.value
    if isinstance(s, FourierStrength) and s.is_constant:
        return s.coefficients[0].real
    return None
