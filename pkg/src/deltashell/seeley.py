"""Weyl-type constants for negative-order operators on the surface.

For a classical operator of order ``-t`` on an ``(n-1)``-dimensional closed
surface with principal symbol ``p0`` the singular values behave like
``s_k ~ C k^{-t/(n-1)}`` with ``C = c^{t/(n-1)}`` and

    c = 1/((n-1)(2 pi)^{n-1}) int_surface int_{|xi'|=1} |p0|^{(n-1)/t} d omega d sigma.

For ``n = 2`` the unit sphere of directions is the two points ``+-1``; for
``n = 3`` it is the unit circle of the tangent plane.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AdmissibilityError
from .geometry import check_ellipticity, frame_at, measure_weight, transform_to_frame
from .kinds import Kind, as_kind
from .quadrature import adaptive_gauss, periodic_trapezoid
from .strengths import as_strength, constant_value
from .symbols import kappa, operator_principal_symbol

LITTLE_O = "little_o"
BIG_O_ONE_BETTER = "big_O_one_better"

# tolerance used when the integrand has a root-type kink at zeros of alpha
KINK_RTOL = 1e-8


@dataclass(frozen=True)
class AsymptoticLaw:
    """Predicted singular-value law ``s_k ~ constant * k^{-exponent}``.

    Attributes
    ----------
    kind : str
    n : int
    order : float
        ``t``; the operator has order ``-t``.
    exponent : float
        ``t / (n - 1)``.
    c_prime : float
        The symbol integral ``c(P)``.
    constant : float
        ``c_prime ** exponent``.
    remainder_class : {"little_o", "big_O_one_better"}
    """

    kind: str
    n: int
    order: float
    exponent: float
    c_prime: float
    constant: float
    remainder_class: str

    def as_dict(self):
        return {"kind": self.kind, "n": self.n, "order": self.order,
                "exponent": self.exponent, "C_prime": self.c_prime,
                "C": self.constant, "remainder_class": self.remainder_class}


def _unit_directions(n, omega=None):
    if n == 2:
        return np.array([[1.0], [-1.0]])
    return np.stack([np.cos(omega), np.sin(omega)], axis=-1)


def _check_homogeneity(p0, t, surface, coeffs):
    params = surface.sample_parameters(2)[::3]
    frame = frame_at(surface, params)
    local = transform_to_frame(coeffs, frame)
    dirs = _unit_directions(surface.n, np.array([0.3, 1.9, 4.1]))
    dirs = np.broadcast_to(dirs, frame.point.shape[:-1] + dirs.shape)
    base = np.asarray(p0(frame, local, dirs), dtype=float)
    for s in (0.5, 3.0):
        scaled = np.asarray(p0(frame, local, s * dirs), dtype=float)
        if not np.allclose(scaled, s ** (-t) * base, rtol=1e-8, atol=1e-300):
            raise ValueError(f"symbol is not homogeneous of degree {-t} in xi'")


def seeley_constant(p0, t, surface, coeffs, rtol=1e-10, breakpoints=(), graded=False):
    """Symbol integral ``c(P)`` by adaptive quadrature.

    Parameters
    ----------
    p0 : callable
        ``p0(frame, local, xi)`` with batched ``frame`` and ``local`` of
        leading shape ``S`` and directions ``xi`` of shape ``S + (q, n-1)``;
        returns values of shape ``S + (q,)``.
    t : float
        Positive order; ``p0`` must be homogeneous of degree ``-t``.
    surface : Hypersurface
    coeffs : CoefficientField
    rtol : float
        Relative tolerance of the adaptive rules.
    breakpoints : sequence of float
        Curve parameters where the integrand has kinks (``n = 2`` only).
    graded : bool
        Cluster nodes at both ends of every sub-interval with the smooth map
        ``u -> u^3 / (u^3 + (1-u)^3)``. Removes the algebraic endpoint
        behaviour produced by ``|alpha|^{1/3}`` at simple or double zeros.

    Raises
    ------
    ValueError
        If ``t <= 0`` or the homogeneity check fails.
    """
    if not t > 0:
        raise ValueError("order t must be positive")
    _check_homogeneity(p0, t, surface, coeffs)
    n = surface.n
    power = (n - 1) / t
    norm = 1.0 / ((n - 1) * (2.0 * math.pi) ** (n - 1))

    if n == 2:
        def integrand(theta):
            frame = frame_at(surface, theta)
            local = transform_to_frame(coeffs, frame)
            dirs = np.broadcast_to(_unit_directions(2), theta.shape + (2, 1))
            vals = np.abs(np.asarray(p0(frame, local, dirs))) ** power
            return vals.sum(axis=-1) * measure_weight(surface, theta)

        cuts = sorted({0.0, 2.0 * math.pi} | {float(b) % (2.0 * math.pi) for b in breakpoints})
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi - lo <= 0:
                continue
            if graded:
                total += adaptive_gauss(_graded(integrand, lo, hi), 0.0, 1.0, rtol)
            else:
                total += adaptive_gauss(integrand, lo, hi, rtol)
        return norm * total

    if breakpoints:
        raise ValueError("breakpoints are only supported on curves")

    def direction_integral(params):
        # params shape (..., 2) -> int over the unit circle of |p0|^power
        frame = frame_at(surface, params)
        local = transform_to_frame(coeffs, frame)

        def on_circle(omega):
            dirs = _unit_directions(3, omega)
            dirs = np.broadcast_to(dirs, params.shape[:-1] + dirs.shape)
            return np.abs(np.asarray(p0(frame, local, dirs))) ** power

        return periodic_trapezoid(on_circle, rtol=0.1 * rtol)

    def over_phi(phi):
        def over_theta(theta):
            P, T = np.meshgrid(phi, theta, indexing="ij")
            params = np.stack([P, T], axis=-1)
            return direction_integral(params) * measure_weight(surface, params)

        return adaptive_gauss(over_theta, 0.0, 2.0 * math.pi, rtol, initial_panels=2)

    return norm * adaptive_gauss(over_phi, 0.0, math.pi, rtol, initial_panels=2)


def _graded(f, lo, hi):
    width = hi - lo

    def g(u):
        u3 = u**3
        v3 = (1.0 - u) ** 3
        den = u3 + v3
        psi = u3 / den
        dpsi = 3.0 * u * u * (1.0 - u) ** 2 / den**2
        return f(lo + width * psi) * (width * dpsi)

    return g


def strength_zeros(strength, surface, samples=4096):
    """Curve parameters where a strength vanishes (sign changes and touching zeros)."""
    if surface.n != 2:
        raise ValueError("zero location is only implemented on curves")

    def g(theta):
        return np.asarray(strength(frame_at(surface, np.asarray(theta)).point), dtype=float)

    theta = np.arange(samples) * (2.0 * math.pi / samples)
    vals = g(theta)
    scale = float(np.abs(vals).max())
    if scale == 0.0:
        return []
    zeros = []
    for i in range(samples):
        a, b = theta[i], theta[i] + 2.0 * math.pi / samples
        va, vb = vals[i], vals[(i + 1) % samples]
        if va == 0.0:
            zeros.append(a)
        elif va * vb < 0.0:
            zeros.append(optimize.brentq(lambda s: float(g(s)), a, b, xtol=1e-15))
    # touching zeros: local minima of |alpha| that get close to zero
    absv = np.abs(vals)
    for i in range(samples):
        prev, nxt = absv[i - 1], absv[(i + 1) % samples]
        if absv[i] < prev and absv[i] <= nxt and absv[i] < 1e-3 * scale:
            if vals[i - 1] * vals[(i + 1) % samples] <= 0:
                continue  # already bracketed as a sign change
            h = 2.0 * math.pi / samples
            res = optimize.minimize_scalar(lambda s: abs(float(g(s))),
                                           bounds=(theta[i] - h, theta[i] + h),
                                           method="bounded", options={"xatol": 1e-12})
            if abs(res.fun) <= 1e-10 * scale:
                zeros.append(float(res.x))
    return sorted(z % (2.0 * math.pi) for z in zeros)


def _strength_grid(strength, surface):
    frame = frame_at(surface, surface.sample_parameters(64))
    return np.asarray(strength(frame.point), dtype=float)


def predict(kind, surface, coeffs, strength=None, rtol=1e-10):
    """Asymptotic law of a resolvent difference from its principal symbol.

    Parameters
    ----------
    kind : Kind or str
        ``delta_vs_free``, ``deltaprime_vs_free`` or ``deltaprime_vs_neumann``.
    surface : Hypersurface
    coeffs : CoefficientField
    strength : float, sequence or callable
        ``alpha`` for the delta kind, ``beta`` for the delta-prime kinds
        (ignored by ``deltaprime_vs_free`` apart from the non-vanishing check).
    rtol : float
        Quadrature tolerance, relaxed to ``1e-8`` when ``alpha`` has zeros.

    Returns
    -------
    AsymptoticLaw

    Raises
    ------
    AdmissibilityError
        If ``beta`` is missing or vanishes somewhere on the sample grid.
    """
    kind = as_kind(kind)
    if kind is Kind.NEUMANN_VS_FREE:
        raise ValueError("no symbol-based prediction for neumann_vs_free")
    check_ellipticity(coeffs, surface)
    f = as_strength(strength)
    n = surface.n
    t = kind.order
    remainder = BIG_O_ONE_BETTER
    breakpoints = []
    graded = False
    if kind.uses_beta:
        if f is None:
            raise AdmissibilityError("beta required and non-zero")
        grid = _strength_grid(f, surface)
        if np.any(grid == 0) or grid.min() * grid.max() < 0:
            raise AdmissibilityError("beta must not vanish on the surface")
    else:
        if f is None:
            raise ValueError("alpha required for delta_vs_free")
        grid = _strength_grid(f, surface)
        if not np.any(grid):
            return AsymptoticLaw(kind.value, n, t, t / (n - 1), 0.0, 0.0, LITTLE_O)
        vanishes = np.any(grid == 0) or grid.min() * grid.max() < 0
        if n == 2 and constant_value(f) is None:
            breakpoints = strength_zeros(f, surface)
            vanishes = vanishes or bool(breakpoints)
        if vanishes:
            remainder = LITTLE_O
            rtol = max(rtol, KINK_RTOL)
            graded = n == 2

    def p0(frame, local, xi):
        sym = kappa(local, xi)
        s = None if f is None else np.asarray(f(frame.point), dtype=float)[..., None]
        return operator_principal_symbol(kind, sym, s)

    c_prime = seeley_constant(p0, t, surface, coeffs, rtol=rtol,
                              breakpoints=breakpoints, graded=graded)
    exponent = t / (n - 1)
    return AsymptoticLaw(kind.value, n, t, exponent, c_prime, c_prime**exponent, remainder)


def laplacian_closed_form(kind, surface, strength=None, coeffs=None):
    """Closed-form constants for ``-Delta + m0^2`` with constant strength.

    Returns
    -------
    (float, float)
        ``(C_prime, C)``.

    Raises
    ------
    ValueError
        For non-Laplacian coefficients, a non-constant strength or the
        ``neumann_vs_free`` kind.
    """
    kind = as_kind(kind)
    if coeffs is not None and not coeffs.is_laplacian:
        raise ValueError("closed forms hold for the Laplacian family only")
    n = surface.n
    sphere_measure = 2.0 if n == 2 else 2.0 * math.pi
    base = sphere_measure * surface.area() / ((n - 1) * (2.0 * math.pi) ** (n - 1))
    value = constant_value(strength) if strength is not None else None
    if kind is Kind.DELTA_VS_FREE:
        if value is None:
            raise ValueError("closed form needs a constant alpha")
        c_prime = base * abs(value) ** ((n - 1) / 3) / 4.0 ** ((n - 1) / 3)
    elif kind is Kind.DELTAPRIME_VS_FREE:
        c_prime = base / 2.0 ** ((n - 1) / 2)
    elif kind is Kind.DELTAPRIME_VS_NEUMANN:
        if not value:
            raise ValueError("closed form needs a constant non-zero beta")
        c_prime = base * abs(value) ** (-(n - 1) / 3)
    else:
        raise ValueError("no closed form for neumann_vs_free")
    return c_prime, c_prime ** (kind.order / (n - 1))
