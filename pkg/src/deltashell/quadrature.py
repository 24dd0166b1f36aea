"""Adaptive composite Gauss-Legendre and periodic trapezoid rules."""

import numpy as np

from .errors import QuadratureError

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)
MAX_PANELS = 1 << 16


def _panel_rule(f, lo, hi):
    # 16-point rule on every panel at once; the integrand may return extra
    # leading axes, integration runs along the last one.
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(x.ravel()))
    vals = vals.reshape(vals.shape[:-1] + x.shape)
    return np.sum(vals * _WEIGHTS, axis=-1) * half


def adaptive_gauss(f, a, b, rtol=1e-10, atol=0.0, initial_panels=8, max_levels=40):
    """Integrate ``f`` over ``[a, b]`` by bisection of 16-point Gauss panels.

    A panel is accepted once its estimate agrees with the sum over its two
    halves to within its length share of ``max(rtol * |I|, atol)``.

    Parameters
    ----------
    f : callable
        Vectorized: nodes of shape ``(m,)`` to values ``(..., m)``. Vector
        valued integrands are integrated componentwise and every component
        must converge.
    a, b : float
        Interval.
    rtol, atol : float
        Relative and absolute tolerances.
    initial_panels : int
        Panels before the first refinement.
    max_levels : int
        Maximum bisection depth.

    Raises
    ------
    QuadratureError
        If the depth limit is hit or more than ``MAX_PANELS`` panels are
        active at once (typical for a vanishing component with ``atol=0``).

    Returns
    -------
    float or ndarray
    """
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    coarse = _panel_rule(f, lo, hi)
    accepted = np.zeros(coarse.shape[:-1])
    length = b - a
    for _ in range(max_levels):
        mid = 0.5 * (lo + hi)
        both = _panel_rule(f, np.concatenate([lo, mid]), np.concatenate([mid, hi]))
        m = lo.size
        left, right = both[..., :m], both[..., m:]
        fine = left + right
        total = accepted + fine.sum(axis=-1)
        scale = np.maximum(rtol * np.abs(total), atol)
        share = (hi - lo) / length
        err = np.abs(fine - coarse)
        ok = np.all(err <= scale[..., None] * share + 1e-300, axis=tuple(range(err.ndim - 1)))
        accepted = accepted + fine[..., ok].sum(axis=-1)
        if np.all(ok):
            return accepted if accepted.ndim else float(accepted)
        keep = ~ok
        if 2 * keep.sum() > MAX_PANELS:
            raise QuadratureError(f"adaptive quadrature needs more than {MAX_PANELS} panels "
                                  f"on [{a}, {b}]; set atol for vanishing integrals")
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[..., keep], right[..., keep]], axis=-1)
    raise QuadratureError(f"adaptive quadrature did not reach rtol={rtol:g} on [{a}, {b}]")


def periodic_trapezoid(f, rtol=1e-12, start=64, max_points=1 << 14):
    """Mean of a smooth ``2 pi``-periodic function times ``2 pi``.

    Doubles the number of equispaced points until two successive rules
    agree to ``rtol``. ``f`` maps angles ``(m,)`` to values ``(..., m)``.
    """
    m = start
    angles = np.arange(m) * (2.0 * np.pi / m)
    vals = np.asarray(f(angles))
    prev = 2.0 * np.pi * vals.mean(axis=-1)
    while m < max_points:
        extra = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
        vals_extra = np.asarray(f(extra))
        cur = 0.5 * (prev + 2.0 * np.pi * vals_extra.mean(axis=-1))
        m *= 2
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur) + 1e-300):
            return cur
        prev = cur
    raise QuadratureError("periodic trapezoid rule did not converge")
