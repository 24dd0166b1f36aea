"""Principal symbols at a boundary point.

Given boundary-adapted coefficients ``a_nn, b(xi'), c(xi')`` the interior
principal symbol factors as

    a_nn xi_n^2 + 2 b xi_n + c = a_nn (kappa_+ + i xi_n)(kappa_- - i xi_n),
    kappa_0 = sqrt(a_nn c - b^2),  kappa_pm = (kappa_0 +- i b) / a_nn.

From these follow the Poisson kernels, the Dirichlet-to-Neumann and
Neumann-to-Dirichlet symbols and the principal symbols of the resolvent
differences. All functions broadcast over leading array dimensions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EllipticityError
from .kinds import Kind, as_kind

# kappa_0^2 below this fraction of a_nn * c is treated as an ellipticity failure
ELLIPTICITY_GUARD = 1e-14


@dataclass(frozen=True)
class LocalSymbolData:
    """Factorization data at ``(x', xi')``.

    Attributes
    ----------
    a_nn, b, c : ndarray
        ``b`` and ``c`` are already evaluated at ``xi'``.
    kappa0 : ndarray
        ``sqrt(a_nn c - b^2) > 0``.
    kappa_plus, kappa_minus : ndarray (complex)
        Complex conjugate roots with real part ``kappa0 / a_nn``.
    xi : ndarray
        Cotangent vector the data were evaluated at.
    """

    a_nn: np.ndarray
    b: np.ndarray
    c: np.ndarray
    kappa0: np.ndarray
    kappa_plus: np.ndarray
    kappa_minus: np.ndarray
    xi: np.ndarray


def _as_cotangent(local, xi):
    xi = np.asarray(xi, dtype=float)
    dim = local.b.shape[-1]
    if dim == 1 and (xi.ndim == 0 or xi.shape[-1] != 1):
        xi = xi[..., None]
    if np.any(np.linalg.norm(xi, axis=-1) == 0):
        raise ValueError("cotangent vector must be non-zero")
    return xi


def kappa(local, xi):
    """Factorization data for ``local`` at cotangent vector(s) ``xi``.

    Parameters
    ----------
    local : LocalQuadraticData
    xi : array_like
        Shape ``(..., n - 1)``; for ``n = 2`` plain scalars are accepted.

    Raises
    ------
    EllipticityError
        If ``a_nn c - b^2 <= 1e-14 a_nn c`` anywhere.
    """
    xi = _as_cotangent(local, xi)
    a_nn = np.asarray(local.a_nn, dtype=float)
    # add trailing axes so batched data broadcast against batched directions
    extra = xi.ndim - 1 - a_nn.ndim
    a = a_nn.reshape(a_nn.shape + (1,) * max(extra, 0))
    bvec = local.b.reshape(local.b.shape[:-1] + (1,) * max(extra, 0) + local.b.shape[-1:])
    cmat = local.c.reshape(local.c.shape[:-2] + (1,) * max(extra, 0) + local.c.shape[-2:])
    b = np.einsum("...i,...i->...", bvec, xi)
    c = np.einsum("...i,...ij,...j->...", xi, cmat, xi)
    disc = a * c - b * b
    if np.any(disc <= ELLIPTICITY_GUARD * a * c) or np.any(a <= 0):
        raise EllipticityError("a_nn c(xi') - b(xi')^2 is not positive")
    k0 = np.sqrt(disc)
    kp = (k0 + 1j * b) / a
    return LocalSymbolData(a * np.ones_like(k0), b, c, k0, kp, np.conj(kp), xi)


def principal_symbol(sym, xi_n):
    """Full principal symbol ``a_nn xi_n^2 + 2 b xi_n + c``."""
    return sym.a_nn * xi_n**2 + 2.0 * sym.b * xi_n + sym.c


def factorized_symbol(sym, xi_n):
    """Right side of the factorization ``a_nn (kappa_+ + i xi_n)(kappa_- - i xi_n)``."""
    return sym.a_nn * (sym.kappa_plus + 1j * xi_n) * (sym.kappa_minus - 1j * xi_n)


def poisson_principal_kernels(sym, side):
    """Principal Poisson kernels as functions of the normal distance ``x_n >= 0``.

    Parameters
    ----------
    sym : LocalSymbolData
    side : {"+", "-"}
        Exterior side uses ``kappa_+``, interior side ``kappa_-``.

    Returns
    -------
    (callable, callable)
        Dirichlet kernel ``exp(-kappa x_n)`` and Neumann kernel
        ``exp(-kappa x_n) / kappa0``.
    """
    if side in ("+", 1, "plus"):
        k = sym.kappa_plus
    elif side in ("-", -1, "minus"):
        k = sym.kappa_minus
    else:
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    k0 = sym.kappa0

    def dirichlet(x_n):
        return np.exp(-k * np.asarray(x_n, dtype=float))

    def neumann(x_n):
        return np.exp(-k * np.asarray(x_n, dtype=float)) / k0

    return dirichlet, neumann


def dtn_ntd_principal(sym):
    """Dirichlet-to-Neumann and Neumann-to-Dirichlet symbols ``(kappa0, 1/kappa0)``.

    The same on both sides.
    """
    return sym.kappa0, 1.0 / sym.kappa0


def composition_principal(sym):
    """Symbols of ``K*K`` for the Dirichlet and Neumann Poisson operators.

    Returns ``(a_nn / (2 kappa0), a_nn / (2 kappa0^3))`` for one side.
    """
    k0 = sym.kappa0
    return sym.a_nn / (2.0 * k0), sym.a_nn / (2.0 * k0**3)


def operator_principal_symbol(kind, sym, strength=None):
    """Principal symbol of a resolvent difference, both sides included.

    Parameters
    ----------
    kind : Kind or str
        ``delta_vs_free`` gives ``a_nn alpha / (4 kappa0^3)``,
        ``deltaprime_vs_free`` gives ``a_nn / (2 kappa0^2)`` (independent
        of beta), ``deltaprime_vs_neumann`` gives ``a_nn / (beta kappa0^3)``.
    sym : LocalSymbolData
    strength : float or ndarray
        ``alpha`` or ``beta`` at the base point.

    Raises
    ------
    ValueError
        For ``neumann_vs_free`` (not covered here), a missing strength, or
        ``beta = 0`` in ``deltaprime_vs_neumann``.
    """
    kind = as_kind(kind)
    k0 = sym.kappa0
    if kind is Kind.DELTA_VS_FREE:
        if strength is None:
            raise ValueError("alpha required for delta_vs_free")
        return sym.a_nn * np.asarray(strength, dtype=float) / (4.0 * k0**3)
    if kind is Kind.DELTAPRIME_VS_FREE:
        return sym.a_nn / (2.0 * k0**2)
    if kind is Kind.DELTAPRIME_VS_NEUMANN:
        if strength is None or np.any(np.asarray(strength) == 0):
            raise ValueError("beta required and non-zero")
        return sym.a_nn / (np.asarray(strength, dtype=float) * k0**3)
    raise ValueError(f"no principal symbol formula for {kind.value}")
