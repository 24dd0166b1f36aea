"""Closed hypersurfaces, boundary frames and coefficient fields.

The stored unit normal points out of the bounded interior domain and into
the unbounded exterior. Conormal derivatives taken from the exterior side
use the opposite sign at the point of use.

All frame quantities are vectorized: a parameter array of shape ``(...)``
(circle, ellipse) or ``(..., 2)`` (sphere: colatitude, azimuth) produces
frames with the same leading shape.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EllipticityError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Hypersurface:
    """Parametrized closed curve or surface.

    Use the constructors :meth:`circle`, :meth:`ellipse` and :meth:`sphere`.

    Attributes
    ----------
    shape : {"circle", "ellipse", "sphere"}
    n : int
        Ambient dimension.
    R : float
        Radius (circle, sphere); for the ellipse the larger semi-axis.
    a, b : float
        Semi-axes along x and y (equal to ``R`` for circle and sphere).
    """

    shape: str
    n: int
    R: float
    a: float
    b: float

    def __post_init__(self):
        if self.shape not in ("circle", "ellipse", "sphere"):
            raise ValueError(f"unknown shape {self.shape!r}")
        for name in ("R", "a", "b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        expected = 3 if self.shape == "sphere" else 2
        if self.n != expected:
            raise ValueError(f"{self.shape} lives in dimension {expected}, not {self.n}")

    @classmethod
    def circle(cls, R=1.0):
        return cls("circle", 2, float(R), float(R), float(R))

    @classmethod
    def ellipse(cls, a, b):
        return cls("ellipse", 2, float(max(a, b)), float(a), float(b))

    @classmethod
    def sphere(cls, R=1.0):
        return cls("sphere", 3, float(R), float(R), float(R))

    @property
    def is_radial(self):
        return self.shape in ("circle", "sphere")

    @property
    def parameter_domain(self):
        """Rectangle of parameters, one ``(lo, hi)`` pair per coordinate."""
        if self.shape == "sphere":
            return ((0.0, math.pi), (0.0, TWO_PI))
        return ((0.0, TWO_PI),)

    def area(self):
        """Exact measure of the surface where a closed form exists."""
        if self.shape == "circle":
            return TWO_PI * self.R
        if self.shape == "sphere":
            return 4.0 * math.pi * self.R**2
        # Ramanujan's second approximation is not exact; integrate instead.
        from .quadrature import adaptive_gauss

        return adaptive_gauss(lambda t: measure_weight(self, t), 0.0, TWO_PI, 1e-14)

    def sample_parameters(self, count=64):
        """Regular parameter grid used for sampled checks, shape ``(m,)`` or ``(m, 2)``."""
        if self.shape == "sphere":
            phi = (np.arange(count) + 0.5) * (math.pi / count)
            theta = np.arange(2 * count) * (TWO_PI / (2 * count))
            P, T = np.meshgrid(phi, theta, indexing="ij")
            return np.stack([P.ravel(), T.ravel()], axis=-1)
        return np.arange(4 * count) * (TWO_PI / (4 * count))


@dataclass(frozen=True)
class BoundaryFrame:
    """Point, unit normal and orthonormal tangents on the surface.

    Attributes
    ----------
    point : ndarray, shape (..., n)
    normal : ndarray, shape (..., n)
        Points out of the bounded interior domain.
    tangents : ndarray, shape (..., n - 1, n)
    param : ndarray
        Parameter values the frame was built from.
    """

    point: np.ndarray
    normal: np.ndarray
    tangents: np.ndarray
    param: np.ndarray

    def gram(self):
        """Gram matrix of ``(normal, tangents...)``, shape ``(..., n, n)``."""
        basis = np.concatenate([self.normal[..., None, :], self.tangents], axis=-2)
        return basis @ np.swapaxes(basis, -1, -2)


def frame_at(surface, t):
    """Boundary frame at parameter ``t`` (scalar or array).

    For the sphere ``t = (phi, theta)`` with colatitude ``phi``; the
    tangents are the unit coordinate vectors along ``phi`` and ``theta``,
    which stay well defined at the poles.
    """
    t = np.asarray(t, dtype=float)
    if surface.shape == "sphere":
        phi, theta = t[..., 0], t[..., 1]
        sp, cp = np.sin(phi), np.cos(phi)
        st, ct = np.sin(theta), np.cos(theta)
        normal = np.stack([sp * ct, sp * st, cp], axis=-1)
        e_phi = np.stack([cp * ct, cp * st, -sp], axis=-1)
        e_theta = np.stack([-st, ct, np.zeros_like(st)], axis=-1)
        tangents = np.stack([e_phi, e_theta], axis=-2)
        return BoundaryFrame(surface.R * normal, normal, tangents, t)
    s, c = np.sin(t), np.cos(t)
    point = np.stack([surface.a * c, surface.b * s], axis=-1)
    speed = np.sqrt((surface.a * s) ** 2 + (surface.b * c) ** 2)
    tangent = np.stack([-surface.a * s, surface.b * c], axis=-1) / speed[..., None]
    normal = np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)
    return BoundaryFrame(point, normal, tangent[..., None, :], t)


def measure_weight(surface, t):
    """Surface element: ``d sigma = weight * dt``."""
    t = np.asarray(t, dtype=float)
    if surface.shape == "sphere":
        return surface.R**2 * np.sin(t[..., 0])
    if surface.shape == "circle":
        return np.full(t.shape, surface.R)
    return np.sqrt((surface.a * np.sin(t)) ** 2 + (surface.b * np.cos(t)) ** 2)


def _identity_matrix(n):
    def matrix(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()

    return matrix


def _constant_matrix(A):
    def matrix(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(A, x.shape[:-1] + A.shape).copy()

    return matrix


def _perturbed_matrix(n, eps):
    idx = np.arange(n)
    phase = idx[:, None] + idx[None, :]

    def matrix(x):
        x = np.asarray(x, dtype=float)
        # S_jk = cos(x_j + x_k + j + k): smooth, symmetric, entries in [-1, 1]
        S = np.cos(x[..., :, None] + x[..., None, :] + phase)
        return np.eye(n) + eps * S

    return matrix


def _zero_potential(x):
    return np.zeros(np.asarray(x).shape[:-1])


@dataclass(frozen=True)
class CoefficientField:
    """Second-order coefficients ``a_jk(x)``, potential ``a(x)`` and shift ``m0**2``.

    The operator is ``-div(A grad u) + (a + m0**2) u``. Build instances with
    :meth:`identity`, :meth:`constant` or :meth:`perturbed`.

    Attributes
    ----------
    n : int
    family : {"identity", "constant", "perturbed"}
    m0 : float
        Square root of the positivity shift.
    matrix : callable
        ``x`` of shape ``(..., n)`` to symmetric matrices ``(..., n, n)``.
    potential : callable
        ``x`` of shape ``(..., n)`` to ``(...)``.
    params : dict
        Family parameters, kept for reports.
    """

    n: int
    family: str
    m0: float
    matrix: Callable = field(repr=False, compare=False)
    potential: Callable = field(default=_zero_potential, repr=False, compare=False)
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.m0) and self.m0 > 0):
            raise ValueError(f"m0 must be positive, got {self.m0}")

    @classmethod
    def identity(cls, n, m0=1.0):
        """Laplacian family ``-Delta + m0**2``."""
        return cls(n, "identity", float(m0), _identity_matrix(n))

    @classmethod
    def constant(cls, A, m0=1.0):
        """Constant symmetric positive definite matrix."""
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in (2, 3):
            raise ValueError("constant coefficients need a 2x2 or 3x3 matrix")
        if not np.allclose(A, A.T, rtol=0, atol=1e-14 * np.abs(A).max()):
            raise EllipticityError("coefficient matrix is not symmetric")
        if np.linalg.eigvalsh(A)[0] <= 0:
            raise EllipticityError("coefficient matrix is not positive definite")
        return cls(A.shape[0], "constant", float(m0), _constant_matrix(A),
                   params={"matrix": A.tolist()})

    @classmethod
    def perturbed(cls, n, eps, m0=1.0):
        """Identity plus ``eps`` times a smooth symmetric oscillating matrix.

        Uniformly elliptic for ``|eps| < 1/n``; larger values are accepted
        only if the sampled ellipticity check passes.
        """
        return cls(n, "perturbed", float(m0), _perturbed_matrix(n, float(eps)),
                   params={"eps": float(eps)})

    @property
    def is_laplacian(self):
        return self.family == "identity"


def check_ellipticity(coeffs, surface, points_per_axis=21):
    """Smallest eigenvalue of ``A(x)`` over a dense sample; raise if not positive.

    Samples the surface itself and a box twice its size.

    Returns
    -------
    float
        Smallest sampled eigenvalue.
    """
    ext = 2.0 * max(surface.a, surface.b, surface.R)
    axis = np.linspace(-ext, ext, points_per_axis)
    box = np.stack(np.meshgrid(*([axis] * coeffs.n), indexing="ij"), axis=-1)
    on_surface = frame_at(surface, surface.sample_parameters(32)).point
    pts = np.concatenate([box.reshape(-1, coeffs.n), on_surface.reshape(-1, coeffs.n)])
    A = coeffs.matrix(pts)
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - np.swapaxes(A, -1, -2)).max() > 1e-13 * scale:
        raise EllipticityError("coefficient matrix is not symmetric at a sampled point")
    lam = float(np.linalg.eigvalsh(A)[..., 0].min())
    if not lam > 1e-12 * scale:
        raise EllipticityError(f"coefficients not uniformly elliptic: min eigenvalue {lam:.3e}")
    return lam


@dataclass(frozen=True)
class LocalQuadraticData:
    """Coefficients in boundary-adapted coordinates.

    With ``xi = (xi', xi_n)`` the principal symbol reads
    ``a_nn xi_n^2 + 2 b(xi') xi_n + c(xi')`` where ``b(xi') = b . xi'`` and
    ``c(xi') = xi' . C xi'``.

    Attributes
    ----------
    a_nn : ndarray, shape (...)
    b : ndarray, shape (..., n - 1)
    c : ndarray, shape (..., n - 1, n - 1)
    """

    a_nn: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def b_of(self, xi):
        return np.einsum("...i,...i->...", self.b, xi)

    def c_of(self, xi):
        return np.einsum("...i,...ij,...j->...", xi, self.c, xi)


def transform_to_frame(coeffs, frame):
    """Express ``A(x')`` in the frame ``(tangents, normal)``.

    Returns
    -------
    LocalQuadraticData
        ``a_nn = nu . A nu``, ``b_i = t_i . A nu``, ``C_ij = t_i . A t_j``.

    Raises
    ------
    EllipticityError
        If ``a_nn <= 0`` or ``a_nn C - b b^T`` is not positive definite at
        some frame point (equivalently ``a_nn c(xi') > b(xi')^2`` fails for
        some unit ``xi'``).
    """
    A = coeffs.matrix(frame.point)
    An = A @ frame.normal[..., None]
    a_nn = (frame.normal[..., None, :] @ An)[..., 0, 0]
    b = (frame.tangents @ An)[..., 0]
    c = frame.tangents @ A @ np.swapaxes(frame.tangents, -1, -2)
    if np.any(a_nn <= 0):
        raise EllipticityError("a_nn is not positive on the surface")
    schur = a_nn[..., None, None] * c - b[..., :, None] * b[..., None, :]
    scale = a_nn[..., None, None] * np.abs(c).max(axis=(-1, -2), keepdims=True)
    lam = np.linalg.eigvalsh(schur / scale)[..., 0]
    if np.any(lam <= 1e-14):
        raise EllipticityError("a_nn c(xi') - b(xi')^2 is not positive on the surface")
    return LocalQuadraticData(a_nn, b, c)
