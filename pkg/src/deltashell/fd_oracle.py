"""Brute-force radial finite differences for single modes.

A mode ``k`` reduces every realization to the radial form

    a(u, v) = int (u' v' + q u v) r^{n-1} dr,   q = k(k + n - 2)/r^2 + m0^2,

plus interface terms at ``r = R``. The mesh is vertex centred with step
``h``; the interface node is duplicated into an interior and an exterior
copy, each owning a half cell. Cell weights ``int r^{n-1} dr`` are exact,
face coefficients are ``r_face^{n-1} / h`` and the potential is lumped.
The exterior is truncated with a homogeneous Dirichlet condition at
``R_out >= R + 20/m0``.

Interface realizations as forms on the duplicated space:

* Neumann: interior and exterior decoupled.
* delta-prime: Neumann form minus ``(R^{n-1}/beta) (u_+ - u_-)^2``.
* free: the two copies merged (continuity).
* delta: free form minus ``alpha R^{n-1} u(R)^2``.

The solution operator of a form matrix ``H`` on the weighted space is
``H^{-1} W``. Differences are taken in the symmetric representation
``W^{1/2} (T_1 - T_2) W^{1/2}`` and their top singular values found with a
seeded randomized range finder; per mode the difference has rank one.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .errors import AdmissibilityError
from .kinds import Kind, as_kind

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class RadialMesh:
    """Uniform radial mesh for one mode.

    Attributes
    ----------
    n : int
    R : float
        Interface radius, a multiple of ``h``.
    h : float
    R_out : float
        Truncation radius.
    mode : int
    """

    n: int
    R: float
    h: float
    R_out: float
    mode: int

    @classmethod
    def build(cls, n, R, h, mode, m0, R_out=None):
        """Mesh with ``R_out`` defaulting to ``R + 20/m0`` rounded up to the grid.

        Raises
        ------
        ValueError
            If ``R`` is not a multiple of ``h`` or ``R_out < R + 20/m0``.
        """
        if n not in (2, 3):
            raise ValueError("n must be 2 or 3")
        if not (h > 0 and R > 0 and m0 > 0):
            raise ValueError("h, R and m0 must be positive")
        steps = R / h
        if abs(steps - round(steps)) > 1e-9 * steps:
            raise ValueError("R must be an integer multiple of h")
        need = R + 20.0 / m0
        if R_out is None:
            R_out = need
        if R_out < need * (1 - 1e-12):
            raise ValueError(f"R_out={R_out} is below R + 20/m0 = {need}")
        outer = math.ceil((R_out - R) / h - 1e-9)
        return cls(n, float(R), float(h), float(R + outer * h), int(mode))

    @property
    def interior_steps(self):
        return int(round(self.R / self.h))

    @property
    def exterior_steps(self):
        return int(round((self.R_out - self.R) / self.h))

    @property
    def interior_nodes(self):
        return np.arange(self.interior_steps + 1) * self.h

    @property
    def exterior_nodes(self):
        return self.R + np.arange(self.exterior_steps + 1) * self.h


def _side_form(r, lo, hi, n, k, m0, h, fixed):
    """Form and weights on nodes ``r`` for ``[lo, hi]``; ``fixed`` nodes are dropped."""
    a = np.maximum(r - 0.5 * h, lo)
    b = np.minimum(r + 0.5 * h, hi)
    w = (b**n - a**n) / n
    q = np.full(r.shape, m0 * m0)
    pos = r > 0
    q[pos] += k * (k + n - 2) / r[pos] ** 2
    face = (0.5 * (r[:-1] + r[1:])) ** (n - 1) / h
    diag = w * q
    diag[:-1] += face
    diag[1:] += face
    keep = ~fixed
    H = sparse.diags([-face, diag, -face], [-1, 0, 1], format="csr")
    return H[keep][:, keep], w[keep], face


def _interior(mesh, m0):
    r = mesh.interior_nodes
    fixed = np.zeros(r.size, bool)
    if mesh.mode > 0:
        fixed[0] = True  # u(0) = 0 for non-radial modes
    return _side_form(r, 0.0, mesh.R, mesh.n, mesh.mode, m0, mesh.h, fixed), fixed


def _exterior(mesh, m0):
    r = mesh.exterior_nodes
    fixed = np.zeros(r.size, bool)
    fixed[-1] = True
    return _side_form(r, mesh.R, mesh.R_out, mesh.n, mesh.mode, m0, mesh.h, fixed), fixed


def _check_symmetric(H):
    scale = abs(H).max()
    if abs(H - H.T).max() > SYMMETRY_TOL * scale:
        raise AssertionError("assembled form matrix is not symmetric")


class RadialOperators:
    """All four realizations of one mode on one mesh, with cached factorizations.

    Parameters
    ----------
    mesh : RadialMesh
    m0 : float
    """

    def __init__(self, mesh, m0):
        self.mesh = mesh
        self.m0 = float(m0)
        (Hi, wi, _), _ = _interior(mesh, m0)
        (He, we, _), _ = _exterior(mesh, m0)
        self.n_int = Hi.shape[0]
        self.size = self.n_int + He.shape[0]
        self.i_minus = self.n_int - 1
        self.i_plus = self.n_int
        self.weights = np.concatenate([wi, we])
        self.sqrt_w = np.sqrt(self.weights)
        self.H_neumann = sparse.block_diag([Hi, He], format="csc")
        # merge matrix: drop the exterior copy of the interface node
        rows = np.arange(self.size)
        cols = np.where(rows < self.i_plus, rows, rows - 1)
        self.E = sparse.csc_matrix((np.ones(self.size), (rows, cols)),
                                   shape=(self.size, self.size - 1))
        self.H_free = (self.E.T @ self.H_neumann @ self.E).tocsc()
        self.surface_factor = mesh.R ** (mesh.n - 1)
        for H in (self.H_neumann, self.H_free):
            _check_symmetric(H)
        self._solvers = {}

    def form(self, name, strength=None):
        """Form matrix of ``"neumann"``, ``"free"``, ``"delta"`` or ``"deltaprime"``."""
        if name == "neumann":
            return self.H_neumann
        if name == "free":
            return self.H_free
        if name == "delta":
            e = sparse.csc_matrix(([1.0], ([self.i_minus], [0])), shape=(self.size - 1, 1))
            H = (self.H_free - strength * self.surface_factor * (e @ e.T)).tocsc()
        elif name == "deltaprime":
            c = sparse.csc_matrix(([-1.0, 1.0], ([self.i_minus, self.i_plus], [0, 0])),
                                  shape=(self.size, 1))
            H = (self.H_neumann - (self.surface_factor / strength) * (c @ c.T)).tocsc()
        else:
            raise ValueError(f"unknown realization {name!r}")
        _check_symmetric(H)
        return H

    def _solver(self, name, strength=None):
        key = (name, strength)
        if key not in self._solvers:
            try:
                lu = splinalg.splu(self.form(name, strength))
            except RuntimeError as exc:
                raise AdmissibilityError(
                    f"discrete {name} operator (strength {strength}) is singular for mode "
                    f"{self.mesh.mode}") from exc
            self._solvers[key] = lu
        return self._solvers[key]

    def solve(self, name, rhs, strength=None):
        """Apply ``H^{-1}`` of a realization to weighted right-hand sides on the duplicated space."""
        lu = self._solver(name, strength)
        if name in ("free", "delta"):
            return self.E @ lu.solve(self.E.T @ rhs)
        return lu.solve(rhs)

    def symmetric_difference(self, first, second, X):
        """``W^{1/2} (H_1^{-1} - H_2^{-1}) W^{1/2} X`` for realizations ``(name, strength)``."""
        F = self.sqrt_w[:, None] * X
        D = self.solve(*first[:1], F, *first[1:]) - self.solve(*second[:1], F, *second[1:])
        return self.sqrt_w[:, None] * D

    def top_singular_values(self, first, second, block=4, seed=0):
        """Leading singular values of the symmetric difference, descending.

        Randomized range finder with one power pass followed by a small
        symmetric eigenproblem; exact up to rounding when the difference
        has rank below ``block``.
        """
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((self.size, block))
        Y = self.symmetric_difference(first, second, X)
        Y = self.symmetric_difference(first, second, Y)
        Q, _ = np.linalg.qr(Y)
        B = Q.T @ self.symmetric_difference(first, second, Q)
        ev = np.linalg.eigvalsh(0.5 * (B + B.T))
        return np.sort(np.abs(ev))[::-1]


_PAIRS = {
    Kind.DELTA_VS_FREE: (("delta", "alpha"), ("free", None)),
    Kind.DELTAPRIME_VS_FREE: (("deltaprime", "beta"), ("free", None)),
    Kind.DELTAPRIME_VS_NEUMANN: (("deltaprime", "beta"), ("neumann", None)),
    Kind.NEUMANN_VS_FREE: (("neumann", None), ("free", None)),
}


def resolvent_pair(kind, alpha=None, beta=None):
    """The two realizations compared by ``kind``, as ``(name, strength)`` tuples."""
    kind = as_kind(kind)
    values = {"alpha": alpha, "beta": beta, None: None}
    out = []
    for name, key in _PAIRS[kind]:
        if key is not None and values[key] is None:
            raise ValueError(f"{key} required for {kind.value}")
        out.append((name, values[key]) if key else (name,))
    return tuple(out)


def fd_resolvent_difference(kind, mesh, m0, alpha=None, beta=None, operators=None,
                            return_second=False):
    """Per-mode singular value of a resolvent difference from finite differences.

    Parameters
    ----------
    kind : Kind or str
    mesh : RadialMesh
    m0 : float
    alpha, beta : float
        Strengths as required by ``kind``.
    operators : RadialOperators, optional
        Reuse cached factorizations for the same mesh and ``m0``.
    return_second : bool
        Also return the second singular value (rank check, ~rounding).
    """
    kind = as_kind(kind)
    if kind.uses_alpha and alpha == 0:
        return (0.0, 0.0) if return_second else 0.0
    ops = operators or RadialOperators(mesh, m0)
    first, second = resolvent_pair(kind, alpha, beta)
    sv = ops.top_singular_values(first, second, seed=1000 + mesh.mode)
    return (float(sv[0]), float(sv[1])) if return_second else float(sv[0])


def fd_dtn(mesh, m0):
    """Interior and exterior Dirichlet-to-Neumann values from unit boundary data.

    Returns
    -------
    (float, float)
        ``(p_minus, p_plus)`` from second-order one-sided differences.
    """
    h = mesh.h
    (Hi, _, _), _ = _interior(mesh, m0)
    m = Hi.shape[0]
    A = Hi[: m - 1][:, : m - 1].tocsc()
    u = np.empty(m)
    u[-1] = 1.0
    u[:-1] = splinalg.spsolve(A, -Hi[: m - 1, m - 1].toarray().ravel())
    p_minus = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)

    (He, _, _), _ = _exterior(mesh, m0)
    A = He[1:][:, 1:].tocsc()
    v = np.empty(He.shape[0])
    v[0] = 1.0
    v[1:] = splinalg.spsolve(A, -He[1:, 0].toarray().ravel())
    p_plus = (3.0 * v[0] - 4.0 * v[1] + v[2]) / (2.0 * h)
    return float(p_minus), float(p_plus)


def smooth_random_data(r, R, seed=0, terms=5):
    """Seeded smooth test function: random trigonometric sum times a Gaussian around ``R``."""
    rng = np.random.default_rng(seed)
    amp = rng.standard_normal(terms)
    phase = rng.uniform(0.0, 2.0 * math.pi, terms)
    freq = np.arange(1, terms + 1) * (math.pi / R)
    wave = np.sum(amp[:, None] * np.cos(freq[:, None] * r[None, :] + phase[:, None]), axis=0)
    return wave * np.exp(-0.25 * (r - R) ** 2)


def verify_adjoint_identity(mesh, m0, side="-", condition="dirichlet", f=None, seed=0):
    """Relative residual of the discrete Poisson-operator adjoint identities.

    Dirichlet: ``(f, K phi) = -R^{n-1} (nu A_D^{-1} f) phi`` with the
    conormal taken by the second-order one-sided stencil; the residual is
    ``O(h^2)``. Neumann: ``(f, K_nu psi) = R^{n-1} (A_N^{-1} f)(R) psi``,
    which the scheme satisfies exactly, so the residual is at rounding level.

    Parameters
    ----------
    mesh : RadialMesh
    m0 : float
    side : {"-", "+"}
        Interior or exterior domain.
    condition : {"dirichlet", "neumann"}
    f : ndarray or callable, optional
        Values on the side's unknown nodes (boundary node included), or a
        function of ``r``; seeded smooth random data by default.
    seed : int
    """
    h = mesh.h
    if side == "-":
        (H, w, _), _ = _interior(mesh, m0)
        b = H.shape[0] - 1  # boundary node index
        sign = 1.0  # outward normal derivative points to increasing r
    elif side == "+":
        (H, w, _), _ = _exterior(mesh, m0)
        b = 0
        sign = -1.0
    else:
        raise ValueError("side must be '-' or '+'")
    size = H.shape[0]
    # unknown nodes of this side: interior drops r = 0 for k > 0, exterior drops R_out
    r = mesh.interior_nodes[-size:] if side == "-" else mesh.exterior_nodes[:size]
    if f is None:
        f = smooth_random_data(r, mesh.R, seed)
    elif callable(f):
        f = f(r)
    f = np.asarray(f, dtype=float)
    phi = 1.0
    area = mesh.R ** (mesh.n - 1)
    H = H.tocsc()

    def one_sided(u):
        if side == "-":
            return sign * (3.0 * u[b] - 4.0 * u[b - 1] + u[b - 2]) / (2.0 * h)
        return sign * (-3.0 * u[b] + 4.0 * u[b + 1] - u[b + 2]) / (2.0 * h)

    keep = np.ones(size, bool)
    keep[b] = False
    if condition == "dirichlet":
        A = H[keep][:, keep].tocsc()
        u = np.empty(size)
        u[b] = phi
        u[keep] = splinalg.spsolve(A, -phi * H[keep][:, [b]].toarray().ravel())
        v = np.zeros(size)
        v[keep] = splinalg.spsolve(A, w[keep] * f[keep])
        lhs = float(np.sum(w * f * u))
        rhs = -area * one_sided(v) * phi
    elif condition == "neumann":
        g = np.zeros(size)
        g[b] = area * phi
        u = splinalg.spsolve(H, g)
        v = splinalg.spsolve(H, w * f)
        lhs = float(np.sum(w * f * u))
        rhs = area * v[b] * phi
    else:
        raise ValueError("condition must be 'dirichlet' or 'neumann'")
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def observed_orders(errors):
    """``log2`` ratios of successive errors under mesh halving."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])
