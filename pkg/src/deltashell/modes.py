"""Exact per-mode boundary operators on the disk and the ball.

For ``-Delta + m0^2`` and a circle or sphere of radius ``R`` every boundary
operator is diagonal in the Fourier (spherical harmonic) basis normalized in
``L^2`` of the surface. With ``s = (n - 2)/2``, order ``nu = k + s`` and
``x = m0 R`` the radial solutions are ``r^{-s} I_nu(m0 r)`` inside and
``r^{-s} K_nu(m0 r)`` outside, which gives

    p_minus = m0 I_{nu+1}/I_nu + k/R,
    p_plus  = m0 K_{nu-1}/K_nu + (k + n - 2)/R,
    r_gamma = (R/2)(1 - I_{nu-1} I_{nu+1}/I_nu^2) + (R/2)(K_{nu-1} K_{nu+1}/K_nu^2 - 1),
    r_nu    = r_gamma_minus / p_minus^2 + r_gamma_plus / p_plus^2.

The ``r`` values are the squared ``L^2`` norms of the Dirichlet and Neumann
Poisson solutions with unit boundary data, summed over both sides. The
closed forms follow from the Lommel integral
``int t u^2 dt = (t^2/2)(u'^2 - (1 + nu^2/t^2) u^2)`` for modified Bessel
functions ``u``; only ratio sequences are needed, so no value ever
overflows.

Per mode the resolvent differences reduce to scalars:

    delta_vs_free          r_gamma |alpha| / ((P - alpha) P),   P = p_plus + p_minus
    deltaprime_vs_neumann  r_nu / |beta - Q|,                   Q = 1/p_plus + 1/p_minus
    deltaprime_vs_free     r_nu |beta| / (Q |beta - Q|)
    neumann_vs_free        r_nu / Q
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from .bessel import i_ratios, k_ratios
from .errors import AdmissibilityError
from .kinds import Kind, as_kind
from .strengths import FourierStrength, as_strength

# modes are evaluated in fixed blocks so results do not depend on the thread count
CHUNK = 256
# |beta - Q| below this is treated as a non-invertible delta-prime condition
DELTAPRIME_GAP = 1e-8


@dataclass(frozen=True)
class ModeScalars:
    """Boundary scalars of one mode.

    Attributes
    ----------
    mode : int
        Fourier index ``k >= 0`` or spherical degree ``l``.
    multiplicity : int
    p_minus, p_plus : float
        Interior and exterior Dirichlet-to-Neumann values.
    q_minus, q_plus : float
        Neumann-to-Dirichlet values, ``1/p``.
    r_gamma, r_nu : float
        Squared norms of the Dirichlet / Neumann Poisson solutions, both sides.
    """

    mode: int
    multiplicity: int
    p_minus: float
    p_plus: float
    q_minus: float
    q_plus: float
    r_gamma: float
    r_nu: float


@dataclass(frozen=True)
class ModeTable:
    """Boundary scalars for modes ``0..cutoff`` as arrays."""

    n: int
    R: float
    m0: float
    modes: np.ndarray
    mult: np.ndarray
    p_minus: np.ndarray
    p_plus: np.ndarray
    r_gamma_minus: np.ndarray
    r_gamma_plus: np.ndarray

    @property
    def q_minus(self):
        return 1.0 / self.p_minus

    @property
    def q_plus(self):
        return 1.0 / self.p_plus

    @property
    def r_gamma(self):
        return self.r_gamma_minus + self.r_gamma_plus

    @property
    def r_nu(self):
        return self.r_gamma_minus / self.p_minus**2 + self.r_gamma_plus / self.p_plus**2

    @property
    def dtn_sum(self):
        return self.p_plus + self.p_minus

    @property
    def ntd_sum(self):
        return self.q_plus + self.q_minus

    def row(self, k):
        return ModeScalars(int(self.modes[k]), int(self.mult[k]),
                           float(self.p_minus[k]), float(self.p_plus[k]),
                           float(self.q_minus[k]), float(self.q_plus[k]),
                           float(self.r_gamma[k]), float(self.r_nu[k]))


def _radial(surface):
    if not surface.is_radial:
        raise ValueError("the mode solver needs a circle or a sphere")
    return surface.n, surface.R


def multiplicity(n, k):
    k = np.asarray(k)
    if n == 2:
        return np.where(k == 0, 1, 2)
    return 2 * k + 1


def _block(n, R, m0, start, stop):
    x = m0 * R
    nu0 = 0.5 * (n - 2)
    g = i_ratios(nu0, stop + 1, x)
    h = k_ratios(nu0, stop + 1, x)
    j = np.arange(start, stop + 1)
    g0, g1 = g[j], g[j + 1]
    h0, h1 = h[j], h[j + 1]
    p_minus = m0 * g1 + j / R
    p_plus = m0 / h0 + (j + n - 2) / R
    rg_minus = 0.5 * R * (1.0 - g1 / g0)
    rg_plus = 0.5 * R * (h1 / h0 - 1.0)
    return p_minus, p_plus, rg_minus, rg_plus


def mode_table(surface, m0, cutoff, threads=1):
    """Boundary scalars for all modes ``0..cutoff``.

    Parameters
    ----------
    surface : Hypersurface
        Circle or sphere.
    m0 : float
        Shift root, ``m0 > 0``.
    cutoff : int
        Highest mode index.
    threads : int
        Worker threads. Blocks of ``CHUNK`` modes are fixed in advance, so
        the output is bitwise identical for every thread count.
    """
    n, R = _radial(surface)
    m0 = float(m0)
    if not m0 > 0:
        raise ValueError("m0 must be positive")
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    starts = list(range(0, cutoff + 1, CHUNK))
    jobs = [(s, min(s + CHUNK - 1, cutoff)) for s in starts]

    def run(job):
        return _block(n, R, m0, *job)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    cols = [np.concatenate([p[i] for p in parts]) for i in range(4)]
    modes = np.arange(cutoff + 1)
    return ModeTable(n, R, m0, modes, multiplicity(n, modes), *cols)


def mode_scalars(surface, m0, mode):
    """Boundary scalars of a single mode."""
    n, R = _radial(surface)
    if mode < 0:
        raise ValueError("mode must be non-negative")
    cols = _block(n, R, float(m0), mode, mode)
    table = ModeTable(n, R, float(m0), np.array([mode]), multiplicity(n, np.array([mode])),
                      *cols)
    return table.row(0)


@dataclass(frozen=True)
class SingularSpectrum:
    """Singular values with mode provenance, sorted descending.

    ``values[i]`` occurs ``mult[i]`` times; ties are ordered by ascending
    mode. ``flat`` expands the multiplicities into ``s_1 >= s_2 >= ...``.
    Mode ``-1`` marks values that do not belong to a single mode.
    """

    values: np.ndarray
    modes: np.ndarray
    mult: np.ndarray
    kind: str
    n: int
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_modes(cls, values, modes, mult, kind, n, meta=None):
        values = np.asarray(values, dtype=float)
        modes = np.asarray(modes)
        order = np.lexsort((modes, -values))
        return cls(values[order], modes[order], np.asarray(mult)[order], kind, n, meta or {})

    def __len__(self):
        return int(self.mult.sum())

    @property
    def flat(self):
        return np.repeat(self.values, self.mult)

    @property
    def flat_modes(self):
        return np.repeat(self.modes, self.mult)

    @property
    def flat_mult(self):
        return np.repeat(self.mult, self.mult)


def _dtn_sum_mode0(surface, m):
    return mode_scalars(surface, m, 0)


def _min_shift(predicate, m_start):
    # smallest m with predicate(m) True, assuming monotonicity in m
    hi = max(m_start, 1e-6)
    while not predicate(hi):
        hi *= 2.0
        if hi > 1e8:
            return math.inf
    lo = hi / 2.0
    while predicate(lo) and lo > 1e-12:
        lo /= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def check_admissibility(kind, table, alpha=None, beta=None, surface=None):
    """Raise :class:`AdmissibilityError` if a mode makes the interface operator singular.

    The delta condition requires ``p_plus + p_minus - alpha > 0``; the
    delta-prime condition requires ``|beta - Q| > 1e-8``. Both sums are
    monotone in the mode, so the checked range ``0..cutoff`` covers the tail
    as long as ``beta`` is not below ``Q`` at the cutoff.
    """
    kind = as_kind(kind)
    if kind is Kind.DELTA_VS_FREE:
        gap = table.dtn_sum - alpha
        bad = np.flatnonzero(gap <= 0)
        if bad.size:
            k = int(table.modes[bad[0]])
            m_min = None
            if surface is not None:
                m_min = _min_shift(lambda m: _dtn_sum_mode0(surface, m).p_minus
                                   + _dtn_sum_mode0(surface, m).p_plus > alpha, table.m0)
            raise AdmissibilityError(
                f"p_plus + p_minus - alpha = {gap[bad[0]]:.6g} <= 0 at mode {k}"
                + (f"; smallest admissible m0 is {m_min:.6g}" if m_min else ""),
                mode=k, min_shift=m_min)
    elif kind.uses_beta:
        gap = np.abs(beta - table.ntd_sum)
        bad = np.flatnonzero(gap <= DELTAPRIME_GAP)
        if bad.size:
            k = int(table.modes[bad[0]])
            m_min = None
            if surface is not None and beta > 0:
                m_min = _min_shift(lambda m: 1.0 / _dtn_sum_mode0(surface, m).p_minus
                                   + 1.0 / _dtn_sum_mode0(surface, m).p_plus < beta, table.m0)
            raise AdmissibilityError(
                f"|beta - (q_plus + q_minus)| = {gap[bad[0]]:.3g} at mode {k}"
                + (f"; smallest admissible m0 is {m_min:.6g}" if m_min else ""),
                mode=k, min_shift=m_min)


def krein_mode_values(kind, table, alpha=None, beta=None):
    """Per-mode singular value of the chosen resolvent difference (no admissibility check)."""
    kind = as_kind(kind)
    if kind is Kind.DELTA_VS_FREE:
        P = table.dtn_sum
        return table.r_gamma * abs(alpha) / ((P - alpha) * P)
    Q = table.ntd_sum
    if kind is Kind.DELTAPRIME_VS_NEUMANN:
        return table.r_nu / np.abs(beta - Q)
    if kind is Kind.DELTAPRIME_VS_FREE:
        return table.r_nu * abs(beta) / (Q * np.abs(beta - Q))
    return table.r_nu / Q


def _strength_constant(value, name):
    if value is None:
        raise ValueError(f"{name} required")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    return value


def krein_singular_values(kind, surface, m0, cutoff, alpha=None, beta=None, threads=1):
    """Singular values of a resolvent difference for constant strengths.

    Parameters
    ----------
    kind : Kind or str
    surface : Hypersurface
        Circle or sphere.
    m0 : float
        Shift root.
    cutoff : int
        Highest mode index; the spectrum has ``sum(mult)`` entries.
    alpha, beta : float
        Constant strengths, as required by ``kind``.
    threads : int
        Worker threads for the mode sweep.

    Raises
    ------
    AdmissibilityError
        Names the offending mode and the smallest admissible ``m0``.
    """
    kind = as_kind(kind)
    if kind.uses_alpha:
        alpha = _strength_constant(alpha, "alpha")
    if kind.uses_beta:
        beta = _strength_constant(beta, "beta")
        if beta == 0:
            raise ValueError("beta required and non-zero")
    table = mode_table(surface, m0, cutoff, threads=threads)
    check_admissibility(kind, table, alpha, beta, surface)
    vals = krein_mode_values(kind, table, alpha, beta)
    meta = {"kind": kind.value, "shape": surface.shape, "R": surface.R, "m0": float(m0),
            "alpha": alpha, "beta": beta, "cutoff": int(cutoff)}
    return SingularSpectrum.from_modes(vals, table.modes, table.mult, kind.value, surface.n, meta)


def phi_matrix(p_minus, p_plus, alpha):
    return np.array([[1.0, -1.0], [p_plus - alpha, p_minus]])


def phi_inverse(p_minus, p_plus, alpha):
    """Explicit inverse of the delta interface matrix, determinant ``p_plus + p_minus - alpha``."""
    det = p_plus + p_minus - alpha
    return np.array([[p_minus, 1.0], [alpha - p_plus, 1.0]]) / det


def psi_matrix(q_minus, q_plus, beta):
    return np.array([[q_plus - beta, -q_minus], [1.0, 1.0]])


def psi_inverse(q_minus, q_plus, beta):
    """Explicit inverse of the delta-prime interface matrix, determinant ``q_plus + q_minus - beta``."""
    det = q_plus + q_minus - beta
    return np.array([[1.0, q_minus], [-1.0, q_plus - beta]]) / det


def verify_phi_psi_inverse(mode, alpha, beta, surface, m0):
    """Largest entry of ``Phi Phi^{-1} - I`` and ``Psi Psi^{-1} - I`` for one mode.

    Either strength may be ``None`` to skip that matrix.

    Raises
    ------
    AdmissibilityError
        If a determinant vanishes (relative to the entries) at this mode.
    """
    ms = mode_scalars(surface, m0, mode)
    eye = np.eye(2)
    worst = 0.0
    if alpha is not None:
        det = ms.p_plus + ms.p_minus - alpha
        if abs(det) <= 1e-12 * max(ms.p_plus + ms.p_minus, abs(alpha)):
            raise AdmissibilityError(f"Phi is singular at mode {mode}: det = {det:.3g}", mode=mode)
        res = phi_matrix(ms.p_minus, ms.p_plus, alpha) @ phi_inverse(ms.p_minus, ms.p_plus, alpha)
        worst = max(worst, float(np.abs(res - eye).max()))
    if beta is not None:
        det = ms.q_plus + ms.q_minus - beta
        if abs(det) <= 1e-12 * max(ms.q_plus + ms.q_minus, abs(beta)):
            raise AdmissibilityError(f"Psi is singular at mode {mode}: det = {det:.3g}", mode=mode)
        res = psi_matrix(ms.q_minus, ms.q_plus, beta) @ psi_inverse(ms.q_minus, ms.q_plus, beta)
        worst = max(worst, float(np.abs(res - eye).max()))
    return worst


def _galerkin_operators(strength, surface, m0, K):
    table = mode_table(surface, m0, K)
    k = np.arange(-K, K + 1)
    idx = np.abs(k)
    P = table.dtn_sum[idx]
    r = table.r_gamma[idx]
    coeffs = strength.coefficients
    column = np.zeros(2 * K + 1, dtype=complex)
    m = min(len(coeffs), 2 * K + 1)
    column[:m] = coeffs[:m]
    T = linalg.toeplitz(column, np.conj(column))
    if not np.any(T.imag):
        T = T.real
    return k, P, r, T


def galerkin_min_eigenvalue(strength, surface, m0, K):
    """Smallest eigenvalue of the truncated ``P_plus + P_minus - alpha``."""
    _, P, _, T = _galerkin_operators(strength, surface, m0, K)
    return float(linalg.eigvalsh(np.diag(P) - T, subset_by_index=[0, 0])[0])


def fourier_galerkin_singular_values(alpha, surface, m0, cutoff, guard_band=None,
                                     provenance=False):
    """Delta-vs-free singular values for a variable strength on the circle.

    Assembles, on the Fourier modes ``|k| <= cutoff``, the matrix
    ``D (P - T)^{-1} T P^{-1} D`` with ``P = diag(p_plus + p_minus)``,
    ``D = diag(sqrt(r_gamma))`` and ``T`` the Toeplitz matrix of
    multiplication by ``alpha``. It is Hermitian, so its singular values are
    the absolute eigenvalues. Modes near the truncation edge are polluted;
    only the largest ``2 (cutoff - guard_band) + 1`` values are kept.

    Parameters
    ----------
    alpha : FourierStrength or sequence
        Coefficients ``hat alpha_0, hat alpha_1, ...`` of a real
        trigonometric polynomial.
    surface : Hypersurface
        A circle.
    m0 : float
    cutoff : int
        Truncation ``K``.
    guard_band : int, optional
        Defaults to ``cutoff // 4``.
    provenance : bool
        Attach the dominant ``|k|`` of every eigenvector (slower).

    Raises
    ------
    AdmissibilityError
        If the truncated ``P - T`` is not positive definite.
    """
    strength = as_strength(alpha)
    if not isinstance(strength, FourierStrength):
        strength = FourierStrength((float(strength.value),))
    if surface.shape != "circle":
        raise ValueError("the Galerkin path is implemented on the circle only")
    K = int(cutoff)
    guard = K // 4 if guard_band is None else int(guard_band)
    if not 0 <= guard < K:
        raise ValueError("guard band must satisfy 0 <= guard_band < cutoff")
    k, P, r, T = _galerkin_operators(strength, surface, m0, K)
    A = np.diag(P) - T
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=False)
    except linalg.LinAlgError:
        lam = float(linalg.eigvalsh(A, subset_by_index=[0, 0])[0])
        small = min(K, 4 * strength.degree + 16)
        m_min = _min_shift(lambda m: galerkin_min_eigenvalue(strength, surface, m, small) > 0,
                           float(m0))
        raise AdmissibilityError(
            f"truncated P_plus + P_minus - alpha is not positive (smallest eigenvalue "
            f"{lam:.4g}); smallest admissible m0 is about {m_min:.6g}", min_shift=m_min) from None
    X = linalg.cho_solve(factor, T / P[None, :], check_finite=False)
    d = np.sqrt(r)
    M = d[:, None] * X * d[None, :]
    M = 0.5 * (M + M.conj().T)
    keep = 2 * (K - guard) + 1
    if provenance:
        w, V = linalg.eigh(M, check_finite=False)
        order = np.argsort(-np.abs(w), kind="stable")[:keep]
        vals = np.abs(w[order])
        modes = np.abs(k[np.argmax(np.abs(V[:, order]), axis=0)])
    else:
        w = linalg.eigvalsh(M, check_finite=False)
        vals = np.sort(np.abs(w))[::-1][:keep]
        modes = np.full(keep, -1)
    meta = {"kind": Kind.DELTA_VS_FREE.value, "shape": "circle", "R": surface.R,
            "m0": float(m0), "alpha": [complex(c).real if complex(c).imag == 0 else str(c)
                                       for c in strength.coefficients],
            "cutoff": K, "guard_band": guard}
    return SingularSpectrum.from_modes(vals, modes, np.ones(keep, dtype=int),
                                       Kind.DELTA_VS_FREE.value, 2, meta)
