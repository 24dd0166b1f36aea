import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, strategies as st
from scipy import integrate

from deltashell import modes
from deltashell.errors import AdmissibilityError
from deltashell.geometry import Hypersurface
from deltashell.kinds import Kind
from deltashell.strengths import FourierStrength

DISK = Hypersurface.circle(1.0)
BALL = Hypersurface.sphere(1.0)


def test_disk_reference_values():
    ms = modes.mode_scalars(DISK, 1.0, 0)
    assert ms.p_minus == pytest.approx(0.446391, abs=1e-5)
    assert ms.p_plus == pytest.approx(1.429625, abs=1e-5)
    # I_1'(1)/I_1(1) = (I_0(1) - I_1(1))/I_1(1) = 1.2401937...
    p1 = modes.mode_scalars(DISK, 1.0, 1).p_minus
    assert p1 == pytest.approx((sp.iv(0, 1) - sp.iv(1, 1)) / sp.iv(1, 1), rel=1e-13)
    assert p1 == pytest.approx(1.24019372, abs=1e-8)
    # closed forms through scipy
    assert ms.p_minus == pytest.approx(sp.iv(1, 1) / sp.iv(0, 1), rel=1e-13)
    assert ms.p_plus == pytest.approx(sp.kv(1, 1) / sp.kv(0, 1), rel=1e-13)


def _r_gamma_quad(n, R, m0, k):
    # squared norms of the interior / exterior Dirichlet solutions, trace-normalized
    if n == 2:
        fi = lambda r: (sp.iv(k, m0 * r) / sp.iv(k, m0 * R)) ** 2 * r
        fe = lambda r: (sp.kv(k, m0 * r) / sp.kv(k, m0 * R)) ** 2 * r
    else:
        fi = lambda r: (sp.spherical_in(k, m0 * r) / sp.spherical_in(k, m0 * R)) ** 2 * r * r
        fe = lambda r: (sp.spherical_kn(k, m0 * r) / sp.spherical_kn(k, m0 * R)) ** 2 * r * r
    inner = integrate.quad(fi, 0, R, epsabs=0, epsrel=1e-13, limit=200)[0]
    outer = integrate.quad(fe, R, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
    return (inner + outer) / R ** (n - 1)


@pytest.mark.parametrize("surface", [DISK, BALL, Hypersurface.circle(2.5),
                                     Hypersurface.sphere(0.6)], ids=str)
@pytest.mark.parametrize("k", [0, 1, 3, 17])
@pytest.mark.parametrize("m0", [0.5, 1.0, 3.0])
def test_r_gamma_matches_radial_quadrature(surface, k, m0):
    ms = modes.mode_scalars(surface, m0, k)
    assert ms.r_gamma == pytest.approx(_r_gamma_quad(surface.n, surface.R, m0, k), rel=1e-9)


def test_ball_reference_values():
    ms = modes.mode_scalars(BALL, 1.0, 0)
    assert ms.p_plus == pytest.approx(2.0, rel=1e-14)
    assert ms.p_minus == pytest.approx(1 / math.tanh(1) - 1, rel=1e-13)
    assert ms.r_gamma == pytest.approx(0.79448681, rel=1e-8)


def test_disk_frozen_scalars():
    ms = modes.mode_scalars(DISK, 1.0, 0)
    assert ms.r_gamma == pytest.approx(0.92228238885, rel=1e-10)
    assert ms.r_nu == pytest.approx(2.26459507, rel=1e-8)


@pytest.mark.parametrize("surface", [DISK, BALL], ids=str)
def test_large_mode_limits(surface):
    table = modes.mode_table(surface, 1.0, 2000)
    k = 2000
    assert table.p_minus[k] * surface.R / k == pytest.approx(1, abs=2e-3)
    assert table.p_plus[k] * surface.R / k == pytest.approx(1, abs=2e-3)
    assert table.r_gamma[k] * k / surface.R == pytest.approx(1, abs=2e-3)
    assert table.r_nu[k] * (k / surface.R) ** 3 == pytest.approx(1, abs=2e-3)
    # every deviation decays at least like 1/k (the disk even like 1/k^2)
    ks = np.array([250, 500, 1000, 2000])
    R = surface.R
    for ratio in (table.p_minus[ks] * R / ks, table.p_plus[ks] * R / ks,
                  table.r_gamma[ks] * ks / R, table.r_nu[ks] * (ks / R) ** 3):
        slope = np.polyfit(np.log(ks), np.log(np.abs(ratio - 1)), 1)[0]
        assert slope <= -0.95


@given(st.floats(0.1, 5.0), st.floats(0.2, 4.0), st.sampled_from(["circle", "sphere"]))
def test_scalar_invariants(R, m0, shape):
    surface = getattr(Hypersurface, shape)(R)
    table = modes.mode_table(surface, m0, 300)
    for arr in (table.p_minus, table.p_plus, table.r_gamma, table.r_nu):
        assert np.all(arr > 0) and np.all(np.isfinite(arr))
    np.testing.assert_allclose(table.q_minus * table.p_minus, 1.0, rtol=1e-15)
    assert np.all(np.diff(table.dtn_sum) > 0)


def test_threads_do_not_change_results():
    one = modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, 1.0, 3000, alpha=1.0, threads=1)
    four = modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, 1.0, 3000, alpha=1.0,
                                       threads=4)
    assert np.array_equal(one.flat, four.flat)
    assert np.array_equal(one.flat_modes, four.flat_modes)


def test_spectrum_structure():
    spectrum = modes.krein_singular_values("deltaprime_vs_neumann", BALL, 1.0, 40, beta=2.0)
    assert len(spectrum) == 41**2
    assert np.all(np.diff(spectrum.flat) <= 0)
    # ties inside a degree keep one block of the same mode
    assert np.all(spectrum.mult == 2 * spectrum.modes + 1)
    zero = modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, 1.0, 50, alpha=0.0)
    assert not np.any(zero.flat)


def test_delta_mode_zero_composition():
    ms = modes.mode_scalars(DISK, 1.0, 0)
    spectrum = modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, 1.0, 5, alpha=1.0)
    P = ms.p_minus + ms.p_plus
    assert P == pytest.approx(1.876016, abs=1e-5)
    s0 = spectrum.values[spectrum.modes == 0][0]
    assert s0 == pytest.approx(ms.r_gamma / ((P - 1) * P), rel=1e-14)


@pytest.mark.parametrize("kind,strength,p", [
    (Kind.DELTA_VS_FREE, {"alpha": 1.0}, 3), (Kind.DELTAPRIME_VS_FREE, {"beta": 1.0}, 2),
    (Kind.DELTAPRIME_VS_NEUMANN, {"beta": 1.0}, 3), (Kind.NEUMANN_VS_FREE, {}, 2)])
def test_tail_exponent(kind, strength, p):
    spectrum = modes.krein_singular_values(kind, DISK, 1.0, 2000, **strength)
    j = np.arange(500, 4001)
    slope = np.polyfit(np.log(j), np.log(spectrum.flat[j - 1]), 1)[0]
    assert slope == pytest.approx(-p, abs=0.02)


def test_deltaprime_free_beta_three():
    one = modes.krein_singular_values(Kind.DELTAPRIME_VS_FREE, DISK, 1.0, 2000, beta=1.0)
    three = modes.krein_singular_values(Kind.DELTAPRIME_VS_FREE, DISK, 1.0, 2000, beta=3.0)
    ratio = three.flat[3000] / one.flat[3000]
    assert ratio == pytest.approx(1.0, abs=2e-3)


def test_admissibility_error_names_mode_and_shift():
    with pytest.raises(AdmissibilityError) as info:
        modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, 1.0, 50, alpha=2.0)
    err = info.value
    assert err.mode == 0
    assert err.min_shift == pytest.approx(1.06672, abs=1e-4)
    assert "mode 0" in str(err)
    # the reported shift is indeed admissible and sharp
    modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, err.min_shift * (1 + 1e-6), 50,
                                alpha=2.0)


def test_deltaprime_singular_at_matching_beta():
    ms = modes.mode_scalars(DISK, 1.0, 3)
    with pytest.raises(AdmissibilityError):
        modes.krein_singular_values(Kind.DELTAPRIME_VS_NEUMANN, DISK, 1.0, 20,
                                    beta=ms.q_minus + ms.q_plus)


def test_beta_zero_rejected():
    with pytest.raises(ValueError, match="beta required and non-zero"):
        modes.krein_singular_values(Kind.DELTAPRIME_VS_FREE, DISK, 1.0, 20, beta=0.0)


@pytest.mark.parametrize("k", [0, 1, 5, 50, 400])
@pytest.mark.parametrize("surface", [DISK, BALL], ids=str)
def test_phi_psi_inverses(k, surface):
    assert modes.verify_phi_psi_inverse(k, 0.7, -1.3, surface, 1.0) <= 1e-12
    ms = modes.mode_scalars(surface, 1.0, k)
    det = np.linalg.det(modes.phi_matrix(ms.p_minus, ms.p_plus, 0.7))
    assert det == pytest.approx(ms.p_plus + ms.p_minus - 0.7, rel=1e-13)


def test_phi_singularity_detected():
    ms = modes.mode_scalars(DISK, 1.0, 0)
    with pytest.raises(AdmissibilityError, match="mode 0"):
        modes.verify_phi_psi_inverse(0, ms.p_plus + ms.p_minus, None, DISK, 1.0)


def test_galerkin_constant_matches_krein():
    K = 200
    gal = modes.fourier_galerkin_singular_values((1.0,), DISK, 1.0, K, guard_band=0)
    kre = modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, 1.0, K, alpha=1.0)
    np.testing.assert_allclose(gal.flat, kre.flat, rtol=1e-10, atol=0)


def test_galerkin_guard_band_length():
    gal = modes.fourier_galerkin_singular_values(FourierStrength((2.0, 0.5)), DISK, 2.0, 100)
    assert len(gal) == 2 * (100 - 25) + 1
    assert np.all(np.diff(gal.flat) <= 0)


def test_galerkin_provenance_for_constant_strength():
    gal = modes.fourier_galerkin_singular_values((1.0,), DISK, 1.0, 30, guard_band=0,
                                                 provenance=True)
    kre = modes.krein_singular_values(Kind.DELTA_VS_FREE, DISK, 1.0, 30, alpha=1.0)
    assert np.array_equal(np.abs(gal.flat_modes[:20]), kre.flat_modes[:20])


def test_galerkin_inadmissible_reports_shift():
    strength = FourierStrength((2.0, 0.5))
    assert modes.galerkin_min_eigenvalue(strength, DISK, 1.0, 200) < 0
    with pytest.raises(AdmissibilityError) as info:
        modes.fourier_galerkin_singular_values(strength, DISK, 1.0, 200)
    assert 1.0 < info.value.min_shift < 2.0
    assert modes.galerkin_min_eigenvalue(strength, DISK, 2.0, 200) > 0


def test_non_radial_surface_rejected():
    with pytest.raises(ValueError):
        modes.mode_table(Hypersurface.ellipse(2.0, 1.0), 1.0, 10)
