import math

import numpy as np
import pytest

from deltashell.errors import QuadratureError
from deltashell.quadrature import adaptive_gauss, periodic_trapezoid


def test_polynomial_exact():
    assert adaptive_gauss(lambda x: x**7 - 3 * x**2, -1.0, 2.0) == pytest.approx(
        (2**8 - 1) / 8 - (8 + 1), rel=1e-14)


def test_vector_valued_integrand():
    f = lambda x: np.stack([np.sin(x), np.cos(x)])
    out = adaptive_gauss(f, 0.0, math.pi, atol=1e-14)
    np.testing.assert_allclose(out, [2.0, 0.0], atol=1e-13)
    # the second component vanishes, so a purely relative tolerance cannot be met
    with pytest.raises(QuadratureError, match="atol"):
        adaptive_gauss(f, 0.0, math.pi)


def test_interior_kink_is_resolved():
    val = adaptive_gauss(lambda x: np.abs(x - 0.3), -1.0, 1.0, rtol=1e-11)
    assert val == pytest.approx(0.5 * (1.3**2 + 0.7**2), rel=1e-10)


def test_failure_raises():
    with pytest.raises(QuadratureError):
        adaptive_gauss(lambda x: 1.0 / np.abs(x - 0.3), 0.0, 1.0, max_levels=6)


def test_periodic_trapezoid_spectral():
    f = lambda t: np.exp(np.cos(t))
    # integral of e^{cos t} over a period is 2 pi I_0(1)
    assert periodic_trapezoid(f) == pytest.approx(2 * math.pi * 1.2660658777520082, rel=1e-14)
