import numpy as np
import pytest
from hypothesis import given, strategies as st

from deltashell import modes
from deltashell.asymptotics import (FitReport, check_remainder_order, default_window,
                                    degree_window, fit_constant)
from deltashell.geometry import Hypersurface
from deltashell.kinds import Kind

J = np.arange(1, 4001, dtype=float)


def test_exact_power_law():
    rep = fit_constant(2 * J**-3, 3, (500, 4000), c_ref=2.0, n=2)
    assert rep.C_est == pytest.approx(2.0, rel=1e-12)
    assert rep.rel_error <= 1e-12


def test_power_law_with_remainder():
    rep = fit_constant(2 * J**-3 * (1 + 1 / J), 3, (500, 4000), c_ref=2.0, rel_tol=1e-3, n=2)
    assert rep.rel_error < 1e-3
    assert rep.verdict == {"constant": True}
    assert rep.remainder_slope == pytest.approx(-1.0, abs=0.01)
    assert check_remainder_order(rep, -1.0)


def test_half_order_remainder_slope():
    rep = fit_constant(2 * J**-3 * (1 + J**-0.5), 3, (500, 4000), c_ref=2.0, n=2)
    assert rep.remainder_slope == pytest.approx(-0.5, abs=0.05)
    assert not check_remainder_order(rep, -1.0)


@given(st.floats(1e-6, 1e6))
def test_scale_equivariance(s):
    y = 2 * J**-3 * (1 + 1 / J + np.sin(J) / J**2)
    a = fit_constant(y, 3, (500, 4000), n=2).C_est
    b = fit_constant(s * y, 3, (500, 4000), n=2).C_est
    assert b == pytest.approx(s * a, rel=1e-12)


def test_median_fallback_for_non_finite_values():
    s = 3.0 * J**-3
    s[1000] = np.inf
    rep = fit_constant(s, 3, (500, 4000), n=2)
    assert rep.method == "median"
    assert rep.stderr == 0.0
    assert rep.C_est == pytest.approx(3.0, rel=1e-12)


def test_window_errors():
    s = 2 * J**-3
    with pytest.raises(ValueError, match="shorter"):
        fit_constant(s, 3, (100, 120), n=2)
    with pytest.raises(ValueError, match="outside"):
        fit_constant(s, 3, (100, 5000), n=2)
    with pytest.raises(ValueError, match="vanishes"):
        fit_constant(np.zeros(4000), 3, (500, 4000), c_ref=2.0, n=2)
    with pytest.raises(ValueError):
        fit_constant(s, 0.0, (500, 4000), n=2)
    with pytest.raises(ValueError):
        check_remainder_order(fit_constant(s, 3, (500, 4000), n=2), -1.0)


def test_windows():
    assert default_window(10000, 2) == (500, 4000)
    assert default_window(2251, 2) == (500, 2251)
    assert degree_window(300, 2000) == (90001, 2001**2)
    assert default_window(2001**2, 3) == (90001, 2001**2)
    lo, hi = default_window(300, 2)
    assert hi == 300 and hi - lo + 1 >= 50


def test_report_serializes():
    rep = fit_constant(2 * J**-3, 3, (500, 4000), n=2)
    d = rep.as_dict()
    assert set(d) == {f for f in FitReport.__dataclass_fields__}
    assert d["window"] == [500, 4000]


@pytest.mark.parametrize("shape,kind,strength,ref", [
    ("circle", Kind.DELTA_VS_FREE, {"alpha": 1.0}, 2.0),
    ("circle", Kind.DELTAPRIME_VS_NEUMANN, {"beta": 1.0}, 8.0),
])
def test_wider_windows_do_not_get_worse(shape, kind, strength, ref):
    surface = getattr(Hypersurface, shape)()
    spectrum = modes.krein_singular_values(kind, surface, 1.0, 4000, **strength)
    p = kind.exponent(surface.n)
    narrow = fit_constant(spectrum, p, (500, 2000), c_ref=ref)
    wide = fit_constant(spectrum, p, (500, 8000), c_ref=ref)
    width = 2 * narrow.stderr
    assert abs(wide.C_est - ref) <= abs(narrow.C_est - ref) + width
