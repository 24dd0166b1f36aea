import numpy as np
import pytest

from deltashell import fd_oracle, modes
from deltashell.fd_oracle import RadialMesh, RadialOperators
from deltashell.geometry import Hypersurface
from deltashell.kinds import Kind

HS = (2e-3, 1e-3, 5e-4)
STRENGTH = {Kind.DELTA_VS_FREE: {"alpha": 1.0}, Kind.DELTAPRIME_VS_FREE: {"beta": 1.0},
            Kind.DELTAPRIME_VS_NEUMANN: {"beta": -1.0}, Kind.NEUMANN_VS_FREE: {}}


def surface(n):
    return Hypersurface.circle() if n == 2 else Hypersurface.sphere()


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [0, 1, 10])
def test_all_kinds_converge_at_second_order(n, k):
    table = modes.mode_table(surface(n), 1.0, k)
    errors = {kind: [] for kind in Kind}
    for h in HS:
        mesh = RadialMesh.build(n, 1.0, h, k, 1.0)
        ops = RadialOperators(mesh, 1.0)
        for kind, s in STRENGTH.items():
            s1, s2 = fd_oracle.fd_resolvent_difference(kind, mesh, 1.0, operators=ops,
                                                       return_second=True, **s)
            exact = modes.krein_mode_values(kind, table, **s)[k]
            errors[kind].append(abs(s1 - exact) / exact)
            # one mode carries a rank-one difference
            assert s2 <= 1e-10 * s1
    for kind, err in errors.items():
        assert err[-1] < 1e-4, kind
        assert min(fd_oracle.observed_orders(err)) >= 1.8, kind


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [0, 4])
def test_dtn_converges(n, k):
    ms = modes.mode_scalars(surface(n), 1.0, k)
    err_m, err_p = [], []
    for h in HS:
        pm, pp = fd_oracle.fd_dtn(RadialMesh.build(n, 1.0, h, k, 1.0), 1.0)
        err_m.append(abs(pm - ms.p_minus))
        err_p.append(abs(pp - ms.p_plus))
    assert min(fd_oracle.observed_orders(err_m)) >= 1.8
    assert min(fd_oracle.observed_orders(err_p)) >= 1.8


def test_zero_alpha_gives_zero():
    mesh = RadialMesh.build(2, 1.0, 1e-2, 0, 1.0)
    assert fd_oracle.fd_resolvent_difference(Kind.DELTA_VS_FREE, mesh, 1.0, alpha=0.0) == 0.0


def test_forms_are_symmetric():
    ops = RadialOperators(RadialMesh.build(3, 1.0, 1e-2, 2, 1.0), 1.0)
    for name, s in (("neumann", None), ("free", None), ("delta", 0.7), ("deltaprime", -2.0)):
        H = ops.form(name, s)
        assert abs(H - H.T).max() <= 1e-12 * abs(H).max()


def test_truncation_radius_is_harmless():
    base = RadialMesh.build(2, 1.0, 1e-3, 3, 1.0)
    far = RadialMesh.build(2, 1.0, 1e-3, 3, 1.0, R_out=2 * base.R_out)
    a = fd_oracle.fd_resolvent_difference(Kind.DELTA_VS_FREE, base, 1.0, alpha=1.0)
    b = fd_oracle.fd_resolvent_difference(Kind.DELTA_VS_FREE, far, 1.0, alpha=1.0)
    assert a == pytest.approx(b, rel=1e-9)


def test_invalid_meshes():
    with pytest.raises(ValueError):
        RadialMesh.build(2, 1.0, 3e-1, 0, 1.0)
    with pytest.raises(ValueError):
        RadialMesh.build(2, 1.0, 1e-2, 0, 1.0, R_out=5.0)
    with pytest.raises(ValueError):
        RadialMesh.build(4, 1.0, 1e-2, 0, 1.0)


def test_missing_strength():
    with pytest.raises(ValueError):
        fd_oracle.resolvent_pair(Kind.DELTAPRIME_VS_FREE)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("side", ["-", "+"])
@pytest.mark.parametrize("k", [0, 2])
def test_dirichlet_adjoint_identity_second_order(n, side, k):
    res = [fd_oracle.verify_adjoint_identity(RadialMesh.build(n, 1.0, h, k, 1.0), 1.0, side,
                                             "dirichlet", seed=k) for h in HS]
    assert res[-1] < 1e-5
    assert min(fd_oracle.observed_orders(res)) >= 1.8


def test_dirichlet_adjoint_identity_with_distant_data():
    # data supported well inside the disk still couples to the boundary
    bump = lambda r: np.where(r < 0.5, np.cos(np.pi * r) ** 2 * (0.5 - r) ** 3, 0.0)
    res = [fd_oracle.verify_adjoint_identity(RadialMesh.build(2, 1.0, h, 1, 1.0), 1.0, "-",
                                             "dirichlet", f=bump) for h in HS]
    assert min(fd_oracle.observed_orders(res)) >= 1.8


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("side", ["-", "+"])
def test_neumann_adjoint_identity_exact(n, side):
    mesh = RadialMesh.build(n, 1.0, 2e-3, 3, 1.0)
    for seed in range(3):
        assert fd_oracle.verify_adjoint_identity(mesh, 1.0, side, "neumann", seed=seed) <= 1e-12
    rng = np.random.default_rng(0)
    rough = lambda r: rng.standard_normal(r.size)
    assert fd_oracle.verify_adjoint_identity(mesh, 1.0, side, "neumann", f=rough) <= 1e-12


def test_observed_orders():
    np.testing.assert_allclose(fd_oracle.observed_orders([4.0, 1.0, 0.25]), [2.0, 2.0])
