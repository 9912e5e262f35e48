import numpy as np
import pytest

from surface_forge import bonnetpair as bp
from surface_forge.errors import (ImaginaryLeakError, NonImmersionError, NormalizationError,
                                  BonnetPairError)
from surface_forge.quatgeo import ComplexGrid, estimate_fundamental_data, qnorm2

G = ComplexGrid.centered(41, 41, 1e-2, 0.3 + 0.2j)
R = bp.cylinder_fixture(G)
F1, F2 = bp.bonnet_pair_from_isothermic(R, order=8)
FD1 = estimate_fundamental_data(F1, order=8)
FD2 = estimate_fundamental_data(F2, order=8)
M = 4


def cut(a):
    return np.abs(a)[M:-M, M:-M]


def test_isothermic_residual4():
    assert bp.isothermic_residual4(R).total < 1e-12
    g = ComplexGrid.centered(21, 21, 0.05, 0.2)
    f = bp.quat_surface_from_function(lambda x, y: np.stack([0 * x, x + y * y, y, 0 * x], -1), g)
    assert bp.isothermic_residual4(f).total > 0.1


def test_isothermic_sphere_second_order():
    # unit sphere in curvature-line conformal coordinates (Mercator)
    def res(h):
        g = ComplexGrid.centered(21, 21, h, 0.1 + 0.2j)
        f = bp.quat_surface_from_function(
            lambda x, y: np.stack([0 * x, np.cos(y) / np.cosh(x), np.sin(y) / np.cosh(x), np.tanh(x)], -1), g)
        return bp.isothermic_residual4(f, order=2, margin=2).total
    r1, r2 = res(0.02), res(0.01)
    assert r2 < 1e-3 and r1 / r2 > 3.5


def test_non_immersion():
    f = bp.QuatSurface(np.zeros((9, 9, 4)), ComplexGrid.centered(9, 9, 0.1))
    with pytest.raises(NonImmersionError):
        bp.isothermic_residual4(f)


def test_dual_of_cylinder():
    d = bp.dual_surface(R)
    x, y = G.z.real, G.z.imag
    want = np.stack([0 * x, np.cos(x), np.sin(x), -y], -1)
    shift = d.f - want
    assert np.max(np.abs(shift - shift[G.center])) < 1e-8
    assert d.meta["closedness"] < 1e-12
    dd = bp.dual_surface(d)
    shift = dd.f - R.f
    assert np.max(np.abs(shift - shift[G.center])) < 1e-8


def test_stereographic():
    assert np.allclose(bp.stereographic_T(np.zeros(3)), [1, 0, 0, 0])
    rng = np.random.default_rng(3)
    v = rng.normal(size=(200, 3))
    v *= (0.9 * rng.random(200) / np.linalg.norm(v, axis=1))[:, None]
    assert np.max(np.abs(qnorm2(bp.stereographic_T(v)) - 1)) < 1e-12
    with pytest.raises(NonImmersionError):
        bp.stereographic_T(np.array([0.0, 0.0, 0.0, 0.0]) + np.array([1.0, 0, 0, 0]))


def test_stereographic_derivative():
    def err(h):
        g = ComplexGrid.centered(11, 11, h, 0.2)
        Rf = bp.cylinder_fixture(g)
        Rs = bp.QuatSurface(0.5 * Rf.f, g, 0.5 * Rf.fx, 0.5 * Rf.fy)
        T = bp.stereographic_T(Rs.f)
        exact = bp.stereographic_dT(Rs.f, Rs.fx)
        fd = (T[2:] - T[:-2]) / (2 * h)
        return np.max(np.abs(fd - exact[1:-1]))
    e1, e2 = err(0.02), err(0.01)
    assert e2 < 1e-4 and e1 / e2 > 3.5


def test_pair_invariants():
    assert F1.meta["real_leak"] < 1e-12 and F1.meta["path_defect"] < 1e-8
    assert np.max(cut(np.exp(FD1.u) - np.exp(FD2.u))) < 1e-8
    assert np.max(cut(np.abs(FD1.Q) - np.abs(FD2.Q))) < 1e-8
    assert np.max(cut(FD1.H - FD2.H)) < 1e-4
    assert np.min(cut(FD1.Q - FD2.Q)) > 0.1


def test_hopf_difference_holomorphic():
    dec = bp.decompose_hopf(FD1.Q, FD2.Q)
    assert bp.holomorphy_residual(dec.h, G, 8) < 1e-8
    assert dec.max_imag < 1e-8
    assert np.allclose(dec.h, -1j, atol=1e-8)


def test_pair_from_t_input():
    T = bp.QuatSurface(bp.stereographic_T(0.5 * R.f), G)
    T.fx = bp.stereographic_dT(0.5 * R.f, 0.5 * R.fx)
    T.fy = bp.stereographic_dT(0.5 * R.f, 0.5 * R.fy)
    G1, G2 = bp.bonnet_pair_from_isothermic(T, kind="T", order=8)
    a, b = estimate_fundamental_data(G1, order=8), estimate_fundamental_data(G2, order=8)
    assert np.max(cut(np.exp(a.u) - np.exp(b.u))) < 1e-8
    assert np.max(cut(a.H - b.H)) < 1e-4
    with pytest.raises(NormalizationError):
        bp.bonnet_pair_from_isothermic(R, kind="T")
    with pytest.raises(ImaginaryLeakError):
        bp.bonnet_pair_from_isothermic(T, kind="R")
    with pytest.raises(BonnetPairError):
        bp.bonnet_pair_from_isothermic(R, kind="X")


def test_decompose_constructed():
    Q1, Q2 = np.full(5, 0.5 * (1j - 1)), np.full(5, 0.5 * (1j + 1))
    dec = bp.decompose_hopf(Q1, Q2)
    assert np.allclose(dec.h, 1) and np.allclose(dec.alpha, 1) and not dec.mask.any()
    with pytest.raises(BonnetPairError):
        bp.decompose_hopf(Q1, Q1)
    with pytest.raises(ImaginaryLeakError):
        bp.decompose_hopf(Q1, Q2 + 0.3)
    masked = bp.decompose_hopf(np.array([0.5 * (1j - 1), 0.0]), np.array([0.5 * (1j + 1), 1e-9]))
    assert masked.mask.tolist() == [False, True]


def test_lax_structure():
    u, uz, H = 0.3, 0.1 - 0.2j, 0.7
    Q = 0.4 + 0.5j
    U0, V0 = bp.pair_lax_UV(u, uz, H, Q, 0.0)
    assert np.all(U0[:2, 2:] == 0) and np.all(U0[2:, :2] == 0)
    assert np.all(V0[:2, 2:] == 0) and np.all(V0[2:, :2] == 0)
    D = np.diag([1, 1, -1, -1])
    for lam in (0.3, 1.2j):
        U, V = bp.pair_lax_UV(u, uz, H, Q, lam)
        Um, Vm = bp.pair_lax_UV(u, uz, H, Q, -lam)
        assert np.allclose(Um, D @ U @ D) and np.allclose(Vm, D @ V @ D)
    # real Q: both diagonal blocks coincide (isothermic Lax pair)
    U, _ = bp.pair_lax_UV(u, uz, H, 0.4, 0.5)
    assert np.allclose(U[:2, :2], U[2:, 2:])


def test_lax_zero_curvature_on_pipeline_data():
    from surface_forge import _fd
    from surface_forge.frameflow import FramePotentials, zero_curvature_residual
    uz = _fd.dz(FD1.u, G.hx, G.hy, 8)
    for lam in (0.0, 0.7, 0.5j):
        U, V = bp.pair_lax_UV(FD1.u, uz, FD1.H, FD1.Q, lam)
        assert zero_curvature_residual(FramePotentials(G, U, V), order=8) < 1e-8


@pytest.mark.parametrize("method", ["exact", "fd"])
def test_sym_pair_reproduces_mates(method):
    pf = bp.pair_frame(FD1, method=method, order=8)
    sp = bp.sym_pair_immersion(pf)
    assert sp.structure < 1e-12
    assert bp.rigid_distance(sp.F1.F, F1.F) < 1e-8
    assert bp.rigid_distance(sp.F2.F, F2.F) < 1e-8
    if method == "fd":
        assert pf.meta["richardson_l"] < 1e-6


def test_sym_pair_duality_route():
    pf = bp.pair_frame(FD1, method="exact", order=8)
    sp = bp.sym_pair_immersion(pf)
    T = bp.QuatSurface(sp.T, G)
    G1, _ = bp.bonnet_pair_from_isothermic(T, kind="T", order=8, tol=1e-6)
    assert bp.rigid_distance(G1.F, sp.F1.F) < 1e-6


def test_normalization_required():
    fd = estimate_fundamental_data(F1, order=8)
    fd.Q = 2 * fd.Q
    with pytest.raises(NormalizationError):
        bp.pair_frame(fd)
