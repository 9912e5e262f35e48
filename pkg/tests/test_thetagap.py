import mpmath
import numpy as np
import pytest

from surface_forge import _fd
from surface_forge import frameflow as ff
from surface_forge import thetagap as tg
from surface_forge.errors import PathInconsistencyError, ThetaConvergenceError, ThetaDivisorError
from surface_forge.quatgeo import ComplexGrid

SD = tg.spectral_data([0.25])
SD2 = tg.spectral_data([0.3 * np.exp(0.5j), 0.5 * np.exp(2.5j)])


def test_curve_validation():
    with pytest.raises(ValueError):
        tg.HyperellipticCurve((1.5,))
    with pytest.raises(ValueError):
        tg.HyperellipticCurve((0.2, 0.4))


def test_genus_one_periods():
    pd = SD.periods
    assert pd.B.shape == (1, 1)
    assert pd.B[0, 0].real < 0 and abs(pd.B[0, 0].imag) < 1e-12
    assert pd.a_residual < 1e-8
    assert abs(tg.compute_periods(SD.curve, n=40).B[0, 0] - pd.B[0, 0]) < 1e-8


@pytest.mark.parametrize("sd", [SD, SD2])
def test_tau_reverses_a_cycles(sd):
    # the tau-image of a_i is a_i reversed: periods -2 pi i Id
    assert np.max(np.abs(tg.tau_a_periods(sd.periods) + 2j * np.pi * np.eye(sd.genus))) < 1e-8


def test_genus_two_period_matrix():
    B = SD2.B
    assert np.allclose(B, B.T)
    assert np.max(np.linalg.eigvalsh(B.real)) < 0


def test_theta_against_direct_sum():
    k = np.arange(-8, 9)
    assert abs(tg.theta(0.0, -2 * np.pi) - np.sum(np.exp(-np.pi * k ** 2))) < 1e-14
    assert abs(tg.theta(0.0, -2 * np.pi) - 1.0864348112) < 1e-10
    q = mpmath.exp(-mpmath.pi)
    assert abs(tg.theta(0.3, -2 * np.pi) - complex(mpmath.jtheta(3, 0.15j, q))) < 1e-12


def test_theta_even_and_quasi_periodic():
    rng = np.random.default_rng(1)
    B = SD2.B
    u = rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2))
    assert np.max(np.abs(tg.theta(u, B) - tg.theta(-u, B))) < 1e-13 * np.max(np.abs(tg.theta(u, B)))
    for n in range(2):
        e = np.eye(2)[n]
        lhs = tg.theta(u + B @ e, B)
        rhs = np.exp(-0.5 * B[n, n] - u[:, n]) * tg.theta(u, B)
        assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-10


def test_theta_gradient():
    u = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    val, grad = tg.theta(u, SD2.B, grad=True)
    h = 1e-6
    for n in range(2):
        e = np.eye(2)[n] * h
        fd = (tg.theta(u + e, SD2.B) - tg.theta(u - e, SD2.B)) / (2 * h)
        assert abs(fd - grad[n]) < 1e-7 * abs(val)


def test_theta_convergence_error():
    with pytest.raises(ThetaConvergenceError):
        tg.theta(0.0, 1.0)


def test_second_kind():
    sk = SD.second
    assert sk.a_residual_inf < 1e-8 and sk.a_residual_0 < 1e-8
    # Omega_inf behaves like -d sqrt(L) at infinity
    r = [sk.omega_inf_coeff(SD.curve, L * np.exp(0.3j)) * 2 * np.sqrt(L * np.exp(0.3j)) for L in (1e3, 1e4)]
    assert abs(r[1] + 1) < 1e-4 and abs(r[1] + 1) < abs(r[0] + 1) / 5
    assert np.max(np.abs(tg.b_period_inf_alt(SD.periods, sk) - sk.U)) < 1e-8


def _sg_residual(sd, g):
    u, imag = tg.sinh_gordon_u(g.z, sd, return_imag=True)
    return np.max(_fd.interior(np.abs(_fd.dzdzbar(u, g.hx, g.hy) + np.sinh(u)), 2)), imag, u


@pytest.mark.parametrize("sd", [SD, SD2])
def test_sinh_gordon(sd):
    g = ComplexGrid.centered(41, 41, 1e-3, 0.2 + 0.1j)
    r, imag, _ = _sg_residual(sd, g)
    assert r < 1e-5 and imag < 1e-10


def test_u_invariant_under_lattice_translation():
    g = ComplexGrid.centered(9, 9, 0.1)
    sd = tg.spectral_data([0.25], D=[0.4j])
    shifted = tg.spectral_data([0.25], D=[0.4j + 2j * np.pi])
    assert np.max(np.abs(tg.sinh_gordon_u(g.z, sd) - tg.sinh_gordon_u(g.z, shifted))) < 1e-12


def test_exact_uz():
    g = ComplexGrid.centered(21, 21, 1e-2, 0.1)
    u = tg.sinh_gordon_u(g.z, SD)
    uz = tg.sinh_gordon_uz(g.z, SD)
    assert np.max(_fd.interior(np.abs(_fd.dz(u, g.hx, g.hy, 8) - uz), 4)) < 1e-9


def test_divisor_proximity():
    sd = tg.spectral_data([0.25])
    sd.D = np.array([0.5 * sd.B[0, 0] + 1j * np.pi])
    with pytest.raises(ThetaDivisorError):
        tg.sinh_gordon_u(np.zeros(1), sd)


def test_frame_solves_cmc_system():
    g = ComplexGrid.centered(21, 21, 1e-3, 0.2 + 0.1j)
    ab = tg.abel_point(SD, np.exp(0.6j))
    fr = tg.finite_gap_frame(g.z, SD, ab)
    u, uz = tg.sinh_gordon_u(g.z, SD), tg.sinh_gordon_uz(g.z, SD)
    U, V = ff.cmc_matrices(u, uz, 0.5, ab.lam0)
    rz = _fd.dz(fr.Phi, g.hx, g.hy) - U @ fr.Phi
    rzb = _fd.dzbar(fr.Phi, g.hx, g.hy) - V @ fr.Phi
    assert np.max(_fd.interior(np.abs(rz), 2)) < 1e-8 and np.max(_fd.interior(np.abs(rzb), 2)) < 1e-8
    assert np.max(np.abs(np.linalg.det(fr.Phi) - fr.det_constant)) < 1e-8


def test_exact_t_derivative_matches_difference():
    g = ComplexGrid.centered(5, 5, 1e-2, 0.1)
    _, Pt, _ = tg.finite_gap_unitary_frame_t(g.z, SD, 0.3)
    _, d = ff.central_t_derivative(lambda t: tg.finite_gap_unitary_frame(g.z, SD, t)[0], 0.3, 1e-3)
    assert np.max(np.abs(Pt - d)) < 1e-8


def test_finite_gap_sym_surface():
    from surface_forge.quatgeo import estimate_fundamental_data
    g = ComplexGrid.centered(21, 21, 1e-3, 0.2 + 0.1j)
    s = tg.finite_gap_surface(SD2, g, 0.3)
    fd = estimate_fundamental_data(s)
    assert np.max(_fd.interior(np.abs(fd.H - 1), 2)) < 1e-3


def test_ray_through_cut():
    with pytest.raises(PathInconsistencyError):
        tg.abel_point(SD, 1.0 + 0j)


def test_periodicity_check():
    L0 = np.exp(0.6j)
    rep = tg.periodicity_check(SD, 0, 0, L0)
    assert rep["Z1"]["lattice"] == 0 and rep["Z2"]["frame"] == 0
    assert rep["omega_inf_at_P0"] > 0
    small = tg.periodicity_check(SD, 0.01, 0.02j, L0)
    for n in (2, 3):
        scaled = tg.periodicity_check(SD, 0.01 * n, 0.02j * n, L0)
        assert np.allclose(scaled["Z1"]["lattice_signed"], np.multiply(small["Z1"]["lattice_signed"], n))
        assert np.isclose(scaled["Z2"]["frame_signed"], n * small["Z2"]["frame_signed"])


def test_spectral_data_from_json():
    sd = tg.spectral_data_from_json({"genus": 1, "branch_points": [[0.25, 0.0]], "D": [0.0], "P0": [1.0, 0.0]})
    assert np.allclose(sd.B, SD.B) and sd.meta["P0"] == 1
    with pytest.raises(ValueError):
        tg.spectral_data_from_json({"genus": 2, "branch_points": [[0.25, 0.0]]})
