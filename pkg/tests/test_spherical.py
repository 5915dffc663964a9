import numpy as np
import pytest

from motion_spherical.branch import build_branch_data, matrix_poly
from motion_spherical.numerics import phi_scalar
from motion_spherical.reps import TauLabel
from motion_spherical.spherical import (
    QuadratureDegreeTooLow,
    WrongDimension,
    axis_coefficients,
    branch_projection_field,
    derivative_form_constant,
    eigen_residuals,
    frame_unitaries,
    parity_check,
    q_tau_matrix,
    q_tau_quadratic_coeffs,
    random_spectrum_points,
    spectrum_points,
    spherical_matrix,
)

SMALL = [TauLabel(3, 1), TauLabel(3, 2), TauLabel(4, 0.5, 0.5), TauLabel(4, 1, 1), TauLabel(4, 0.5, 1.5)]


@pytest.mark.parametrize("n,tau", [(3, TauLabel(3, 0)), (4, TauLabel(4, 0, 0))])
def test_trivial_type_is_scalar_spherical_function(n, tau):
    y = np.array([[0.2, -0.5, 0.9, 0.1][:n], [1.0, 0.0, 0.0, 0.0][:n]])
    got = spherical_matrix(tau, 0, 1.3, y)[:, 0, 0]
    assert np.allclose(got, phi_scalar(n, 1.3 * np.linalg.norm(y, axis=1)), atol=1e-12)


@pytest.mark.parametrize("tau", SMALL, ids=str)
def test_normalization(tau):
    for s in range(tau.a_tau + 1):
        assert np.allclose(spherical_matrix(tau, s, 1.0, np.zeros(tau.n), 20), np.eye(tau.d_tau), atol=1e-10)


def test_frames_conjugate_B_to_Q():
    for tau in (TauLabel(3, 2), TauLabel(4, 1, 1)):
        rng = np.random.default_rng(0)
        eta = rng.normal(size=(4, tau.n))
        eta /= np.linalg.norm(eta, axis=1, keepdims=True)
        T = frame_unitaries(tau, eta)
        Q = q_tau_matrix(tau, eta)
        B = build_branch_data(tau).B
        for k in range(4):
            if tau.n == 3:
                conj = T[k] @ B @ T[k].conj().T
            else:
                Tk = np.kron(T[k], np.eye(tau.d_tau // T.shape[-1]))
                conj = Tk @ B @ Tk.conj().T
            assert np.allclose(conj, Q[k], atol=1e-10)


def test_q_at_basepoint_is_B_and_homogeneous():
    for tau in (TauLabel(3, 1), TauLabel(4, 1, 0)):
        B = build_branch_data(tau).B
        o = np.eye(tau.n)[0]
        assert np.allclose(q_tau_matrix(tau, o), B)
        assert np.allclose(q_tau_matrix(tau, 2 * o), 2 ** tau.u * B)


def test_quadratic_expansion_n4():
    tau = TauLabel(4, 1, 1)
    coeffs = q_tau_quadratic_coeffs(tau)
    eta = np.array([0.3, -0.2, 0.7, 0.4])
    rebuilt = sum(eta[a] * eta[b] * M for (a, b), M in coeffs.items())
    assert np.allclose(rebuilt, q_tau_matrix(tau, eta), atol=1e-10)
    with pytest.raises(WrongDimension):
        q_tau_quadratic_coeffs(TauLabel(3, 1))


def test_projection_field_matches_lagrange_route():
    tau = TauLabel(4, 0.5, 1.5)
    eta = np.array([[0.0, 0.6, 0.0, 0.8]])
    data = build_branch_data(tau)
    P = branch_projection_field(tau, 1, eta)[0]
    assert np.allclose(P @ P, P, atol=1e-10)
    assert np.allclose(P, matrix_poly(data.lagrange_coeffs(1), q_tau_matrix(tau, eta))[0])


def test_parity_identity():
    rng = np.random.default_rng(5)
    for _ in range(5):
        tau = TauLabel(3, int(rng.integers(1, 4)))
        assert parity_check(tau, int(rng.integers(0, tau.a_tau + 1)), 1.7, rng.normal(size=3)) < 1e-10
    with pytest.raises(WrongDimension):
        parity_check(TauLabel(4, 1, 1), 0, 1.0, np.zeros(4))


@pytest.mark.parametrize("tau", [TauLabel(3, 1), TauLabel(4, 1, 1)], ids=str)
def test_eigen_residuals_small(tau):
    lap, dres = eigen_residuals(tau, 0, 1.0, degree=20)
    assert lap < 1e-4 and dres < 1e-4


def test_derivative_form_proportional():
    tau = TauLabel(3, 1)
    y = np.array([[0.2, 0.1, -0.4], [0.5, 0.5, 0.0]])
    C = derivative_form_constant(tau, 0, y)
    assert abs(C) > 0.1


def test_axis_coefficients_at_origin():
    tau = TauLabel(4, 1, 1)
    c = axis_coefficients(tau, 1, 1.0, np.array([0.0]))
    assert np.allclose(c[0], [1.0, 1.0, 1.0], atol=1e-12)


def test_axis_coefficients_match_full_matrix():
    tau = TauLabel(3, 2)
    data = build_branch_data(tau)
    x = np.array([0.4, 1.1])
    c = axis_coefficients(tau, 2, 1.5, x)
    y = np.zeros((2, 3))
    y[:, 0] = x
    M = spherical_matrix(tau, 2, 1.5, y)
    rebuilt = np.einsum("ms,sab->mab", c, np.asarray(data.projections))
    assert np.allclose(rebuilt, M, atol=1e-10)


def test_degree_check_raises():
    with pytest.raises(QuadratureDegreeTooLow):
        spherical_matrix(TauLabel(3, 2), 0, 10.0, np.array([3.0, 0.0, 0.0]), degree=4, check=True)


def test_spectrum_points():
    pts = spectrum_points(TauLabel(3, 1), [0.0, 2.0])
    assert [(p.xi1, p.xi2) for p in pts] == [(0.0, 0.0), (4.0, -2.0), (4.0, 0.0), (4.0, 2.0)]
    rho, s, xi = random_spectrum_points(TauLabel(4, 1, 1), 10, 2.0, np.random.default_rng(0))
    lam = np.asarray(TauLabel(4, 1, 1).lambdas(), float)
    assert np.allclose(xi[:, 1], lam[s] * rho ** 2)
