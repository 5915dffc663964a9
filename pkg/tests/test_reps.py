from fractions import Fraction

import numpy as np
import pytest

from motion_spherical.reps import (
    InvalidTau,
    TauLabel,
    build_rep,
    enumerate_taus,
    group_element,
    quat_exp,
    quat_mul,
    rotation_matrix,
    rotation_to_point,
    spin_matrices,
)


def test_tau_validation():
    with pytest.raises(InvalidTau):
        TauLabel(3, Fraction(1, 2))
    with pytest.raises(InvalidTau):
        TauLabel(4, Fraction(1, 2), 1)
    with pytest.raises(InvalidTau):
        TauLabel(4, 1)
    with pytest.raises(InvalidTau):
        TauLabel(3, 1, 1)
    with pytest.raises(InvalidTau):
        TauLabel(5, 1)
    with pytest.raises(InvalidTau):
        TauLabel(3, -1)
    with pytest.raises(InvalidTau):
        TauLabel(3, 0.3)


def test_enumeration_counts():
    taus = enumerate_taus()
    assert sum(t.n == 3 for t in taus) == 7
    assert sum(t.n == 4 for t in taus) == 25
    assert len(set(taus)) == len(taus)


@pytest.mark.parametrize("tau", enumerate_taus(), ids=str)
def test_weights_sum_to_dimension(tau):
    assert sum(tau.weights()) == tau.d_tau
    assert len(tau.lambdas()) == tau.a_tau + 1
    assert len(set(tau.lambdas())) == tau.a_tau + 1


def test_label_frozen_values():
    t = TauLabel(4, Fraction(1, 2), Fraction(3, 2))
    assert (t.d_tau, t.a_tau, t.u) == (8, 1, 2)
    assert t.lambdas() == [3, -5] and t.weights() == [5, 3]
    assert str(t) == "tau_(3/2,1/2)"
    assert TauLabel(3, 2).lambdas() == [-2, -1, 0, 1, 2]


@pytest.mark.parametrize("j", [Fraction(1, 2), 1, Fraction(5, 2)])
def test_spin_commutators(j):
    jx, jy, jz = spin_matrices(j)
    assert np.allclose(jx @ jy - jy @ jx, 1j * jz)
    d = jz.shape[0]
    jj = float(j)
    assert np.allclose(jx @ jx + jy @ jy + jz @ jz, jj * (jj + 1) * np.eye(d))


@pytest.mark.parametrize("tau", [TauLabel(3, 2), TauLabel(4, 1, 2), TauLabel(4, Fraction(1, 2), Fraction(3, 2))], ids=str)
def test_rep_is_skew_hermitian_and_unitary(tau):
    gen = build_rep(tau)
    for g in gen.gens:
        assert np.allclose(g, -g.conj().T)
    U = group_element(gen, np.linspace(0.1, 0.6, len(gen.gens)))
    assert np.allclose(U @ U.conj().T, np.eye(gen.dim))


def test_casimir_scalar_n3():
    gen = build_rep(TauLabel(3, 3))
    (C,) = gen.casimirs()
    assert np.allclose(C, 12 * np.eye(7))


@pytest.mark.parametrize("n", [3, 4])
def test_rotation_to_point(n):
    rng = np.random.default_rng(3)
    for _ in range(5):
        eta = rng.normal(size=n)
        eta /= np.linalg.norm(eta)
        c = rotation_to_point(n, eta)
        R = rotation_matrix(n, c)
        assert np.allclose(R @ np.eye(n)[0], eta, atol=1e-12)
        assert np.allclose(R.T @ R, np.eye(n))
    anti = -np.eye(n)[0]
    assert np.allclose(rotation_matrix(n, rotation_to_point(n, anti)) @ np.eye(n)[0], anti)
    with pytest.raises(ValueError):
        rotation_to_point(n, 2 * np.eye(n)[0])


def test_quaternion_helpers():
    i, j = np.array([0.0, 1, 0, 0]), np.array([0.0, 0, 1, 0])
    assert np.allclose(quat_mul(i, j), [0, 0, 0, 1])
    assert np.allclose(quat_exp(np.array([np.pi / 2, 0, 0])), [0, 1, 0, 0], atol=1e-15)
