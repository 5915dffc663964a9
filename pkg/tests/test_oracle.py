from fractions import Fraction

import pytest

from motion_spherical.oracle import (
    NotAnEigenvector,
    apply_model_B,
    blockwise_charpoly,
    charpoly_exact,
    check_commutators,
    exact_q_polys,
    expected_charpoly,
    model_vector,
    polynomial_model_eigenvalue,
    q_parity_exact,
    rational_B,
    rational_branch_check,
    rational_rep,
)
from motion_spherical.reps import TauLabel, enumerate_taus


@pytest.mark.parametrize("j", [0, Fraction(1, 2), 1, Fraction(3, 2), 3])
def test_rational_rep_commutators(j):
    assert check_commutators(rational_rep(j))


def test_charpoly_small_matrix():
    # det(tI - M) for M = [[1, 2], [3, 4]] is t^2 - 5t - 2
    assert charpoly_exact([[Fraction(1), Fraction(2)], [Fraction(3), Fraction(4)]]) == [-2, -5, 1]


def test_expected_charpoly_frozen():
    # tau_(1/2,1/2): (t - 1)^3 (t + 3)
    assert expected_charpoly(TauLabel(4, Fraction(1, 2), Fraction(1, 2))) == [-3, 8, -6, 0, 1]


@pytest.mark.parametrize("tau", enumerate_taus(), ids=str)
def test_rational_branch_check_all_types(tau):
    rep = rational_branch_check(tau)
    assert rep["pass"], rep.get("mismatch")


def test_blockwise_rejects_cross_label_coupling():
    B, labels = rational_B(TauLabel(3, 1))
    B = [list(r) for r in B]
    B[0][1] = Fraction(1)
    with pytest.raises(AssertionError):
        blockwise_charpoly(B, labels)


@pytest.mark.parametrize(
    "nu,mu,expected",
    [
        (Fraction(1, 2), Fraction(1, 2), [1, -3]),
        (1, 1, [4, -4, -8]),
        (Fraction(3, 2), Fraction(1, 2), [3, -5]),
        (3, 3, [36, 12, -8, -24, -36, -44, -48]),
    ],
)
def test_polynomial_model_frozen(nu, mu, expected):
    tau = TauLabel(4, mu, nu)
    got = [polynomial_model_eigenvalue(nu, mu, s) for s in range(tau.a_tau + 1)]
    assert got == expected == tau.lambdas()


def test_model_vector_bidegree_and_range():
    P = model_vector(1, Fraction(1, 2), 1)
    assert P.bidegree() == (2, 1)
    assert apply_model_B(P).bidegree() == (2, 1)
    with pytest.raises(IndexError):
        model_vector(1, Fraction(1, 2), 2)


def test_non_eigenvector_detected(monkeypatch):
    import motion_spherical.oracle as oracle

    real = oracle.model_vector

    def broken(nu, mu, s):
        P = real(nu, mu, s)
        key = next(iter(P))
        return P + oracle.BiPolynomial({key: 1})

    monkeypatch.setattr(oracle, "model_vector", broken)
    with pytest.raises(NotAnEigenvector):
        oracle.polynomial_model_eigenvalue(1, 1, 1)


def test_exact_q_polys_frozen():
    q = exact_q_polys(TauLabel(3, 1))
    assert q == [[1], [0, 1], [Fraction(-2, 3), 0, 1]]


@pytest.mark.parametrize("mu", range(7))
def test_q_parity_n3(mu):
    assert q_parity_exact(TauLabel(3, mu))
