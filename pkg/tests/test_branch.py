import numpy as np
import pytest

from motion_spherical.branch import (
    EigenvalueMismatch,
    ad_casimir_decomposition,
    build_branch_data,
    discrete_orthogonal_polys,
    matrix_poly,
    weight_dimension,
)
from motion_spherical.reps import TauLabel

TAUS = [TauLabel(3, 1), TauLabel(3, 4), TauLabel(4, 1, 1), TauLabel(4, 0.5, 1.5), TauLabel(4, 2, 1)]


@pytest.mark.parametrize("tau", TAUS, ids=str)
def test_projections_resolve_identity(tau):
    data = build_branch_data(tau)
    P = np.asarray(data.projections)
    d = tau.d_tau
    assert np.allclose(P.sum(axis=0), np.eye(d), atol=1e-10)
    for s, Ps in enumerate(P):
        assert np.allclose(Ps @ Ps, Ps, atol=1e-9)
        assert np.allclose(Ps, Ps.conj().T, atol=1e-9)
        assert np.trace(Ps).real == pytest.approx(weight_dimension(tau, s))
        assert np.allclose(data.B @ Ps, data.lambdas[s] * Ps, atol=1e-9)


@pytest.mark.parametrize("tau", TAUS, ids=str)
def test_lagrange_coeffs(tau):
    data = build_branch_data(tau)
    for s in range(data.a_tau + 1):
        c = data.lagrange_coeffs(s)
        vals = np.polynomial.polynomial.polyval(np.asarray(data.lambdas, float), c)
        assert np.allclose(vals, np.eye(data.a_tau + 1)[s], atol=1e-10)
        assert np.allclose(matrix_poly(c, data.B), data.projections[s], atol=1e-8)


def test_discrete_orthogonal_polys_frozen():
    q = discrete_orthogonal_polys([-1.0, 0.0, 1.0], [1.0, 1.0, 1.0], 3)
    assert np.allclose(q[2], [-2 / 3, 0, 1])
    x = np.array([1.0, -3.0])
    q = discrete_orthogonal_polys(x, [3.0, 1.0], 2)
    assert np.dot([3.0, 1.0], np.polynomial.polynomial.polyval(x, q[1])) == pytest.approx(0.0)


@pytest.mark.parametrize("tau", TAUS, ids=str)
def test_q_of_B_in_isotypic_component(tau):
    data = build_branch_data(tau)
    lad = ad_casimir_decomposition(tau)
    for ell, q in enumerate(data.qpolys):
        M = matrix_poly(q, data.B)
        assert np.linalg.norm(M - lad.project(M, ell)) <= 1e-10 * np.linalg.norm(M)


def test_isotypic_dimensions_n3():
    lad = ad_casimir_decomposition(TauLabel(3, 2))
    assert [lad.dimension(l) for l in range(5)] == [1, 3, 5, 7, 9]


def test_matrix_poly_stack():
    M = np.stack([np.eye(2), 2 * np.eye(2)])
    out = matrix_poly([1.0, 0.0, 1.0], M)
    assert np.allclose(out[1], 5 * np.eye(2))


def test_weight_dimension_range():
    with pytest.raises(IndexError):
        weight_dimension(TauLabel(3, 1), 3)


def test_eigenvalue_mismatch_raised(monkeypatch):
    import motion_spherical.branch as br

    tau = TauLabel(3, 2)
    br.build_branch_data.cache_clear()
    monkeypatch.setattr(TauLabel, "lambdas", lambda self: [-2, -1, 0, 1, 3])
    with pytest.raises(EigenvalueMismatch):
        br.build_branch_data(tau)
    monkeypatch.undo()
    br.build_branch_data.cache_clear()
