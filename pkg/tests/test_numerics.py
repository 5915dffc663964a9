from fractions import Fraction

import numpy as np
import pytest

from motion_spherical.numerics import (
    StencilConfig,
    UnsupportedDegree,
    central_stencil,
    fd_weights,
    forward_stencil,
    phi_scalar,
    polar_rule,
    radial_quadrature,
    sphere_quadrature,
    sphere_surface_area,
)


def test_fd_weights_frozen():
    assert fd_weights((-1, 0, 1), 2) == (Fraction(1), Fraction(-2), Fraction(1))
    assert fd_weights((-2, -1, 0, 1, 2), 1) == (Fraction(1, 12), Fraction(-2, 3), 0, Fraction(2, 3), Fraction(-1, 12))
    with pytest.raises(ValueError):
        fd_weights((0, 1), 2)


@pytest.mark.parametrize("deriv,order", [(1, 4), (2, 4), (2, 6)])
def test_central_stencil_order(deriv, order):
    offs, w = central_stencil(deriv, order)
    # exact on polynomials of degree deriv + order - 1
    for k in range(deriv + order):
        exact = np.prod(range(k, k - deriv, -1)) * 1.0 ** (k - deriv) if k >= deriv else 0.0
        got = np.dot(w, (1.0 + offs * 0.5) ** k) / 0.5 ** deriv
        assert got == pytest.approx(exact, abs=1e-9)


def test_forward_stencil_one_sided():
    offs, w = forward_stencil(3, 2)
    assert offs.min() == 0
    assert np.dot(w, (offs * 0.1) ** 3) / 0.1 ** 3 == pytest.approx(6.0)


def test_stencil_config_validation():
    with pytest.raises(ValueError):
        StencilConfig(h=0.0)
    with pytest.raises(ValueError):
        StencilConfig(order=3)


@pytest.mark.parametrize("n", [3, 4])
def test_sphere_rule_moments(n):
    rule = sphere_quadrature(n, 12)
    assert rule.integrate(np.ones(len(rule))) == pytest.approx(1.0)
    x = rule.nodes
    # E[x_1^2] = 1/n, E[x_1^4] = 3/(n(n+2)), odd moments vanish
    assert rule.integrate(x[:, 0] ** 2) == pytest.approx(1 / n)
    assert rule.integrate(x[:, -1] ** 4) == pytest.approx(3 / (n * (n + 2)))
    assert abs(rule.integrate(x[:, 0] ** 3 * x[:, 1])) < 1e-15


def test_sphere_rule_antipodal():
    nodes = sphere_quadrature(3, 10).nodes
    keys = {tuple(np.round(v, 12)) for v in nodes}
    assert all(tuple(np.round(-v, 12)) in keys for v in nodes)


def test_sphere_rule_degree_guard():
    with pytest.raises(UnsupportedDegree):
        sphere_quadrature(3, 1)
    with pytest.raises(ValueError):
        sphere_quadrature(5, 10)


@pytest.mark.parametrize("n", [3, 4])
def test_polar_rule_matches_sphere(n):
    t, w = polar_rule(n, 8)
    rule = sphere_quadrature(n, 14)
    assert np.dot(w, t ** 6) == pytest.approx(rule.integrate(rule.nodes[:, 0] ** 6))


def test_radial_rule_gaussian_moment():
    rule = radial_quadrature(12.0, 80, 3)
    # int_0^inf r^2 exp(-r^2/2) dr = sqrt(pi/2)
    assert rule.integrate(np.exp(-rule.nodes ** 2 / 2)) == pytest.approx(np.sqrt(np.pi / 2), rel=1e-13)
    with pytest.raises(ValueError):
        radial_quadrature(-1.0, 10)


def test_phi_scalar_closed_forms():
    t = np.array([0.0, 1e-6, 0.7, 3.0])
    assert phi_scalar(3, t) == pytest.approx(np.where(t > 0, np.sin(t) / np.where(t > 0, t, 1), 1.0))
    from scipy.special import j1

    assert phi_scalar(4, t[2:]) == pytest.approx(2 * j1(t[2:]) / t[2:])
    assert phi_scalar(4, 0.0) == 1.0
    with pytest.raises(ValueError):
        phi_scalar(3, -1.0)


def test_phi_scalar_is_sphere_average():
    rule = sphere_quadrature(4, 40)
    y = np.array([0.3, -0.4, 1.2, 0.5])
    avg = rule.integrate(np.exp(1j * rule.nodes @ y))
    assert avg.real == pytest.approx(phi_scalar(4, np.linalg.norm(y)), abs=1e-13)


def test_surface_areas():
    assert sphere_surface_area(3) == pytest.approx(4 * np.pi)
    assert sphere_surface_area(4) == pytest.approx(2 * np.pi ** 2)
