"""Quadrature rules, scalar spherical functions and finite-difference stencils.

Sphere rules are product rules with the polar axis along ``o = e_1``, so the
first node coordinate is the polar cosine.  All sphere weights refer to the
normalized surface measure (they sum to one).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np
from scipy import special


class UnsupportedDegree(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    degree: int = 0
    n: int = 0

    def integrate(self, values):
        """Contract ``values`` (first axis = nodes) against the weights."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def __len__(self):
        return len(self.weights)


def _check_n(n):
    if n not in (3, 4):
        raise ValueError(f"n must be 3 or 4, got {n!r}")


@lru_cache(maxsize=None)
def polar_rule(n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``t = eta_1`` and weights for the law of ``eta_1`` under d sigma.

    For S^2 that law is dt/2 on [-1, 1]; for S^3 it is (2/pi) sqrt(1-t^2) dt.
    Exact for polynomials in ``t`` of degree ``2*count - 1``.
    """
    _check_n(n)
    if n == 3:
        t, w = special.roots_legendre(count)
        w = w / 2.0
    else:
        t, w = special.roots_chebyu(count)
        w = w * (2.0 / np.pi)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=None)
def sphere_quadrature(n: int, degree: int) -> QuadratureRule:
    """Product rule on S^{n-1}, exact up to total polynomial ``degree``."""
    _check_n(n)
    degree = int(degree)
    if degree < 2:
        raise UnsupportedDegree(f"sphere rules need degree >= 2, got {degree}")
    if degree > 400:
        raise UnsupportedDegree(f"degree {degree} too large for a product rule")
    n_polar = degree // 2 + 1
    n_azim = degree + 2 if degree % 2 == 0 else degree + 1  # even count: antipodal symmetry
    phi = 2.0 * np.pi * np.arange(n_azim) / n_azim
    t3, w3 = special.roots_legendre(n_polar)
    s3 = np.sqrt(1.0 - t3 ** 2)
    pts2 = np.stack(
        [
            np.repeat(t3, n_azim),
            np.outer(s3, np.cos(phi)).ravel(),
            np.outer(s3, np.sin(phi)).ravel(),
        ],
        axis=1,
    )
    wts2 = np.repeat(w3 / 2.0, n_azim) / n_azim
    if n == 3:
        nodes, weights = pts2, wts2
    else:
        t4, w4 = polar_rule(4, n_polar)
        s4 = np.sqrt(1.0 - t4 ** 2)
        nodes = np.concatenate(
            [
                np.repeat(t4, len(wts2))[:, None],
                (s4[:, None, None] * pts2[None, :, :]).reshape(-1, 3),
            ],
            axis=1,
        )
        weights = np.outer(w4, wts2).ravel()
    nodes = nodes / np.linalg.norm(nodes, axis=1, keepdims=True)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, degree, n)


def radial_quadrature(R: float, count: int, n: int = 3) -> QuadratureRule:
    """Gauss-Legendre rule for ``int_0^R g(r) r^(n-1) dr``.

    The returned weights already contain the ``r^(n-1)`` Jacobian.  The tail
    beyond ``R`` is dropped; for profiles dominated by exp(-r^2/2) and the
    default R = 12 it is below 1e-30.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if count < 2:
        raise ValueError("count must be >= 2")
    x, w = special.roots_legendre(int(count))
    r = 0.5 * R * (x + 1.0)
    w = 0.5 * R * w * r ** (n - 1)
    return QuadratureRule(r, w, 2 * int(count) - 1, n)


def phi_scalar(n: int, t):
    """Scalar spherical function phi_1 at radius ``t``; phi(0) = 1."""
    _check_n(n)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    if n == 3:
        return np.sinc(t / np.pi)
    small = t < 1e-4
    safe = np.where(small, 1.0, t)
    out = 2.0 * special.j1(safe) / safe
    return np.where(small, 1.0 - t * t / 8.0 + t ** 4 / 192.0, out)


def sphere_surface_area(n: int) -> float:
    """|S^{n-1}| for the unnormalized measure."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


# --- finite differences -----------------------------------------------------


@dataclass(frozen=True)
class StencilConfig:
    h: float = 1e-3
    order: int = 4

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("stencil step must be positive")
        if self.order < 2 or self.order % 2:
            raise ValueError("central stencil order must be even and >= 2")


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple[int, ...], deriv: int) -> tuple[Fraction, ...]:
    """Exact weights w with sum_k w_k f(x + offsets_k h) ~ h^deriv f^(deriv)(x)."""
    m = len(offsets)
    if deriv >= m:
        raise ValueError("need more stencil points than the derivative order")
    # Solve sum_k w_k o_k^j / j! = delta_{j,deriv} exactly.
    A = [[Fraction(o) ** j / math.factorial(j) for o in offsets] for j in range(m)]
    b = [Fraction(int(j == deriv)) for j in range(m)]
    return tuple(_solve_fraction(A, b))


def _solve_fraction(A, b):
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [v / piv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def central_stencil(deriv: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and float weights of a central stencil of accuracy ``order``."""
    half = (deriv + 1) // 2 + order // 2 - 1
    offsets = tuple(range(-half, half + 1))
    w = fd_weights(offsets, deriv)
    return np.array(offsets, dtype=float), np.array([float(x) for x in w])


def forward_stencil(deriv: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """One-sided (t >= 0) stencil for the ``deriv``-th derivative at 0."""
    offsets = tuple(range(deriv + order))
    w = fd_weights(offsets, deriv)
    return np.array(offsets, dtype=float), np.array([float(x) for x in w])
