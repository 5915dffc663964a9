"""Irreducible representations of SO(3) and SO(4) as explicit matrices.

Conventions
-----------
Spin-j matrices act on C^{2j+1} with basis ordered by weight m = j, j-1, ..., -j,
so basis index s carries weight m = j - s.

For n = 3 the so(3) basis X_1, X_2, X_3 (rotations about the coordinate axes,
[X_1, X_2] = X_3 cyclically) is sent to

    dtau(X_1) = -i J_z,   dtau(X_2) = -i J_x,   dtau(X_3) = -i J_y,

so B = -i dtau(X_1) = -J_z is diagonal with entries -mu + s.

For n = 4, R^4 is identified with the quaternions, (u, v) . y = u y v^{-1},
and U_j, V_j are the images of the quaternion units i, j, k in the two copies
of su(2).  Each copy is represented by dtau(U_j) = -2i J_{(z,x,y)[j]}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm


class InvalidTau(ValueError):
    pass


def _half(x) -> Fraction:
    f = Fraction(x).limit_denominator(2)
    if f.denominator not in (1, 2) or abs(float(f) - float(x)) > 1e-12:
        raise InvalidTau(f"{x!r} is not a half-integer")
    if f < 0:
        raise InvalidTau(f"spin parameter must be >= 0, got {x!r}")
    return f


@dataclass(frozen=True)
class TauLabel:
    """A K-type: tau_mu of SO(3) (n = 3) or tau_{nu,mu} of SO(4) (n = 4)."""

    n: int
    mu: Fraction
    nu: Fraction | None = None

    def __post_init__(self):
        if self.n not in (3, 4):
            raise InvalidTau(f"n must be 3 or 4, got {self.n!r}")
        object.__setattr__(self, "mu", _half(self.mu))
        if self.n == 3:
            if self.mu.denominator != 1:
                raise InvalidTau("half-integer mu does not give a representation of SO(3)")
            if self.nu is not None:
                raise InvalidTau("nu is only used for n = 4")
        else:
            if self.nu is None:
                raise InvalidTau("n = 4 needs nu")
            object.__setattr__(self, "nu", _half(self.nu))
            if (self.nu + self.mu).denominator != 1:
                raise InvalidTau(f"invalid pair: nu + mu = {self.nu + self.mu} is not an integer")

    @property
    def u(self) -> int:
        return 1 if self.n == 3 else 2

    @property
    def a_tau(self) -> int:
        if self.n == 3:
            return int(2 * self.mu)
        return int(2 * min(self.mu, self.nu))

    @property
    def d_tau(self) -> int:
        if self.n == 3:
            return int(2 * self.mu + 1)
        return int((2 * self.nu + 1) * (2 * self.mu + 1))

    @property
    def xi_prime(self) -> tuple:
        if self.n == 3:
            return (self.mu * (self.mu + 1),)
        return (2 * self.nu * (2 * self.nu + 2), 2 * self.mu * (2 * self.mu + 2))

    def lambdas(self) -> list[int]:
        """Closed-form eigenvalues of B on the branch spaces, s = 0..a_tau."""
        out = []
        for s in range(self.a_tau + 1):
            if self.n == 3:
                lam = -self.mu + s
            else:
                lam = 4 * (self.mu - s) * (self.nu - s) - 2 * s * (s + 1)
            assert lam.denominator == 1
            out.append(int(lam))
        return out

    def weights(self) -> list[int]:
        """Dimensions d_{sigma_s} of the branch spaces."""
        if self.n == 3:
            return [1] * (self.a_tau + 1)
        return [int(2 * (self.nu + self.mu - s) + 1) for s in range(self.a_tau + 1)]

    def as_dict(self) -> dict:
        d = {"n": self.n, "mu": float(self.mu)}
        if self.n == 4:
            d["nu"] = float(self.nu)
        return d

    def __str__(self):
        if self.n == 3:
            return f"tau_{self.mu}"
        return f"tau_({self.nu},{self.mu})"


def enumerate_taus(max_twice: int = 6):
    """All K-types of the verification range.

    n = 3: mu <= max_twice; n = 4: 2 nu, 2 mu <= max_twice with nu + mu integral.
    """
    out = [TauLabel(3, m) for m in range(max_twice + 1)]
    for a in range(max_twice + 1):
        for b in range(max_twice + 1):
            if (a + b) % 2 == 0:
                out.append(TauLabel(4, Fraction(b, 2), Fraction(a, 2)))
    return out


# --- spin matrices ------------------------------------------------------------


def spin_matrices(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hermitian (J_x, J_y, J_z) for spin ``j`` in the descending-weight basis."""
    j = float(j)
    dim = int(round(2 * j + 1))
    m = j - np.arange(dim)
    jz = np.diag(m).astype(complex)
    jp = np.zeros((dim, dim), dtype=complex)
    # J_+ e_m = sqrt((j - m)(j + m + 1)) e_{m+1}; e_{m+1} sits one slot up.
    for k in range(1, dim):
        mm = m[k]
        jp[k - 1, k] = np.sqrt((j - mm) * (j + mm + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


@dataclass(frozen=True)
class GeneratorImages:
    tau: TauLabel
    gens: tuple  # n=3: (G1, G2, G3); n=4: (U1, U2, U3, V1, V2, V3) on the full space
    factor_gens: tuple = field(default=())  # n=4: ((u1,u2,u3), (v1,v2,v3)) on each factor

    @property
    def dim(self) -> int:
        return self.gens[0].shape[0]

    def algebra_element(self, coeffs) -> np.ndarray:
        c = np.asarray(coeffs, dtype=float).ravel()
        if len(c) != len(self.gens):
            raise ValueError(f"expected {len(self.gens)} coefficients, got {len(c)}")
        return np.tensordot(c, np.asarray(self.gens), axes=(0, 0))

    def casimirs(self) -> list[np.ndarray]:
        if self.tau.n == 3:
            return [-sum(g @ g for g in self.gens)]
        return [-sum(g @ g for g in self.gens[:3]), -sum(g @ g for g in self.gens[3:])]


def su2_generators(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Images of the quaternion units i, j, k: -2i (J_z, J_x, J_y)."""
    jx, jy, jz = spin_matrices(j)
    return (-2j * jz, -2j * jx, -2j * jy)


def build_so3_rep(mu) -> tuple[TauLabel, GeneratorImages]:
    tau = TauLabel(3, mu)
    jx, jy, jz = spin_matrices(tau.mu)
    return tau, GeneratorImages(tau, (-1j * jz, -1j * jx, -1j * jy))


def build_so4_rep(nu, mu) -> tuple[TauLabel, GeneratorImages]:
    tau = TauLabel(4, mu, nu)
    left = su2_generators(tau.nu)
    right = su2_generators(tau.mu)
    il = np.eye(left[0].shape[0])
    ir = np.eye(right[0].shape[0])
    gens = tuple(np.kron(g, ir) for g in left) + tuple(np.kron(il, g) for g in right)
    return tau, GeneratorImages(tau, gens, (left, right))


def build_rep(tau: TauLabel) -> GeneratorImages:
    if tau.n == 3:
        return build_so3_rep(tau.mu)[1]
    return build_so4_rep(tau.nu, tau.mu)[1]


def group_element(gen: GeneratorImages, coeffs) -> np.ndarray:
    """tau(exp(sum_j c_j X_j)); for n = 4 ``coeffs`` is (c_U, c_V)."""
    return expm(gen.algebra_element(coeffs))


# --- the group acting on R^n -------------------------------------------------

SO3_BASIS = np.array(
    [
        [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
        [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
    ],
    dtype=float,
)


def quat_mul(p, q) -> np.ndarray:
    """Hamilton product of quaternions stored as (w, x, y, z); broadcasts."""
    p = np.asarray(p)
    q = np.asarray(q)
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conj(q) -> np.ndarray:
    q = np.array(q, dtype=float)
    q[..., 1:] *= -1
    return q


def quat_exp(c) -> np.ndarray:
    """exp(c_1 i + c_2 j + c_3 k) as a unit quaternion."""
    c = np.asarray(c, dtype=float)
    theta = np.linalg.norm(c)
    if theta == 0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    return np.concatenate([[np.cos(theta)], np.sin(theta) * c / theta])


def rotation_matrix(n: int, coeffs) -> np.ndarray:
    """The n x n rotation k = exp(sum c_j X_j) acting on R^n."""
    if n == 3:
        return expm(np.tensordot(np.asarray(coeffs, dtype=float), SO3_BASIS, axes=(0, 0)))
    cu, cv = np.asarray(coeffs, dtype=float).reshape(2, 3)
    u, v = quat_exp(cu), quat_exp(cv)
    vinv = quat_conj(v)
    return np.stack([quat_mul(quat_mul(u, e), vinv) for e in np.eye(4)], axis=1)


def rotation_to_point(n: int, eta) -> np.ndarray:
    """Lie-algebra coefficients of some k with k . o = eta.

    n = 3: axis-angle (Rodrigues) about o x eta; eta = -o uses angle pi about e_2.
    n = 4: (c_U, 0) with exp(c_U) = eta as a unit quaternion; eta = -1 uses the
    j-axis.  Returned shape is (3,) for n = 3 and (2, 3) for n = 4.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (n,):
        raise ValueError(f"eta must have shape ({n},)")
    nrm = np.linalg.norm(eta)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError("eta must be a unit vector")
    eta = eta / nrm
    c0 = float(np.clip(eta[0], -1.0, 1.0))
    angle = np.arccos(c0)
    if n == 3:
        axis = np.cross([1.0, 0.0, 0.0], eta)
    else:
        axis = eta[1:].copy()
    s = np.linalg.norm(axis)
    if s < 1e-15:
        axis = np.array([0.0, 1.0, 0.0]) if c0 < 0 else np.zeros(3)
    else:
        axis = axis / s
    c = angle * axis
    if n == 3:
        return c
    return np.stack([c, np.zeros(3)])
