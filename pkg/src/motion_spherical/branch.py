"""Branch data of a K-type: B, its eigenvalues, projections and q-polynomials."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .reps import GeneratorImages, TauLabel, build_rep


class EigenvalueMismatch(RuntimeError):
    pass


class DegenerateEigenspace(RuntimeError):
    pass


@dataclass(frozen=True)
class BranchData:
    tau: TauLabel
    B: np.ndarray
    lambdas: tuple
    weights: tuple
    projections: tuple
    qpolys: tuple  # increasing-power coefficient arrays, monic

    @property
    def a_tau(self) -> int:
        return len(self.lambdas) - 1

    def lagrange_coeffs(self, s: int) -> np.ndarray:
        """Coefficients (increasing powers) of p_s with p_s(lambda_j) = delta_sj."""
        lam = self.lambdas
        poly = np.poly1d([1.0])
        for j, lj in enumerate(lam):
            if j != s:
                poly = poly * np.poly1d([1.0, -lj]) / (lam[s] - lj)
        return poly.coeffs[::-1].copy()


def matrix_poly(coeffs, M) -> np.ndarray:
    """Evaluate sum_k coeffs[k] M^k by Horner; ``M`` may be a stack (..., d, d)."""
    M = np.asarray(M)
    eye = np.broadcast_to(np.eye(M.shape[-1]), M.shape)
    out = np.zeros_like(M, dtype=complex) + coeffs[-1] * eye
    for c in coeffs[-2::-1]:
        out = out @ M + c * eye
    return out


def build_B(gen: GeneratorImages) -> np.ndarray:
    tau = gen.tau
    if tau.n == 3:
        return -1j * gen.gens[0]
    left, right = gen.factor_gens
    return -sum(np.kron(a, b) for a, b in zip(left, right))


def weight_dimension(tau: TauLabel, s: int) -> int:
    if not 0 <= s <= tau.a_tau:
        raise IndexError(f"branch index {s} out of range 0..{tau.a_tau}")
    return tau.weights()[s]


def discrete_orthogonal_polys(nodes, weights, count) -> list[np.ndarray]:
    """Monic orthogonal polynomials for sum_k w_k delta_{x_k} (Stieltjes recurrence)."""
    x = np.asarray(nodes, dtype=float)
    w = np.asarray(weights, dtype=float)
    polys = [np.array([1.0])]
    vals = [np.ones_like(x)]
    prev_norm = None
    for k in range(count - 1):
        pk = vals[-1]
        nk = np.dot(w, pk * pk)
        alpha = np.dot(w, x * pk * pk) / nk
        nxt = np.zeros(len(polys[-1]) + 1)
        nxt[1:] += polys[-1]
        nxt[:-1] -= alpha * polys[-1]
        nv = (x - alpha) * pk
        if k > 0:
            beta = nk / prev_norm
            nxt[: len(polys[-2])] -= beta * polys[-2]
            nv -= beta * vals[-2]
        prev_norm = nk
        polys.append(nxt)
        vals.append(nv)
    return polys


def monic_q_polys(tau_or_data) -> list[np.ndarray]:
    data = tau_or_data if isinstance(tau_or_data, BranchData) else build_branch_data(tau_or_data)
    return list(data.qpolys)


@lru_cache(maxsize=None)
def build_branch_data(tau: TauLabel, tol: float = 1e-9) -> BranchData:
    gen = build_rep(tau)
    B = build_B(gen)
    lam = tuple(tau.lambdas())
    wts = tuple(tau.weights())
    expected = np.sort(np.repeat(lam, wts)).astype(float)
    got = np.sort(np.linalg.eigvalsh((B + B.conj().T) / 2))
    if np.max(np.abs(got - expected)) > tol:
        raise EigenvalueMismatch(f"{tau}: spectrum {got} != closed form {expected}")
    d = B.shape[0]
    projections = []
    for s in range(len(lam)):
        P = np.eye(d, dtype=complex)
        for j, lj in enumerate(lam):
            if j != s:
                P = P @ (B - lj * np.eye(d)) / (lam[s] - lj)
        P.setflags(write=False)
        projections.append(P)
    qpolys = tuple(discrete_orthogonal_polys(lam, wts, len(lam)))
    B.setflags(write=False)
    return BranchData(tau, B, lam, wts, tuple(projections), qpolys)


# --- isotypic decomposition of End(V_tau) ----------------------------------


def _ad_casimir(gens) -> np.ndarray:
    """Matrix of A -> -sum_j [G_j, [G_j, A]] acting on row-major vec(A)."""
    d = gens[0].shape[0]
    eye = np.eye(d)
    ad = [np.kron(g, eye) - np.kron(eye, g.T) for g in gens]
    return -sum(a @ a for a in ad)


def _factor_ladder(gens, scale) -> dict:
    """Orthonormal bases of W^l for one su(2)/so(3) factor.

    ``scale(l)`` is the expected ad-Casimir eigenvalue on W^l.
    """
    d = gens[0].shape[0]
    C = _ad_casimir(gens)
    vals, vecs = np.linalg.eigh((C + C.conj().T) / 2)
    out = {}
    jmax = d - 1  # End(V_j) = sum_{l=0}^{2j} W^l
    used = np.zeros(len(vals), dtype=bool)
    for ell in range(jmax + 1):
        sel = np.abs(vals - scale(ell)) < 1e-8 * max(1.0, scale(jmax))
        if sel.sum() != 2 * ell + 1:
            raise DegenerateEigenspace(f"W^{ell}: dimension {sel.sum()} != {2 * ell + 1}")
        used |= sel
        out[ell] = (float(np.mean(vals[sel])), vecs[:, sel])
    if not used.all():
        raise DegenerateEigenspace("unexpected ad-Casimir eigenvalues")
    return out


@dataclass(frozen=True)
class IsotypicLadder:
    tau: TauLabel
    factors: tuple  # one dict per factor: ell -> (eigenvalue, basis columns on vec(A))
    dims: tuple  # factor dimensions

    def eigenvalues(self) -> dict:
        if self.tau.n == 3:
            return {ell: ev for ell, (ev, _) in self.factors[0].items()}
        lf, rf = self.factors
        return {(j, k): (lf[j][0], rf[k][0]) for j in lf for k in rf}

    def dimension(self, key) -> int:
        if self.tau.n == 3:
            return self.factors[0][key][1].shape[1]
        j, k = key
        return self.factors[0][j][1].shape[1] * self.factors[1][k][1].shape[1]

    def project(self, A, key) -> np.ndarray:
        """HS-orthogonal projection of A onto W^l (n = 3) or W^{j,k} (n = 4).

        An integer ``key`` for n = 4 means the diagonal component W^{l,l}.
        """
        A = np.asarray(A, dtype=complex)
        if self.tau.n == 3:
            V = self.factors[0][key][1]
            v = A.ravel()
            return (V @ (V.conj().T @ v)).reshape(A.shape)
        j, k = (key, key) if np.isscalar(key) else key
        d1, d2 = self.dims
        V1 = self.factors[0][j][1]
        V2 = self.factors[1][k][1]
        T = A.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
        T = V1 @ (V1.conj().T @ T @ V2.conj()) @ V2.T
        return T.reshape(d1, d1, d2, d2).transpose(0, 2, 1, 3).reshape(A.shape)


@lru_cache(maxsize=None)
def ad_casimir_decomposition(tau: TauLabel) -> IsotypicLadder:
    gen = build_rep(tau)
    if tau.n == 3:
        lad = _factor_ladder(gen.gens, lambda l: l * (l + 1))
        return IsotypicLadder(tau, (lad,), (tau.d_tau,))
    left, right = gen.factor_gens
    scale = lambda l: 2 * l * (2 * l + 2)
    return IsotypicLadder(
        tau,
        (_factor_ladder(left, scale), _factor_ladder(right, scale)),
        (left[0].shape[0], right[0].shape[0]),
    )
