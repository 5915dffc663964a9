"""Matrix spherical functions, the multiplier polynomial Q and the embedded spectrum.

The spherical function of branch s at radius rho is evaluated in sphere form,

    Phi(y) = d_tau / d_s * int_{S^{n-1}} exp(i rho eta.y) P_s(eta) d sigma(eta),

where P_s(eta) = p_s(Q(eta)) = tau(k) P_s tau(k)^{-1} for any k with k o = eta.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .branch import BranchData, build_branch_data, matrix_poly
from .numerics import central_stencil, polar_rule, sphere_quadrature
from .reps import TauLabel, build_rep, rotation_to_point, su2_generators


class QuadratureDegreeTooLow(RuntimeError):
    pass


class StepTooCoarse(RuntimeError):
    pass


class WrongDimension(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumPoint:
    xi1: float
    xi2: float
    s: int
    rho: float


# --- rotating the basepoint --------------------------------------------------


def _expm_skew(A):
    """exp of a stack of skew-Hermitian matrices via eigh."""
    w, V = np.linalg.eigh(1j * A)
    return (V * np.exp(-1j * w)[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def _frame_coeffs(n: int, etas) -> np.ndarray:
    """Vectorized rotation_to_point for a stack of unit vectors."""
    nrm = np.linalg.norm(etas, axis=1)
    if np.any(np.abs(nrm - 1.0) > 1e-10):
        raise ValueError("eta must be a unit vector")
    etas = etas / nrm[:, None]
    c0 = np.clip(etas[:, 0], -1.0, 1.0)
    angle = np.arccos(c0)
    if n == 3:
        axis = np.cross(np.array([1.0, 0.0, 0.0]), etas)
    else:
        axis = etas[:, 1:].copy()
    s = np.linalg.norm(axis, axis=1)
    small = s < 1e-15
    axis[~small] /= s[~small, None]
    axis[small] = 0.0
    axis[small & (c0 < 0), 1] = 1.0
    c = angle[:, None] * axis
    if n == 3:
        return c
    return np.stack([c, np.zeros_like(c)], axis=1)


def frame_unitaries(tau: TauLabel, etas) -> np.ndarray:
    """tau(k_eta) for a stack of unit vectors; n = 4 returns only the left factor.

    For n = 4 the rotation is (u, 1) with u = eta as a quaternion, so tau(k) is
    tau_nu(u) (x) I and only the first factor is returned.
    """
    etas = np.atleast_2d(np.asarray(etas, dtype=float))
    coeffs = _frame_coeffs(tau.n, etas)
    gen = build_rep(tau)
    if tau.n == 3:
        A = np.tensordot(coeffs, np.asarray(gen.gens), axes=(1, 0))
    else:
        left = np.asarray(su2_generators(tau.nu))
        A = np.tensordot(coeffs[:, 0, :], left, axes=(1, 0))
    return _expm_skew(A)


@lru_cache(maxsize=8)
def rule_frames(tau: TauLabel, degree: int) -> tuple:
    """Sphere rule of the given degree with the frame unitaries of its nodes."""
    rule = sphere_quadrature(tau.n, degree)
    T = frame_unitaries(tau, rule.nodes)
    T.setflags(write=False)
    return rule, T


def _conjugate(tau: TauLabel, T, M) -> np.ndarray:
    """T M T^* for n = 3, (T x I) M (T x I)^* for n = 4; T is a stack."""
    if tau.n == 3:
        return T @ M @ np.conj(np.swapaxes(T, -1, -2))
    d1 = T.shape[-1]
    d2 = M.shape[0] // d1
    M4 = M.reshape(d1, d2, d1, d2)
    out = np.einsum("kab,bcde,kfd->kacfe", T, M4, np.conj(T), optimize=True)
    return out.reshape(-1, d1 * d2, d1 * d2)


def q_tau_matrix(tau: TauLabel, eta) -> np.ndarray:
    """The equivariant multiplier polynomial Q(eta); Q(o) = B, degree u."""
    eta = np.asarray(eta, dtype=float)
    single = eta.ndim == 1
    etas = np.atleast_2d(eta)
    if tau.n == 3:
        gen = build_rep(tau)
        out = -1j * np.tensordot(etas, np.asarray(gen.gens), axes=(1, 0))
    else:
        data = build_branch_data(tau)
        r2 = np.sum(etas ** 2, axis=1)
        out = np.zeros((len(etas), tau.d_tau, tau.d_tau), dtype=complex)
        nz = r2 > 0
        if np.any(nz):
            unit = etas[nz] / np.sqrt(r2[nz])[:, None]
            T = frame_unitaries(tau, unit)
            out[nz] = r2[nz, None, None] * _conjugate(tau, T, data.B)
    return out[0] if single else out


@lru_cache(maxsize=None)
def q_tau_quadratic_coeffs(tau: TauLabel) -> dict:
    """n = 4: matrices M_ab (a <= b) with Q(eta) = sum_{a<=b} eta_a eta_b M_ab."""
    if tau.n != 4:
        raise WrongDimension("quadratic expansion is for n = 4")
    E = np.eye(4)
    diag = {a: q_tau_matrix(tau, E[a]) for a in range(4)}
    out = {}
    for a in range(4):
        for b in range(a, 4):
            if a == b:
                out[(a, a)] = diag[a]
            else:
                out[(a, b)] = q_tau_matrix(tau, E[a] + E[b]) - diag[a] - diag[b]
    return out


def branch_projection_field(tau: TauLabel, s: int, etas) -> np.ndarray:
    """P_s(eta) = p_s(Q(eta)) by Lagrange interpolation in Q (reference route)."""
    data = build_branch_data(tau)
    return matrix_poly(data.lagrange_coeffs(s), q_tau_matrix(tau, etas))


# --- spherical functions --------------------------------------------------------


def _sphere_sum(tau: TauLabel, data: BranchData, s: int, nodes, scalars, T=None) -> np.ndarray:
    """sum_k scalars[m, k] P_s(eta_k) for each row m, using the frame contraction."""
    if T is None:
        T = frame_unitaries(tau, nodes)
    P = data.projections[s]
    if tau.n == 3:
        # M[m, a, a', c, c'] = sum_k c_mk T_k[a, a'] conj(T_k[c, c'])
        return np.einsum("mk,kab,bc,kdc->mad", scalars, T, P, np.conj(T), optimize=True)
    d1 = T.shape[-1]
    d2 = tau.d_tau // d1
    P4 = P.reshape(d1, d2, d1, d2)
    out = np.einsum("mk,kab,bcde,kfd->macfe", scalars, T, P4, np.conj(T), optimize=True)
    return out.reshape(scalars.shape[0], tau.d_tau, tau.d_tau)


def spherical_matrix(tau: TauLabel, s: int, rho: float, y, degree: int = 30, check: bool = False):
    """Phi^tau_{rho,s}(y) for one point (shape (n,)) or a stack (shape (m, n))."""
    data = build_branch_data(tau)
    if not 0 <= s <= data.a_tau:
        raise IndexError(f"branch {s} out of range")
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    ys = np.atleast_2d(y)
    if ys.shape[1] != tau.n:
        raise WrongDimension(f"points must live in R^{tau.n}")

    def evaluate(deg):
        rule, T = rule_frames(tau, deg)
        phase = np.exp(1j * rho * ys @ rule.nodes.T) * rule.weights[None, :]
        return tau.d_tau / data.weights[s] * _sphere_sum(tau, data, s, rule.nodes, phase, T)

    out = evaluate(degree)
    if check:
        ref = evaluate(2 * degree)
        err = np.max(np.abs(out - ref))
        if err > 1e-8:
            raise QuadratureDegreeTooLow(f"degree {degree} changes by {err:.2e} when doubled")
    return out[0] if single else out


def derivative_form(tau: TauLabel, s: int, rho: float, y, degree: int = 30):
    """(p_s o Q)(d) applied to the scalar spherical function phi_rho.

    Uses P(d) exp(i xi.y) = P(xi) exp(i xi.y) under the convention
    F^(eta) = int F(y) exp(-i y.eta) dy.
    """
    data = build_branch_data(tau)
    rule = sphere_quadrature(tau.n, degree)
    Qn = q_tau_matrix(tau, rho * rule.nodes)
    Pn = matrix_poly(data.lagrange_coeffs(s), Qn)
    ys = np.atleast_2d(np.asarray(y, dtype=float))
    phase = np.exp(1j * rho * ys @ rule.nodes.T) * rule.weights[None, :]
    out = np.einsum("mk,kab->mab", phase, Pn)
    return out[0] if np.ndim(y) == 1 else out


def derivative_form_constant(tau: TauLabel, s: int, y, degree: int = 30) -> complex:
    """Least-squares constant C with Phi_{1,s} = C (p_s o Q)(d) phi_1 at the points ``y``."""
    a = derivative_form(tau, s, 1.0, y, degree).ravel()
    b = spherical_matrix(tau, s, 1.0, y, degree).ravel()
    return complex(np.vdot(a, b) / np.vdot(a, a))


@lru_cache(maxsize=None)
def zonal_traces(tau: TauLabel, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Polar nodes t, weights, and kappa[j, s', s] = tr(P_{s'} P_s(eta(t_j))).

    eta(t) = (t, sqrt(1 - t^2), 0, ...); by stabilizer invariance the trace only
    depends on t.
    """
    data = build_branch_data(tau)
    t, w = polar_rule(tau.n, count)
    etas = np.zeros((len(t), tau.n))
    etas[:, 0] = t
    etas[:, 1] = np.sqrt(1.0 - t ** 2)
    T = frame_unitaries(tau, etas)
    a = data.a_tau
    kappa = np.zeros((len(t), a + 1, a + 1))
    for s in range(a + 1):
        Ps = _conjugate(tau, T, data.projections[s])
        for sp in range(a + 1):
            kappa[:, sp, s] = np.real(np.einsum("ab,kba->k", data.projections[sp], Ps))
    return t, w, kappa


def axis_coefficients(tau: TauLabel, s: int, rho: float, x, count: int | None = None) -> np.ndarray:
    """Coefficients c[m, s'] with Phi_{rho,s}(x_m o) = sum_{s'} c[m, s'] P_{s'}."""
    data = build_branch_data(tau)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if count is None:
        count = int(40 + data.a_tau * tau.u + np.ceil(abs(rho) * np.max(np.abs(x), initial=0.0)))
    t, w, kappa = zonal_traces(tau, count)
    phase = np.exp(1j * rho * np.outer(x, t)) * w[None, :]
    wts = np.asarray(data.weights, dtype=float)
    coef = phase @ kappa[:, :, s]
    return tau.d_tau / (data.weights[s] * wts[None, :]) * coef


# --- spectrum -----------------------------------------------------------------


def spectrum_points(tau: TauLabel, rho_grid) -> list[SpectrumPoint]:
    rho_grid = np.asarray(rho_grid, dtype=float)
    if np.any(rho_grid < 0):
        raise ValueError("rho must be nonnegative")
    out = []
    lam = tau.lambdas()
    for rho in rho_grid:
        if rho == 0:
            out.append(SpectrumPoint(0.0, 0.0, 0, 0.0))
            continue
        for s, l in enumerate(lam):
            out.append(SpectrumPoint(float(rho ** 2), float(l * rho ** tau.u), s, float(rho)))
    return out


def random_spectrum_points(tau: TauLabel, count: int, rho_max: float, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rho, s, xi) for random points of the embedded spectrum."""
    rho = rng.uniform(0.0, rho_max, size=count)
    s = rng.integers(0, tau.a_tau + 1, size=count)
    lam = np.asarray(tau.lambdas(), dtype=float)
    xi = np.stack([rho ** 2, lam[s] * rho ** tau.u], axis=1)
    return rho, s, xi


# --- checks ---------------------------------------------------------------------


def parity_check(tau: TauLabel, s: int, rho: float, y, degree: int = 30) -> float:
    if tau.n != 3:
        raise WrongDimension("the parity identity is for n = 3")
    y = np.asarray(y, dtype=float)
    a = spherical_matrix(tau, tau.a_tau - s, rho, y, degree)
    b = spherical_matrix(tau, s, rho, -y, degree)
    return float(np.max(np.abs(a - b)))


def _stencil_derivs(f, y, h, order):
    """First and second partial derivatives of a matrix-valued f at y."""
    off1, w1 = central_stencil(1, order)
    off2, w2 = central_stencil(2, order)
    offs = np.union1d(off1, off2)
    n = len(y)
    pts = [y + o * h * np.eye(n)[j] for j in range(n) for o in offs]
    vals = f(np.array(pts)).reshape(n, len(offs), *np.shape(f(y[None, :]))[1:])
    idx1 = np.searchsorted(offs, off1)
    idx2 = np.searchsorted(offs, off2)
    d1 = np.einsum("o,jo...->j...", w1, vals[:, idx1]) / h
    d2 = np.einsum("o,jo...->j...", w2, vals[:, idx2]) / h ** 2
    return d1, d2


def eigen_residuals(tau: TauLabel, s: int, rho: float, y=None, h: float = 1e-3, order: int = 4, degree: int = 30):
    """Relative residuals of Delta Phi = rho^2 Phi and D_tau Phi = rho^u lambda_s Phi.

    n = 3 uses central finite differences at the points ``y``; D_tau acts by right
    multiplication, D_tau F = -sum_j (d_j F) dtau(X_j).  n = 4 checks the
    multiplier identity on the Fourier side at the quadrature nodes.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    data = build_branch_data(tau)
    lam = data.lambdas[s]
    if tau.n == 4:
        rule, T = rule_frames(tau, degree)
        Qn = rho ** 2 * _conjugate(tau, T, data.B)
        Pn = _conjugate(tau, T, data.projections[s])
        scale = rho ** 2 * max(1.0, abs(lam))
        d_res = np.max(np.abs(Pn @ Qn - lam * rho ** 2 * Pn)) / scale
        lap_res = np.max(np.abs(np.sum((rho * rule.nodes) ** 2, axis=1) - rho ** 2)) / rho ** 2
        return float(lap_res), float(d_res)
    gens = build_rep(tau).gens
    if y is None:
        y = np.array([[0.3, -0.2, 0.5], [0.0, 0.0, 0.0], [-0.7, 0.4, 0.1]])
    ys = np.atleast_2d(np.asarray(y, dtype=float))
    f = lambda pts: spherical_matrix(tau, s, rho, pts, degree)
    lap_res = d_res = 0.0
    for yy in ys:
        phi = f(yy[None, :])[0]
        norm = max(np.max(np.abs(phi)), 1e-300)
        estimates = []
        for step in (h, 2 * h):
            d1, d2 = _stencil_derivs(f, yy, step, order)
            lap = -np.sum(d2, axis=0)
            dop = -sum(d1[j] @ gens[j] for j in range(3))
            estimates.append((lap, dop))
        (lap, dop), (lap2, dop2) = estimates
        rich = max(np.max(np.abs(lap - lap2)) / rho ** 2, np.max(np.abs(dop - dop2)) / rho) / norm
        if rich / (2 ** order - 1) > 1e-3:
            raise StepTooCoarse(f"Richardson error estimate {rich:.2e} at h={h}")
        lap_res = max(lap_res, np.max(np.abs(lap - rho ** 2 * phi)) / (rho ** 2 * norm))
        d_res = max(d_res, np.max(np.abs(dop - rho * lam * phi)) / (rho * max(1.0, abs(lam)) * norm))
    return float(lap_res), float(d_res)
