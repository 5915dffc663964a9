"""Equivariant profiles, the spherical transform on the embedded spectrum and
the decomposition of its branch data into scalar generators.

Fourier convention: F^(eta) = int F(y) exp(-i y.eta) dy.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import product
from math import comb

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import eval_hermitenorm

from .branch import BranchData, build_branch_data
from .numerics import radial_quadrature, sphere_surface_area
from .reps import TauLabel
from .spherical import _sphere_sum, axis_coefficients, rule_frames, q_tau_quadratic_coeffs, q_tau_matrix


class DecayGuardViolation(ValueError):
    pass


class IllConditioned(RuntimeError):
    pass


# --- matrix-valued polynomials on R^n ---------------------------------------


def _mono_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _polymul(p, q):
    out = {}
    for ka, A in p.items():
        for kb, Bm in q.items():
            k = _mono_add(ka, kb)
            out[k] = out.get(k, 0) + A @ Bm
    return out


@lru_cache(maxsize=None)
def _q_as_polynomial(tau: TauLabel):
    n = tau.n
    if n == 3:
        mats = q_tau_matrix(tau, np.eye(3))
        return {tuple(int(i == j) for i in range(3)): mats[j] for j in range(3)}
    out = {}
    for (a, b), M in q_tau_quadratic_coeffs(tau).items():
        e = [0] * 4
        e[a] += 1
        e[b] += 1
        out[tuple(e)] = M
    return out


@lru_cache(maxsize=None)
def _q_powers(tau: TauLabel, top: int):
    eye = np.eye(tau.d_tau, dtype=complex)
    pw = [{(0,) * tau.n: eye}]
    Q = _q_as_polynomial(tau)
    for _ in range(top):
        pw.append(_polymul(pw[-1], Q))
    return pw


@lru_cache(maxsize=None)
def _radial_powers(n: int, top: int):
    """|eta|^{2k} as scalar monomial dicts."""
    sq = {tuple(2 * int(i == j) for i in range(n)): 1.0 for j in range(n)}
    pw = [{(0,) * n: 1.0}]
    for _ in range(top):
        cur = {}
        for ka, a in pw[-1].items():
            for kb, b in sq.items():
                k = _mono_add(ka, kb)
                cur[k] = cur.get(k, 0.0) + a * b
        pw.append(cur)
    return pw


def minimal_poly_reduction(data: BranchData) -> np.ndarray:
    """m with B^{a+1} = sum_{i <= a} m_i B^i (monic polynomial with roots lambda_s)."""
    coeffs = np.poly(np.asarray(data.lambdas, dtype=float))[::-1]  # increasing, monic
    return -coeffs[:-1]


# --- profiles -------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianPreset:
    """gamma_i(t) = sum_k coeffs[i][k] t^k exp(-width2 t / 2)."""

    coeffs: tuple  # tuple of tuples, one per generator index i
    width2: float = 1.0

    def gamma(self, i: int, t):
        t = np.asarray(t, dtype=float)
        if i >= len(self.coeffs):
            return np.zeros_like(t)
        poly = np.polynomial.polynomial.polyval(t, np.asarray(self.coeffs[i], dtype=float))
        return poly * np.exp(-self.width2 * t / 2.0)


@dataclass(frozen=True)
class GeneratorProfile:
    """F^(rho o) = sum_i gamma_i(rho^2) rho^{u i} B^i."""

    tau: TauLabel
    gammas: tuple  # callables t -> gamma_i(t); len a_tau + 1
    preset: GaussianPreset | None = None
    form: str = field(default="generator", init=False)

    @classmethod
    def from_preset(cls, tau: TauLabel, coeffs, width2: float = 1.0) -> "GeneratorProfile":
        a = tau.a_tau
        coeffs = tuple(tuple(float(c) for c in row) for row in coeffs)
        if len(coeffs) > a + 1:
            raise ValueError(f"at most {a + 1} generators for {tau}")
        coeffs = coeffs + ((0.0,),) * (a + 1 - len(coeffs))
        preset = GaussianPreset(coeffs, float(width2))
        gammas = tuple((lambda t, i=i: preset.gamma(i, t)) for i in range(a + 1))
        return cls(tau, gammas, preset)

    def gamma_values(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([np.broadcast_to(g(t), t.shape) for g in self.gammas], axis=1)

    def branch_values(self, rho) -> np.ndarray:
        """v_s(rho) = sum_i gamma_i(rho^2) (lambda_s rho^u)^i; shape (len(rho), a+1)."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        lam = np.asarray(self.tau.lambdas(), dtype=float)
        G = self.gamma_values(rho ** 2)
        x = np.outer(rho ** self.tau.u, lam)  # (m, S)
        powers = x[:, :, None] ** np.arange(G.shape[1])[None, None, :]
        return np.einsum("msi,mi->ms", powers, G).astype(complex)

    def fourier_axis(self, rho) -> np.ndarray:
        data = build_branch_data(self.tau)
        v = self.branch_values(rho)
        return np.einsum("ms,sab->mab", v, np.asarray(data.projections))

    # spatial side, closed form for presets
    @property
    def _expansion(self):
        return _preset_expansion(self.tau, self.preset)

    def spatial(self, y) -> np.ndarray:
        """F(y) from the Hermite closed form (presets only)."""
        if self.preset is None:
            raise ValueError("spatial values need a Gaussian preset")
        y = np.atleast_2d(np.asarray(y, dtype=float))
        monos, mats = self._expansion
        return np.tensordot(_hermite_features(y, monos, self.preset.width2), mats, axes=(1, 0))

    def axis_branch_coeffs(self, r) -> np.ndarray:
        """b_s(r) = tr(P_s F(r o)) / d_s from the spatial closed form."""
        if self.preset is None:
            raise ValueError("spatial values need a Gaussian preset")
        r = np.atleast_1d(np.asarray(r, dtype=float))
        monos, mats = self._expansion
        data = build_branch_data(self.tau)
        tr = np.einsum("sab,kba->ks", np.asarray(data.projections), mats) / np.asarray(data.weights)
        y = np.zeros((len(r), self.tau.n))
        y[:, 0] = r
        return _hermite_features(y, monos, self.preset.width2) @ tr

    def to_branch_form(self) -> "BranchProfile":
        return BranchProfile(self.tau, lambda r: self.axis_branch_coeffs(r), width=np.sqrt(self.preset.width2))


@lru_cache(maxsize=64)
def _preset_expansion(tau: TauLabel, preset: GaussianPreset):
    """Monomial expansion sum_alpha C_alpha eta^alpha of sum_{i,k} c_ik |eta|^{2k} Q(eta)^i."""
    a = len(preset.coeffs) - 1
    kmax = max(len(r) for r in preset.coeffs) - 1
    qp = _q_powers(tau, a)
    rp = _radial_powers(tau.n, kmax)
    acc = {}
    for i, row in enumerate(preset.coeffs):
        for k, c in enumerate(row):
            if c == 0:
                continue
            for ka, sc in rp[k].items():
                for kb, M in qp[i].items():
                    key = _mono_add(ka, kb)
                    acc[key] = acc.get(key, 0) + (c * sc) * M
    if not acc:
        acc[(0,) * tau.n] = np.zeros((tau.d_tau, tau.d_tau), dtype=complex)
    monos = sorted(acc)
    mats = np.array([acc[m] for m in monos])
    return tuple(monos), mats


def _hermite_features(y, monos, width2):
    """(2 pi)^-n int eta^alpha exp(-w |eta|^2 / 2) exp(i y.eta) d eta for each alpha."""
    n = y.shape[1]
    sc = np.sqrt(width2)
    z = y / sc
    gauss = np.exp(-np.sum(z ** 2, axis=1) / 2) * (2 * np.pi) ** (-n / 2)
    maxdeg = max(max(m) for m in monos)
    He = np.stack([eval_hermitenorm(k, z) for k in range(maxdeg + 1)], axis=0)  # (k, m, n)
    out = np.empty((len(y), len(monos)), dtype=complex)
    for col, alpha in enumerate(monos):
        deg = sum(alpha)
        f = (1j ** deg) * width2 ** (-(n + deg) / 2) * gauss
        for j, aj in enumerate(alpha):
            if aj:
                f = f * He[aj, :, j]
        out[:, col] = f
    return out


@dataclass(frozen=True)
class BranchProfile:
    """F(r o) = sum_s b_s(r) P_s with ``coeffs(r)`` returning shape (len(r), a+1).

    ``multiplier_power`` k means the profile stands for D_tau^k applied to the
    stored one; only its Fourier-side data is then available.
    """

    tau: TauLabel
    coeffs: object
    width: float = 1.0
    multiplier_power: int = 0
    form: str = field(default="branch", init=False)

    @classmethod
    def from_samples(cls, tau: TauLabel, r, values, width: float | None = None) -> "BranchProfile":
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=complex).reshape(len(r), tau.a_tau + 1)
        if r[0] == 0 and np.max(np.abs(values[0] - values[0, 0])) > 1e-8 * max(1.0, abs(values[0, 0])):
            raise ValueError("branch coefficients must agree at r = 0")
        re = CubicSpline(r, values.real, axis=0, extrapolate=False)
        im = CubicSpline(r, values.imag, axis=0, extrapolate=False)

        def coeffs(x):
            x = np.asarray(x, dtype=float)
            return np.nan_to_num(re(x) + 1j * im(x), nan=0.0)

        return cls(tau, coeffs, width if width is not None else float(r[-1]) / 12.0)

    def spatial_axis(self, r) -> np.ndarray:
        if self.multiplier_power:
            raise ValueError("spatial values are not available after apply_D on a branch profile")
        return np.asarray(self.coeffs(np.atleast_1d(r)), dtype=complex)


def _check_decay(tau, b, r):
    """Reject coefficients that are still large at the end of the radial grid."""
    peak = np.max(np.abs(b)) if b.size else 0.0
    tail = np.max(np.abs(b[r > 0.9 * r.max()])) if b.size else 0.0
    if peak and tail > peak * (1.0 + r.max()) ** (-(tau.n + 1)):
        raise DecayGuardViolation(f"branch coefficients do not decay: tail {tail:.2e}, peak {peak:.2e}")


def _radial_setup(profile: BranchProfile, rho_max: float, R: float | None, count: int | None):
    R = 12.0 * profile.width if R is None else R
    if count is None:
        count = int(80 + 2 * np.ceil(rho_max * R))
    return radial_quadrature(R, count, profile.tau.n)


@dataclass(frozen=True)
class BranchSamples:
    tau: TauLabel
    rho: np.ndarray
    values: np.ndarray  # (len(rho), a+1) complex

    def spectrum_coordinates(self):
        lam = np.asarray(self.tau.lambdas(), dtype=float)
        xi1 = np.repeat(self.rho[:, None] ** 2, len(lam), axis=1)
        xi2 = np.outer(self.rho ** self.tau.u, lam)
        return xi1, xi2


def fourier_axis(F, tau: TauLabel, rho, R: float | None = None, count: int | None = None,
                 method: str = "axis", degree: int | None = None) -> np.ndarray:
    """F^(rho o) as a full matrix.

    ``method="axis"`` assembles sum_s v_s(rho) P_s from the radially reduced
    pairing.  ``method="sphere"`` integrates sum_s b_s(r) P_s(omega) against
    exp(-i rho r omega_1) with the full sphere rule, so the result is not forced
    to commute with the projections; it is the route used for the Schur check.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    data = build_branch_data(tau)
    P = np.asarray(data.projections)
    if isinstance(F, GeneratorProfile) or method == "axis":
        v = spherical_transform(F, tau, rho, R=R, count=count).values
        return np.einsum("ms,sab->mab", v, P)
    if method != "sphere":
        raise ValueError(f"unknown method {method!r}")
    base = replace(F, multiplier_power=0)
    rule = _radial_setup(base, float(rho.max()), R, count)
    b = base.spatial_axis(rule.nodes)
    _check_decay(tau, b, rule.nodes)
    area = sphere_surface_area(tau.n)
    wr = rule.weights[:, None] * b  # (count, a+1)
    out = []
    for rh in rho:
        deg = degree or int(min(160, 20 + tau.u * data.a_tau + 2 * np.ceil(rh * rule.nodes.max())))
        sph, T = rule_frames(tau, deg)
        # radial sum first: c[s', k] = sum_r w_r b_s'(r) exp(-i rho r omega_k1)
        kern = np.exp(-1j * rh * np.outer(rule.nodes, sph.nodes[:, 0]))
        c = (wr.T @ kern) * sph.weights[None, :]
        acc = np.zeros((tau.d_tau, tau.d_tau), dtype=complex)
        for sp in range(data.a_tau + 1):
            acc += _sphere_sum(tau, data, sp, sph.nodes, c[sp][None, :], T)[0]
        out.append(area * acc)
    out = np.asarray(out)
    if F.multiplier_power:
        Bk = np.linalg.matrix_power(np.asarray(data.B), F.multiplier_power)
        out = out @ Bk * (rho ** (tau.u * F.multiplier_power))[:, None, None]
    return out


def schur_defect(Fhat, tau: TauLabel) -> float:
    """max_s ||[F^, P_s]|| relative to ||F^||."""
    P = np.asarray(build_branch_data(tau).projections)
    Fhat = np.atleast_3d(Fhat) if np.ndim(Fhat) == 2 else Fhat
    Fhat = Fhat.reshape(-1, tau.d_tau, tau.d_tau)
    worst = 0.0
    for M in Fhat:
        scale = max(np.linalg.norm(M), 1e-300)
        for Ps in P:
            worst = max(worst, np.linalg.norm(M @ Ps - Ps @ M) / scale)
    return worst


def spherical_transform(F, tau: TauLabel, rho_grid, R: float | None = None, count: int | None = None) -> BranchSamples:
    """Branch samples v_s(rho) = tr(P_s F^(rho o)) / d_s."""
    rho = np.atleast_1d(np.asarray(rho_grid, dtype=float))
    if isinstance(F, GeneratorProfile):
        return BranchSamples(tau, rho, F.branch_values(rho))
    data = build_branch_data(tau)
    a = data.a_tau
    power = F.multiplier_power
    base = replace(F, multiplier_power=0)
    rule = _radial_setup(base, float(rho.max()), R, count)
    r = rule.nodes
    b = base.spatial_axis(r)
    _check_decay(tau, b, r)
    area = sphere_surface_area(tau.n)
    wts = np.asarray(data.weights, dtype=float)
    vals = np.zeros((len(rho), a + 1), dtype=complex)
    for m, rh in enumerate(rho):
        for s in range(a + 1):
            c = axis_coefficients(tau, s, rh, -r)  # (len(r), a+1)
            vals[m, s] = area / tau.d_tau * np.sum(rule.weights[:, None] * b * wts[None, :] * c)
    if power:
        lam = np.asarray(data.lambdas, dtype=float)
        vals = vals * (np.outer(rho ** tau.u, lam) ** power)
    return BranchSamples(tau, rho, vals)


def apply_D(F, tau: TauLabel):
    """The profile of D_tau F (Fourier side: multiplication by Q)."""
    if isinstance(F, BranchProfile):
        return replace(F, multiplier_power=F.multiplier_power + 1)
    data = build_branch_data(tau)
    a, u = data.a_tau, tau.u
    m = minimal_poly_reduction(data)
    if F.preset is not None:
        old = F.preset.coeffs
        rows = [list(old[i - 1]) if i > 0 else [0.0] for i in range(a + 1)]
        top = old[a]
        for i in range(a + 1):
            shift = u * (a + 1 - i)
            if abs(m[i]) < 1e-12:
                continue
            if shift % 2:
                raise AssertionError("odd shift with nonzero reduction coefficient")
            k0 = shift // 2
            row = rows[i] + [0.0] * max(0, k0 + len(top) - len(rows[i]))
            for k, c in enumerate(top):
                row[k0 + k] += m[i] * c
            rows[i] = row
        return GeneratorProfile.from_preset(tau, rows, F.preset.width2)
    gs = F.gammas

    def shifted(i):
        def g(t):
            t = np.asarray(t, dtype=float)
            out = gs[i - 1](t) if i > 0 else np.zeros_like(t)
            return out + m[i] * np.abs(t) ** (u * (a + 1 - i) / 2) * gs[a](t)
        return g

    return GeneratorProfile(tau, tuple(shifted(i) for i in range(a + 1)))


def convolve(F1: GeneratorProfile, F2: GeneratorProfile) -> GeneratorProfile:
    """Profile whose Fourier data on the axis is the product F1^ F2^ (presets only)."""
    tau = F1.tau
    if F1.preset is None or F2.preset is None:
        raise ValueError("convolution is implemented for Gaussian presets")
    data = build_branch_data(tau)
    a, u = data.a_tau, tau.u
    c1, c2 = F1.preset.coeffs, F2.preset.coeffs
    # coefficients in the basis rho^{u i} B^i, i up to 2a, then reduce
    full = {}
    for i, r1 in enumerate(c1):
        for j, r2 in enumerate(c2):
            prod_row = np.polynomial.polynomial.polymul(r1, r2)
            full[i + j] = np.polynomial.polynomial.polyadd(full.get(i + j, [0.0]), prod_row)
    m = minimal_poly_reduction(data)
    for top in range(2 * a, a, -1):
        row = full.pop(top, None)
        if row is None:
            continue
        # B^top = B^{top-a-1} B^{a+1} = sum_i m_i B^{top-a-1+i}
        for i in range(a + 1):
            if abs(m[i]) < 1e-12:
                continue
            target = top - a - 1 + i
            shift = u * (top - target)
            if shift % 2:
                raise AssertionError("odd shift with nonzero reduction coefficient")
            padded = np.concatenate([np.zeros(shift // 2), m[i] * np.asarray(row)])
            full[target] = np.polynomial.polynomial.polyadd(full.get(target, [0.0]), padded)
    rows = [list(full.get(i, [0.0])) for i in range(a + 1)]
    return GeneratorProfile.from_preset(tau, rows, F1.preset.width2 + F2.preset.width2)


# --- decomposition --------------------------------------------------------------------


@dataclass(frozen=True)
class GammaTable:
    tau: TauLabel
    xi1: np.ndarray
    gammas: np.ndarray  # (len(xi1), a+1)
    residual: float


def decompose_gamma(samples: BranchSamples, tau: TauLabel | None = None, rho_floor: float = 0.1, tol: float = 1e-6) -> GammaTable:
    """Recover gamma_i(rho^2) from v_s(rho) = sum_i gamma_i(rho^2) (lambda_s rho^u)^i.

    Rows with rho below ``rho_floor`` are filled by a polynomial fit in rho^2
    of the recovered values on the nearest regular rows, since dividing by
    rho^{u i} there only amplifies rounding.
    """
    tau = tau or samples.tau
    lam = np.asarray(tau.lambdas(), dtype=float)
    a = len(lam) - 1
    rho = np.asarray(samples.rho, dtype=float)
    v = np.asarray(samples.values, dtype=complex)
    L = max(1.0, np.max(np.abs(lam)))
    V = (lam[:, None] / L) ** np.arange(a + 1)[None, :]
    z = np.linalg.solve(V, v.T).T  # z_i = gamma_i (rho^u L)^i
    residual = float(np.max(np.abs(z @ V.T - v)) / max(1.0, np.max(np.abs(v)))) if v.size else 0.0
    if residual > tol:
        raise IllConditioned(f"Vandermonde residual {residual:.2e}")
    gam = np.zeros_like(z)
    ok = rho >= rho_floor
    scale = np.outer(rho[ok] ** tau.u * L, np.ones(a + 1)) ** np.arange(a + 1)[None, :]
    gam[ok] = z[ok] / scale
    small = ~ok
    if np.any(small):
        if a == 0:
            gam[small] = z[small]
        else:
            idx = np.flatnonzero(ok)[: max(6, a + 2)]
            if idx.size < 2:
                raise IllConditioned("not enough regular rows to extrapolate near rho = 0")
            deg = min(3, idx.size - 1)
            for i in range(a + 1):
                if i == 0:
                    gam[small, 0] = z[small, 0]
                    continue
                cre = np.polyfit(rho[idx] ** 2, gam[idx, i].real, deg)
                cim = np.polyfit(rho[idx] ** 2, gam[idx, i].imag, deg)
                gam[small, i] = np.polyval(cre, rho[small] ** 2) + 1j * np.polyval(cim, rho[small] ** 2)
    return GammaTable(tau, rho ** 2, gam, residual)


def synthesize_profile(gammas, tau: TauLabel) -> GeneratorProfile:
    """Generator-form profile from gamma callables, a GammaTable, or preset coefficients."""
    if isinstance(gammas, GammaTable):
        xi1 = gammas.xi1
        cols = []
        for i in range(gammas.gammas.shape[1]):
            re = CubicSpline(xi1, gammas.gammas[:, i].real)
            im = CubicSpline(xi1, gammas.gammas[:, i].imag)
            cols.append(lambda t, re=re, im=im: re(t) + 1j * im(t))
        return GeneratorProfile(tau, tuple(cols))
    if callable(gammas[0]):
        gs = tuple(gammas) + tuple((lambda t: np.zeros_like(np.asarray(t, dtype=float))) for _ in range(tau.a_tau + 1 - len(gammas)))
        return GeneratorProfile(tau, gs)
    return GeneratorProfile.from_preset(tau, gammas)
