"""The acceptance suite: one check per criterion, each returning measured
residuals next to its tolerance.  Used by the ``verify`` CLI verb and by the
acceptance tests.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from . import extension as ext
from .branch import ad_casimir_decomposition, build_branch_data, matrix_poly
from .oracle import exact_q_polys, polynomial_model_eigenvalue, q_parity_exact, rational_branch_check
from .reps import TauLabel, enumerate_taus
from .spherical import eigen_residuals, parity_check, spherical_matrix
from .transform import (
    BranchSamples,
    GeneratorProfile,
    apply_D,
    decompose_gamma,
    fourier_axis,
    schur_defect,
    spherical_transform,
)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.title}: measured {self.measured:.3e} (tol {self.tolerance:.1e}) {self.detail}".rstrip()

    def as_dict(self) -> dict:
        return {
            "criterion": self.number, "title": self.title, "pass": bool(self.passed),
            "measured": float(self.measured), "tolerance": float(self.tolerance),
            "detail": self.detail, "seconds": round(self.seconds, 3),
        }


def _scale(tau: TauLabel) -> float:
    return float(max(1, max(abs(x) for x in tau.lambdas())))


def balanced_preset(tau: TauLabel, rng, width2: float = 1.0, terms: int = 2) -> GeneratorProfile:
    """Random Gaussian preset with gamma_i scaled by max|lambda|^-i so every term is O(1)."""
    L = _scale(tau)
    coeffs = [list(rng.normal(size=terms) / L ** i) for i in range(tau.a_tau + 1)]
    return GeneratorProfile.from_preset(tau, coeffs, width2)


# --- criteria ------------------------------------------------------------------------


def check_eigenvalues(taus) -> CriterionResult:
    worst = 0.0
    exact_ok = True
    rows = []
    for tau in taus:
        rep = rational_branch_check(tau)
        exact_ok &= rep["pass"]
        data = build_branch_data(tau)
        got = np.sort(np.linalg.eigvalsh((data.B + data.B.conj().T) / 2))
        want = np.sort(np.repeat(data.lambdas, data.weights)).astype(float)
        err = float(np.max(np.abs(got - want)))
        worst = max(worst, err)
        rows.append({"tau": str(tau), "exact": rep["pass"], "float_err": err})
    return CriterionResult(1, "eigenvalue formulas", exact_ok and worst <= 1e-9, worst, 1e-9,
                           f"exact charpoly match on {len(rows)} types: {exact_ok}", rows)


def check_polynomial_model(taus) -> CriterionResult:
    bad = []
    count = 0
    for tau in taus:
        if tau.n != 4:
            continue
        for s, lam in enumerate(tau.lambdas()):
            got = polynomial_model_eigenvalue(tau.nu, tau.mu, s)
            count += 1
            if got != lam:
                bad.append((str(tau), s, got, lam))
    return CriterionResult(2, "polynomial-model oracle", not bad, float(len(bad)), 0.0,
                           f"{count} (nu, mu, s) triples, mismatches {bad}")


def check_membership(taus) -> CriterionResult:
    """Relative HS distance of q^l(B) from its isotypic component, plus oracle agreement."""
    worst = worst_abs = worst_q = 0.0
    parity_ok = True
    rows = []
    for tau in taus:
        data = build_branch_data(tau)
        lad = ad_casimir_decomposition(tau)
        exact = exact_q_polys(tau)
        for ell, q in enumerate(data.qpolys):
            M = matrix_poly(q, data.B)
            res = np.linalg.norm(M - lad.project(M, ell))
            nrm = max(np.linalg.norm(M), 1e-300)
            worst = max(worst, res / nrm)
            worst_abs = max(worst_abs, res)
            ex = np.array([float(c) for c in exact[ell]])
            worst_q = max(worst_q, float(np.max(np.abs(ex - q)) / max(1.0, np.max(np.abs(ex)))))
            rows.append({"tau": str(tau), "ell": ell, "relative": res / nrm, "absolute": res})
        if tau.n == 3:
            parity_ok &= q_parity_exact(tau)
    ok = worst <= 1e-10 and parity_ok and worst_q <= 1e-12
    return CriterionResult(3, "isotypic membership", ok, worst, 1e-10,
                           f"(relative to ||q(B)||; absolute max {worst_abs:.2e}); n=3 exact parity {parity_ok}; "
                           f"float vs exact q-polys {worst_q:.1e}", rows)


def check_normalization(taus, degree: int = 20) -> CriterionResult:
    worst = 0.0
    for tau in taus:
        for s in range(tau.a_tau + 1):
            for rho in (0.5, 1.0, 2.0):
                val = spherical_matrix(tau, s, rho, np.zeros(tau.n), degree)
                worst = max(worst, float(np.max(np.abs(val - np.eye(tau.d_tau)))))
    return CriterionResult(4, "Phi(0) = I", worst <= 1e-8, worst, 1e-8, f"degree {degree}, rho in (0.5, 1, 2)")


def check_eigen_equations(taus) -> CriterionResult:
    worst3 = worst4 = 0.0
    rows = []
    for tau in taus:
        for s in range(tau.a_tau + 1):
            for rho in (0.5, 1.0, 2.0):
                if tau.n == 3:
                    lap, dres = eigen_residuals(tau, s, rho, h=1e-3, order=4, degree=30)
                    worst3 = max(worst3, lap, dres)
                else:
                    lap, dres = eigen_residuals(tau, s, rho, degree=20)
                    worst4 = max(worst4, lap, dres)
                rows.append({"tau": str(tau), "s": s, "rho": rho, "laplacian": lap, "D": dres})
    ok = worst3 <= 1e-4 and worst4 <= 1e-8
    # one measured value on the n = 3 scale: the n = 4 residual is rescaled by the tolerance ratio
    return CriterionResult(5, "eigen-equations", ok, max(worst3, worst4 * 1e4), 1e-4,
                           f"n=3 stencil residual {worst3:.2e} (tol 1e-4), n=4 Fourier-side {worst4:.2e} (tol 1e-8)", rows)


def check_parity(rng, count: int = 50) -> CriterionResult:
    worst = 0.0
    for _ in range(count):
        tau = TauLabel(3, int(rng.integers(1, 7)))
        s = int(rng.integers(0, tau.a_tau + 1))
        rho = float(rng.uniform(0.1, 3.0))
        y = rng.normal(size=3)
        worst = max(worst, parity_check(tau, s, rho, y))
    return CriterionResult(6, "parity identity (n=3)", worst <= 1e-8, worst, 1e-8, f"{count} random (tau, s, rho, y)")


def check_transform_sanity(taus, rng) -> CriterionResult:
    rho = np.linspace(0.0, 3.0, 31)
    gauss = 0.0
    for n, tau in ((3, TauLabel(3, 0)), (4, TauLabel(4, 0, 0))):
        F = GeneratorProfile.from_preset(tau, [[(2 * np.pi) ** (n / 2)]])
        ref = (2 * np.pi) ** (n / 2) * np.exp(-rho ** 2 / 2)
        v = spherical_transform(F.to_branch_form(), tau, rho).values[:, 0]
        gauss = max(gauss, float(np.max(np.abs(v - ref) / ref)))
        M = fourier_axis(F.to_branch_form(), tau, [0.5, 1.0, 2.0], method="sphere")[:, 0, 0]
        ref3 = (2 * np.pi) ** (n / 2) * np.exp(-np.array([0.5, 1.0, 2.0]) ** 2 / 2)
        gauss = max(gauss, float(np.max(np.abs(M - ref3) / ref3)))
    schur = 0.0
    rows = []
    for tau in taus:
        F = balanced_preset(tau, rng)
        M = fourier_axis(F.to_branch_form(), tau, [0.5, 1.0, 2.0], method="sphere")
        d = schur_defect(M, tau)
        schur = max(schur, d)
        rows.append({"tau": str(tau), "schur": d})
    ok = gauss <= 1e-8 and schur <= 1e-8
    return CriterionResult(7, "transform sanity", ok, max(gauss, schur), 1e-8,
                           f"Gaussian closed form {gauss:.2e}; Schur defect {schur:.2e} (full sphere route)", rows)


def check_multiplier(taus, rng) -> CriterionResult:
    """Gated metric: sup over the grid of the difference over sup of lambda rho^u GF, per tau."""
    rho = np.linspace(0.0, 3.0, 31)
    worst = worst_branch = worst_entry = 0.0
    rows = []
    for tau in taus:
        F = balanced_preset(tau, rng)
        lam = np.asarray(tau.lambdas(), dtype=float)
        mult = np.outer(rho ** tau.u, lam)
        GF = spherical_transform(F.to_branch_form(), tau, rho).values
        target = mult * GF
        scale = max(np.max(np.abs(target)), 1e-300)
        GDF = spherical_transform(apply_D(F, tau).to_branch_form(), tau, rho).values
        GDb = spherical_transform(apply_D(F.to_branch_form(), tau), tau, rho).values
        rel = float(np.max(np.abs(GDF - target)) / scale)
        relb = float(np.max(np.abs(GDb - target)) / scale)
        entry = float(np.max(np.abs(GDF - target) / (1.0 + np.abs(GF))))
        worst, worst_branch, worst_entry = max(worst, rel), max(worst_branch, relb), max(worst_entry, entry)
        rows.append({"tau": str(tau), "relative": rel, "branch_route": relb, "per_entry": entry})
    return CriterionResult(8, "multiplier property", max(worst, worst_branch) <= 1e-6, worst, 1e-6,
                           f"spatial D via shifted preset; branch-form route {worst_branch:.1e}; "
                           f"per-entry |diff|/(1+|GF|) {worst_entry:.1e}", rows)


def check_roundtrip(taus, rng) -> CriterionResult:
    """Errors are measured per rho in the scaled unknowns gamma_i (L rho^u)^i against max_s |v_s|."""
    rho = np.linspace(0.0, 3.0, 61)
    keep = rho >= 0.2 - 1e-12
    wg = wq = pg = pq = 0.0
    rows = []
    for tau in taus:
        F = balanced_preset(tau, rng)
        L = _scale(tau)
        true = F.gamma_values(rho ** 2)
        wts = np.outer(rho ** tau.u * L, np.ones(tau.a_tau + 1)) ** np.arange(tau.a_tau + 1)
        res = []
        for v in (F.branch_values(rho), spherical_transform(F.to_branch_form(), tau, rho).values):
            G = decompose_gamma(BranchSamples(tau, rho, v)).gammas
            err = np.abs(G - true)
            scaled = float(np.max((err * wts)[keep] / np.max(np.abs(v), axis=1)[keep, None]))
            plain = float(np.max(err[keep] / np.max(np.abs(true), axis=0)))
            res += [scaled, plain]
        wg, pg, wq, pq = max(wg, res[0]), max(pg, res[1]), max(wq, res[2]), max(pq, res[3])
        rows.append({"tau": str(tau), "generator_scaled": res[0], "generator_plain": res[1],
                     "quadrature_scaled": res[2], "quadrature_plain": res[3]})
    ok = wg <= 1e-10 and wq <= 1e-6
    # measured on the quadrature scale; the generator residual is rescaled by the tolerance ratio
    return CriterionResult(9, "decomposition roundtrip", ok, max(wg * 1e4, wq), 1e-6,
                           f"generator {wg:.1e} (tol 1e-10), quadrature {wq:.1e} (tol 1e-6); "
                           f"unscaled per-gamma errors {pg:.1e} / {pq:.1e}", rows)


def check_jets(taus, rng, count: int = 100) -> CriterionResult:
    exact_bad = 0
    worst_scaled = worst_plain = 0.0
    for tau in taus:
        if tau.a_tau < 1:
            continue
        m = 12 if tau.n == 3 else 6
        for _ in range(count):
            P = ext.random_polynomial(rng, 6, exact=True)
            J = ext.curve_jet(P, tau, m)
            systems = ext.jet_solve(J)
            D = ext.solved_derivatives(systems)
            T = ext.poly_derivs(P)
            for key, v in D.items():
                if ext.identifiable(tau, *key) and v != T.get(key, 0):
                    exact_bad += 1
            if ext.curve_jet(ext.derivs_to_poly(D), tau, m).values != J.values:
                exact_bad += 1
            Pf = {k: float(v) for k, v in P.items()}
            fsys = ext.jet_solve(ext.curve_jet(Pf, tau, m), tol=1e-6)
            for se, sf in zip(systems, fsys):
                if se.order > tau.a_tau:
                    continue
                nodes = sf.nodes
                L = max(1.0, max(abs(float(x)) for x in nodes))
                cmax = max(1e-300, max(abs(float(c)) for c in sf.rhs))
                xe = [float(v) for v in se.x]
                xf = [float(v) for v in sf.x]
                for q, (a, b) in enumerate(zip(xe, xf)):
                    worst_scaled = max(worst_scaled, abs(a - b) * L ** q / cmax)
                    worst_plain = max(worst_plain, abs(a - b) / max(1.0, abs(a)))
    ok = exact_bad == 0 and worst_scaled <= 1e-9
    return CriterionResult(10, "jet recovery", ok, worst_scaled, 1e-9,
                           f"exact mismatches {exact_bad}; float scaled {worst_scaled:.1e}, unscaled {worst_plain:.1e}")


def check_bounds(taus) -> CriterionResult:
    worst = Fraction(0)
    omega_ok = n3_ratio_ok = True
    n3_worst = Fraction(0)
    checked = 0
    for tau in taus:
        if tau.n == 4:
            for m in range(tau.a_tau + 1):
                rep = ext.cofactor_bounds(tau, m)
                worst = max(worst, rep["max_ratio_over_binom"])
                omega_ok &= rep["omega_ok"]
                checked += 1
        else:
            for m in range(int(tau.mu)):
                rep = ext.cofactor_bounds(tau, m)
                n3_ratio_ok &= rep["ratio_ok"]
                n3_worst = max(n3_worst, max(r / comb(m, q) for q, row in enumerate(rep["ratios"]) for r in row))
                checked += 1
    ident_ok = True
    above_one = []
    for mp1 in range(1, 9):
        for r in ext.n3_binomial_identity(mp1):
            ident_ok &= r["equal"]
            if not r["le_one"]:
                above_one.append(f"({mp1},{r['s']})={r['lhs']}")
    # the shifted-node bound is an n = 4 statement; the n = 3 systems are
    # covered by the exact identity, their ratios are reported alongside
    ok = worst <= 1 and omega_ok and ident_ok
    return CriterionResult(11, "conditioning bounds", ok, float(worst), 1.0,
                           f"{checked} exact systems; n=4 max ratio/binom {worst}, |omega| <= d_tau {omega_ok}; "
                           f"n=3 identity exact {ident_ok}; n=3 ratios within binom {n3_ratio_ok} (max ratio/binom {n3_worst}); "
                           f"identity value exceeds 1 at (m'+1, s) {', '.join(above_one)}")


def check_extensions(taus, rng, count: int = 200) -> CriterionResult:
    w_cut = w_bump = w_borel = w_pipe = 0.0
    smooth = 0.0
    for tau in taus:
        lam = np.asarray(tau.lambdas(), dtype=float)
        F = balanced_preset(tau, rng)
        r = rng.uniform(0.0, 3.0, count)
        s = rng.integers(0, tau.a_tau + 1, count)
        ref = F.branch_values(r)[np.arange(count), s]
        u = ext.cutoff_extension(F, tau)
        w_cut = max(w_cut, float(np.max(np.abs(u.restrict(r, s) - ref)) / np.max(np.abs(ref))))
        # composite: transform -> gamma table -> extension, back on the sample grid
        rho = np.linspace(0.0, 3.0, 31)
        samp = spherical_transform(F.to_branch_form(), tau, rho)
        u2 = ext.cutoff_extension(decompose_gamma(samp), tau)
        back = np.stack([u2.restrict(rho, np.full(len(rho), k)) for k in range(tau.a_tau + 1)], axis=1)
        w_pipe = max(w_pipe, float(np.max(np.abs(back - samp.values)) / np.max(np.abs(samp.values))))
        # flat branch data
        gs = [lambda x, l=l: np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-3) ** 2), 0.0) * (1.0 + l * x) for l in lam]
        v = ext.bump_extension(gs, tau)
        refb = np.array([gs[k](x) for x, k in zip(r, s)])
        w_bump = max(w_bump, float(np.max(np.abs(v.restrict(r, s) - refb))))
        h = 1e-3
        for x2 in (-1.0, 0.0, 0.5):
            xs = np.array([-2 * h, -h, 0.0, h, 2 * h])
            vals = np.real(v(xs, np.full(5, x2)))
            smooth = max(smooth, float(np.max(np.abs(np.diff(vals, 2))) / h ** 2))
        # finite Borel from a polynomial jet
        P = ext.random_polynomial(rng, 4, exact=False)
        m = 8 if tau.n == 3 else 4
        D = ext.solved_derivatives(ext.jet_solve(ext.curve_jet(P, tau, m), tol=1e-6))
        hb = ext.finite_borel(D, tau)
        rr = rng.uniform(0.0, 0.6, count)
        inside = np.hypot(rr ** 2, lam[s] * rr ** tau.u) < 0.5
        rb = ext.poly_eval(P, rr ** 2, lam[s] * rr ** tau.u)
        if inside.any():
            w_borel = max(w_borel, float(np.max(np.abs(hb.restrict(rr, s) - rb)[inside])))
    worst = max(w_cut, w_bump, w_borel, w_pipe)
    ok = worst <= 1e-7 and smooth <= 1e-6
    return CriterionResult(12, "extension restriction", ok, worst, 1e-7,
                           f"cutoff {w_cut:.1e}, pipeline {w_pipe:.1e}, bump {w_bump:.1e}, Borel {w_borel:.1e}; "
                           f"bump second difference at xi1 = 0: {smooth:.1e}")


DECAY_COEFFS = [[1.0, 0.5], [0.3], [0.2], [0.1], [0.1], [0.05], [0.05]]


def check_decay(taus) -> CriterionResult:
    rows = ext.decay_table(taus, DECAY_COEFFS)
    frac = {}
    for n in (3, 4):
        fam = [r for r in rows if r["n"] == n]
        if fam:
            frac[n] = sum(r["beyond_threshold"] for r in fam) / len(fam)
    ok = all(f >= 0.5 for f in frac.values())
    thr = {n: next(r["threshold_casimir"] for r in rows if r["n"] == n) for n in frac}
    return CriterionResult(13, "decay trend", ok, min(frac.values()), 0.5,
                           f"non-increasing from Casimir level {thr}; fraction of family beyond threshold {frac}", rows)


CRITERIA = {
    1: lambda taus, rng: check_eigenvalues(taus),
    2: lambda taus, rng: check_polynomial_model(taus),
    3: lambda taus, rng: check_membership(taus),
    4: lambda taus, rng: check_normalization(taus),
    5: lambda taus, rng: check_eigen_equations(taus),
    6: lambda taus, rng: check_parity(rng),
    7: lambda taus, rng: check_transform_sanity(taus, rng),
    8: lambda taus, rng: check_multiplier(taus, rng),
    9: lambda taus, rng: check_roundtrip(taus, rng),
    10: lambda taus, rng: check_jets(taus, rng),
    11: lambda taus, rng: check_bounds(taus),
    12: lambda taus, rng: check_extensions(taus, rng),
    13: lambda taus, rng: check_decay(taus),
}


def run_criterion(number: int, taus=None, seed: int = 0) -> CriterionResult:
    taus = list(enumerate_taus()) if taus is None else list(taus)
    rng = np.random.default_rng(seed + number)
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number](taus, rng)
    except Exception as exc:  # a crash is a failed criterion, with the reason kept
        res = CriterionResult(number, f"criterion {number}", False, float("nan"), float("nan"),
                              f"raised {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run_all(numbers=None, taus=None, seed: int = 0, echo=None) -> list[CriterionResult]:
    out = []
    for k in numbers or sorted(CRITERIA):
        res = run_criterion(k, taus, seed)
        if echo:
            echo(res.line())
        out.append(res)
    return out
