"""Jets of branch data at the origin, the Vandermonde jet systems, and
Schwartz-type extensions of branch data to the plane.

Bivariate polynomials are dicts {(p, q): c} for c xi1^p xi2^q.  Derivative
tables are dicts {(p, q): d_1^p d_2^q u(0, 0)}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .numerics import forward_stencil
from .reps import TauLabel
from .spherical import WrongDimension


class NoisyJet(RuntimeError):
    pass


class InconsistentJet(ValueError):
    pass


class BoundViolation(AssertionError):
    pass


class HypothesisViolation(ValueError):
    pass


# --- smooth cutoffs ---------------------------------------------------------------


def _psi(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x):
    """C^infinity step: 0 for x <= 0, 1 for x >= 1."""
    a = _psi(x)
    return a / (a + _psi(1.0 - np.asarray(x, dtype=float)))


def bump(x):
    """Even C^infinity bump: 1 on [-1/4, 1/4], 0 outside (-1/2, 1/2)."""
    return smooth_step(4.0 * (0.5 - np.abs(np.asarray(x, dtype=float))))


def cutoff_profile(d):
    """1 for d <= 1/4, 0 for d >= 1, smooth in between."""
    return smooth_step((1.0 - np.asarray(d, dtype=float)) / 0.75)


# --- polynomials and jets ---------------------------------------------------------


def poly_eval(poly: dict, xi1, xi2):
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    out = np.zeros(np.broadcast(xi1, xi2).shape)
    for (p, q), c in poly.items():
        out = out + float(c) * xi1 ** p * xi2 ** q
    return out


def poly_derivs(poly: dict) -> dict:
    """Derivative table d_1^p d_2^q u(0, 0) = p! q! c_pq."""
    return {(p, q): c * factorial(p) * factorial(q) for (p, q), c in poly.items()}


def derivs_to_poly(derivs: dict) -> dict:
    out = {}
    for (p, q), v in derivs.items():
        den = factorial(p) * factorial(q)
        out[(p, q)] = v / den if isinstance(v, float) else Fraction(v) / den
    return out


def random_polynomial(rng, degree: int = 6, exact: bool = True, scale: int = 5) -> dict:
    """Random polynomial of total degree <= ``degree``."""
    out = {}
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            if exact:
                out[(p, q)] = Fraction(int(rng.integers(-scale, scale + 1)), int(rng.integers(1, scale + 1)))
            else:
                out[(p, q)] = float(rng.uniform(-1.0, 1.0))
    return out


@dataclass(frozen=True)
class CurveJet:
    """values[d][s] = (d/dt)^d u(t^{2/u}, lambda_s t) at t = 0+."""

    tau: TauLabel
    order: int
    values: tuple  # (order+1) rows of (a+1) entries, Fraction or float
    exact: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.values])


def _curve_exponent(tau: TauLabel, p: int, q: int) -> int:
    return (2 * p + q) if tau.n == 3 else (p + q)


def _poly_curve_jet(poly: dict, tau: TauLabel, m: int, exact: bool) -> CurveJet:
    lam = tau.lambdas()
    zero = Fraction(0) if exact else 0.0
    rows = [[zero] * len(lam) for _ in range(m + 1)]
    for (p, q), c in poly.items():
        d = _curve_exponent(tau, p, q)
        if d > m or c == 0:
            continue
        c = Fraction(c) if exact else float(c)
        for s, l in enumerate(lam):
            rows[d][s] += factorial(d) * c * (l ** q)
    return CurveJet(tau, m, tuple(tuple(r) for r in rows), exact)


def curve_functions(u, tau: TauLabel):
    """g_s(t) = u(t^{2/u}, lambda_s t) for a field u(xi1, xi2)."""
    lam = tau.lambdas()
    if tau.n == 3:
        return [lambda t, l=l: u(np.asarray(t) ** 2, l * np.asarray(t)) for l in lam]
    return [lambda t, l=l: u(np.asarray(t), l * np.asarray(t)) for l in lam]


def curve_jet(source, tau: TauLabel, m: int, h: float = 0.05, order: int = 6,
              exact: bool | None = None, tol: float = 1e-6) -> CurveJet:
    """One-sided derivatives along the spectrum curves at the origin.

    ``source`` is a polynomial dict (exact derivatives), a field u(xi1, xi2),
    or a list of curve functions g_s(t).  Non-polynomial sources use forward
    stencils at steps h and h/2 and raise NoisyJet when they disagree.
    """
    if m > 12:
        raise ValueError("jet order above 12 is outside the stencil accuracy budget")
    if isinstance(source, dict):
        if exact is None:
            exact = all(isinstance(c, (int, Fraction)) for c in source.values())
        return _poly_curve_jet(source, tau, m, exact)
    gs = source if isinstance(source, (list, tuple)) else curve_functions(source, tau)
    if len(gs) != tau.a_tau + 1:
        raise ValueError(f"expected {tau.a_tau + 1} curve functions")
    rows = np.zeros((m + 1, len(gs)))
    for d in range(m + 1):
        offs, w = forward_stencil(d, order)
        for s, g in enumerate(gs):
            est = []
            for step in (h, h / 2):
                vals = np.asarray(g(offs * step), dtype=complex)
                est.append(np.dot(w, vals) / step ** d)
            if abs(est[0] - est[1]) > tol * max(1.0, abs(est[1])):
                raise NoisyJet(f"order {d}, branch {s}: estimates {est[0]:.6g} vs {est[1]:.6g}")
            if abs(est[1].imag) > tol * max(1.0, abs(est[1])):
                raise NoisyJet("complex branch data; pass real and imaginary parts separately")
            rows[d, s] = est[1].real
    return CurveJet(tau, m, tuple(tuple(float(v) for v in r) for r in rows), False)


# --- Vandermonde algebra ----------------------------------------------------------


def lagrange_inverse(nodes) -> list:
    """Exact inverse of V[s, q] = nodes[s]^q: inv[q][s] = coefficient of t^q in l_s(t)."""
    nodes = [Fraction(x) for x in nodes]
    k = len(nodes)
    inv = [[Fraction(0)] * k for _ in range(k)]
    for s, xs in enumerate(nodes):
        poly = [Fraction(1)]
        den = Fraction(1)
        for i, xi in enumerate(nodes):
            if i == s:
                continue
            poly = [Fraction(0)] + poly
            for j in range(len(poly) - 1):
                poly[j] -= xi * poly[j + 1]
            den *= xs - xi
        for q in range(k):
            inv[q][s] = poly[q] / den
    return inv


def _solve_vandermonde(nodes, rhs, exact: bool):
    if not len(nodes):
        return []
    if exact:
        inv = lagrange_inverse(nodes)
        return [sum(inv[q][s] * Fraction(rhs[s]) for s in range(len(nodes))) for q in range(len(nodes))]
    x = np.asarray(nodes, dtype=float)
    L = max(1.0, np.max(np.abs(x)))
    V = (x[:, None] / L) ** np.arange(len(x))[None, :]
    z = np.linalg.solve(V, np.asarray(rhs, dtype=float))
    return list(z / L ** np.arange(len(x)))


def node_shift(tau: TauLabel, m: int) -> int:
    """omega = lambda_{s*} with s* minimizing prod_{i != s, i <= k} |lambda_i - lambda_s|,
    k = min(m, a_tau); ties go to the smallest s."""
    if tau.n != 4:
        raise WrongDimension("node shift is used for n = 4")
    if m <= 0:
        return 0
    k = min(m, tau.a_tau)
    lam = tau.lambdas()[: k + 1]
    best, best_s = None, 0
    for s in range(k + 1):
        prod = 1
        for i in range(k + 1):
            if i != s:
                prod *= abs(lam[i] - lam[s])
        if best is None or prod < best:
            best, best_s = prod, s
    return lam[best_s]


@dataclass(frozen=True)
class JetSystem:
    order: int
    nodes: tuple
    shift: int
    matrix: np.ndarray
    rhs: tuple
    x: tuple  # solved unknowns of the square system
    residual: float
    derivs: dict = field(default_factory=dict)  # {(p, q): d_1^p d_2^q u(0,0)} fixed by this order
    parity: str = ""  # n = 3: "odd" or "even"

    def binomial_weighted(self):
        """binom(d, q) d_1^{d-q} d_2^q u(0,0), q = 0..d (n = 4 orders)."""
        d = self.order
        return [comb(d, q) * self.derivs.get((d - q, q), 0) for q in range(d + 1)]


def _abs(v):
    return abs(float(v))


def _solve_order_n4(jet: CurveJet, d: int, shift: bool | None = None) -> JetSystem:
    tau = jet.tau
    exact = jet.exact
    a = tau.a_tau
    lam = tau.lambdas()
    # undoing the shift multiplies rounding errors by up to |omega|^d, so the
    # float path solves in the original nodes unless asked otherwise
    use_shift = exact if shift is None else shift
    omega = node_shift(tau, d) if use_shift else 0
    nodes = [l - omega for l in lam]
    c = list(jet.values[d])
    k = min(d, a) + 1
    y = _solve_vandermonde(nodes[:k], c[:k], exact)
    zero = Fraction(0) if exact else 0.0
    y = list(y) + [zero] * (d + 1 - k)
    resid = 0.0
    for s in range(len(nodes)):
        pred = sum(y[q] * nodes[s] ** q for q in range(d + 1))
        resid = max(resid, _abs(pred - c[s]))
    # derivatives of v, then undo the shift: d1 u = (d1 - omega d2) v
    dv = {(d - q, q): y[q] / comb(d, q) for q in range(d + 1)}
    du = {}
    for q in range(d + 1):
        p = d - q
        du[(p, q)] = sum(comb(p, i) * (-omega) ** i * dv[(p - i, q + i)] for i in range(p + 1))
    x = tuple(comb(d, q) * du[(d - q, q)] for q in range(d + 1))
    V = np.array([[float(nd) ** q for q in range(d + 1)] for nd in nodes])
    return JetSystem(d, tuple(nodes), omega, V, tuple(c), x, resid, du)


def _solve_order_n3(jet: CurveJet, d: int) -> JetSystem:
    tau = jet.tau
    exact = jet.exact
    mu = int(tau.mu)
    c = list(jet.values[d])
    half = Fraction(1, 2) if exact else 0.5
    # branch s carries lambda_s = s - mu, i.e. j = s - mu
    cj = {j: c[mu + j] for j in range(-mu, mu + 1)}
    plus = {j: (cj[j] + cj[-j]) * half for j in range(0, mu + 1)}
    minus = {j: (cj[j] - cj[-j]) * half for j in range(1, mu + 1)}
    mp = d // 2
    if d % 2:
        js = list(range(1, mu + 1))
        rhs = [minus[j] / j for j in js]
        wrong = [plus[j] for j in range(0, mu + 1)]
        parity = "odd"
    else:
        js = list(range(0, mu + 1))
        rhs = [plus[j] for j in js]
        wrong = [minus[j] for j in range(1, mu + 1)]
        parity = "even"
    nodes = [j * j for j in js]
    k = min(mp + 1, len(nodes))
    xs = _solve_vandermonde(nodes[:k], rhs[:k], exact)
    zero = Fraction(0) if exact else 0.0
    xs = list(xs) + [zero] * (mp + 1 - k)
    resid = max([_abs(w) for w in wrong], default=0.0)
    for r, nd in zip(rhs, nodes):
        pred = sum(xs[q] * nd ** q for q in range(mp + 1))
        resid = max(resid, _abs(pred - r))
    du = {}
    for qp in range(mp + 1):
        b = 2 * qp + 1 if d % 2 else 2 * qp
        p = mp - qp
        coef = factorial(d) // (factorial(p) * factorial(b))
        du[(p, b)] = xs[qp] / coef
    V = np.array([[float(nd) ** q for q in range(mp + 1)] for nd in nodes])
    return JetSystem(d, tuple(nodes), 0, V, tuple(rhs), tuple(xs), resid, du, parity)


def jet_solve(jet: CurveJet, tau: TauLabel | None = None, tol: float = 1e-8, shift: bool | None = None) -> list[JetSystem]:
    """Solve the jet systems for every order 0..jet.order.

    Orders d <= a_tau determine the derivatives d_1^p d_2^q u(0,0) with
    p + q = d (n = 4) or 2p + q = d (n = 3) uniquely.  Higher orders return the
    solution with the top unknowns set to zero.
    """
    tau = tau or jet.tau
    out = []
    for d in range(jet.order + 1):
        sysd = _solve_order_n4(jet, d, shift) if tau.n == 4 else _solve_order_n3(jet, d)
        scale = max([1.0] + [_abs(v) for v in jet.values[d]])
        if sysd.residual > tol * scale:
            raise InconsistentJet(f"order {d}: residual {sysd.residual:.2e} on surplus equations")
        out.append(sysd)
    return out


def identifiable(tau: TauLabel, p: int, q: int) -> bool:
    """Whether d_1^p d_2^q u(0,0) is fixed by the jet of u on the spectrum."""
    return _curve_exponent(tau, p, q) <= tau.a_tau


def solved_derivatives(systems) -> dict:
    out = {}
    for sysd in systems:
        out.update(sysd.derivs)
    return out


# --- conditioning bounds ---------------------------------------------------------


def n3_binomial_identity(mp1: int) -> list[dict]:
    """prod_{j=1..mp1, j != s} j^2 / |j^2 - s^2| against 2 binom(mp1, s) / binom(mp1 + s, s)."""
    rows = []
    for s in range(1, mp1 + 1):
        lhs = Fraction(1)
        for j in range(1, mp1 + 1):
            if j != s:
                lhs *= Fraction(j * j, abs(j * j - s * s))
        rhs = Fraction(2 * comb(mp1, s), comb(mp1 + s, s))
        rows.append({"mp1": mp1, "s": s, "lhs": lhs, "rhs": rhs, "equal": lhs == rhs, "le_one": lhs <= 1})
    return rows


def cofactor_bounds(tau: TauLabel, m: int) -> dict:
    """Exact cofactor ratios |V_{s,q} / V| of the order-m jet system.

    n = 4: shifted nodes lambda_s - omega, s = 0..m, checked against binom(m, q),
    together with |omega| <= d_tau and the node-product bound.  Raises
    BoundViolation if any of these fail.
    n = 3: odd system nodes j^2, j = 1..m'+1 with m = m'; ratios are reported
    against binom(m', q) and the product identity is evaluated; nothing raises.
    """
    if tau.n == 4:
        if not 0 <= m <= tau.a_tau:
            raise ValueError("need 0 <= m <= a_tau")
        omega = node_shift(tau, m)
        nodes = [Fraction(l - omega) for l in tau.lambdas()[: m + 1]]
        inv = lagrange_inverse(nodes)
        ratios = [[abs(inv[q][s]) for s in range(m + 1)] for q in range(m + 1)]
        prods = []
        for s in range(m + 1):
            pr = Fraction(1)
            for i in range(m + 1):
                if i != s and nodes[i] != 0:
                    pr *= abs(nodes[i]) / abs(nodes[i] - nodes[s])
            prods.append(pr)
        ok_ratio = all(ratios[q][s] <= comb(m, q) for q in range(m + 1) for s in range(m + 1))
        ok_omega = abs(omega) <= tau.d_tau
        ok_prod = all(p <= 1 for p in prods)
        report = {
            "tau": str(tau), "m": m, "omega": omega, "nodes": nodes, "ratios": ratios,
            "products": prods, "ratio_ok": ok_ratio, "omega_ok": ok_omega, "product_ok": ok_prod,
            "max_ratio_over_binom": max(ratios[q][s] / comb(m, q) for q in range(m + 1) for s in range(m + 1)),
        }
        if not (ok_ratio and ok_omega and ok_prod):
            raise BoundViolation(f"{tau}, m = {m}: {report}")
        return report
    mu = int(tau.mu)
    if not (0 <= m and m + 1 <= max(mu, 1)):
        raise ValueError("need m' + 1 <= mu")
    nodes = [Fraction(j * j) for j in range(1, m + 2)]
    inv = lagrange_inverse(nodes)
    ratios = [[abs(inv[q][s]) for s in range(m + 1)] for q in range(m + 1)]
    ident = n3_binomial_identity(m + 1)
    return {
        "tau": str(tau), "m": m, "nodes": nodes, "ratios": ratios,
        "ratio_ok": all(ratios[q][s] <= comb(m, q) for q in range(m + 1) for s in range(m + 1)),
        "identity_ok": all(r["equal"] for r in ident),
        "identity_le_one": all(r["le_one"] for r in ident),
        "identity": ident,
    }


# --- extension builders -------------------------------------------------------------


@dataclass(frozen=True)
class ExtensionField:
    tau: TauLabel
    evaluator: object
    builder: str
    meta: dict = field(default_factory=dict)

    def __call__(self, xi1, xi2):
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return self.evaluator(xi1, xi2)

    def restrict(self, rho, s):
        """u(rho^2, lambda_s rho^u) at spectrum points."""
        rho = np.asarray(rho, dtype=float)
        lam = np.asarray(self.tau.lambdas(), dtype=float)[np.asarray(s)]
        return self(rho ** 2, lam * rho ** self.tau.u)

    def grid(self, xi1, xi2):
        X1, X2 = np.meshgrid(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float), indexing="ij")
        return X1, X2, self(X1, X2)


def hull_distance(tau: TauLabel, xi1, xi2) -> np.ndarray:
    """Euclidean distance to the convex hull of the embedded spectrum."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    lam = tau.lambdas()
    if tau.n == 4:
        lo, hi = min(lam), max(lam)
        inside = (xi1 >= 0) & (xi2 >= lo * xi1) & (xi2 <= hi * xi1)

        def ray(l):
            d = np.array([1.0, l]) / np.hypot(1.0, l)
            t = np.maximum(xi1 * d[0] + xi2 * d[1], 0.0)
            return np.hypot(xi1 - t * d[0], xi2 - t * d[1])

        dist = np.minimum(ray(lo), ray(hi))
        return np.where(inside, 0.0, dist)
    mu = float(tau.mu)
    y = np.abs(xi2)
    if mu == 0:
        return np.hypot(np.minimum(xi1, 0.0), y)
    inside = (xi1 >= 0) & (y <= mu * np.sqrt(np.maximum(xi1, 0.0)))
    # nearest point (t^2, mu t) solves 2 t^3 + (mu^2 - 2 xi1) t - mu y = 0, one root t >= 0
    lo = np.zeros_like(y)
    hi = 1.0 + y + np.sqrt(np.abs(xi1)) + mu
    for _ in range(80):
        mid = (lo + hi) / 2
        f = 2 * mid ** 3 + (mu * mu - 2 * xi1) * mid - mu * y
        neg = f < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    t = (lo + hi) / 2
    dist = np.hypot(xi1 - t * t, y - mu * t)
    return np.where(inside, 0.0, dist)


def reflect_even(g, order: int = 6):
    """Extend g from [0, inf) to R, matching derivatives up to ``order - 1`` at 0.

    Seeley-type reflection g(-x) = sum_k a_k g(x / k), k = 1..order, with
    sum_k a_k (-1/k)^j = 1 for j < order.
    """
    ks = np.arange(1, order + 1, dtype=float)
    M = (-1.0 / ks)[None, :] ** np.arange(order)[:, None]
    a = np.linalg.solve(M, np.ones(order))

    def ext(x):
        x = np.asarray(x, dtype=float)
        pos = np.maximum(x, 0.0)
        out = np.asarray(g(pos), dtype=complex)
        neg = x < 0
        if np.any(neg):
            xn = -x[neg]
            out = out.copy()
            out[neg] = sum(ak * np.asarray(g(xn / k), dtype=complex) for ak, k in zip(a, ks))
        return out

    return ext


def cutoff_extension(gammas, tau: TauLabel) -> ExtensionField:
    """u(xi) = eta(xi) sum_i xi2^i gamma_i(xi1), eta = 1 near the spectrum hull.

    ``gammas`` is a GeneratorProfile, a GammaTable, or a list of callables on xi1 >= 0.
    """
    from .transform import GammaTable, GeneratorProfile, synthesize_profile

    if isinstance(gammas, GammaTable):
        gammas = synthesize_profile(gammas, tau)
    gs = gammas.gammas if isinstance(gammas, GeneratorProfile) else tuple(gammas)
    ext = [reflect_even(g) for g in gs]

    def ev(xi1, xi2):
        eta = cutoff_profile(hull_distance(tau, xi1, xi2))
        acc = np.zeros(xi1.shape, dtype=complex)
        live = eta > 0
        if np.any(live):
            x1, x2 = xi1[live], xi2[live]
            acc[live] = eta[live] * sum(x2 ** i * e(x1) for i, e in enumerate(ext))
        return acc

    return ExtensionField(tau, ev, "cutoff", {"generators": len(gs)})


def vanishing_check(g, orders: int = 8, h: float = 0.005, tol: float = 1e-8) -> float:
    """Largest of the first ``orders`` one-sided derivative estimates of g at 0."""
    worst = 0.0
    for d in range(orders):
        offs, w = forward_stencil(d, 2)
        est = abs(np.dot(w, np.asarray(g(offs * h), dtype=complex))) / h ** d
        worst = max(worst, float(est))
    return worst


def bump_extension(branch_functions, tau: TauLabel, tol: float = 1e-8) -> ExtensionField:
    """v(xi) = sum_s g_s(sqrt(xi1)) bump(xi2 / xi1^{u/2} - lambda_s) for xi1 > 0, else 0."""
    gs = list(branch_functions)
    if len(gs) != tau.a_tau + 1:
        raise ValueError(f"expected {tau.a_tau + 1} branch functions")
    worst = max(vanishing_check(g) for g in gs)
    if worst > tol:
        raise HypothesisViolation(f"branch data does not vanish to infinite order at 0 (derivative estimate {worst:.2e})")
    lam = np.asarray(tau.lambdas(), dtype=float)

    def ev(xi1, xi2):
        out = np.zeros(xi1.shape, dtype=complex)
        pos = xi1 > 0
        if np.any(pos):
            x1, x2 = xi1[pos], xi2[pos]
            rho = np.sqrt(x1)
            ratio = x2 / x1 ** (tau.u / 2)
            out[pos] = sum(np.asarray(g(rho), dtype=complex) * bump(ratio - l) for g, l in zip(gs, lam))
        return out

    return ExtensionField(tau, ev, "bump", {"vanishing": worst})


def finite_borel(derivs: dict, tau: TauLabel, M: int | None = None) -> ExtensionField:
    """h(xi) = phi(xi) sum_{p+q <= M} d_1^p d_2^q u(0) xi1^p xi2^q / (p! q!), phi = bump(|xi| / 2)."""
    if M is None:
        M = max((p + q for p, q in derivs), default=0)
    poly = {k: float(v) for k, v in derivs_to_poly({k: v for k, v in derivs.items() if sum(k) <= M}).items()}

    def ev(xi1, xi2):
        return bump(np.hypot(xi1, xi2) / 2.0) * poly_eval(poly, xi1, xi2)

    return ExtensionField(tau, ev, "borel", {"M": M, "polynomial": poly})


# --- decay trend --------------------------------------------------------------------


def decay_table(taus, coeffs, t: float = 0.5, grid: int = 41, extent: float = 4.0) -> list[dict]:
    """sup-norms of cutoff extensions for gamma profiles shared across tau.

    The shared preset is weighted by w_tau = d_tau exp(-t |xi'(tau)|), the
    size profile of the tau-components of a fixed Schwartz input.  Within each
    family (n = 3, n = 4) rows are grouped by Casimir level |xi'|; the
    threshold is the first level after which the level maxima never increase.
    """
    from .transform import GeneratorProfile

    rows = []
    for tau in taus:
        cas = float(sum(tau.xi_prime))
        w = float(tau.d_tau * np.exp(-t * cas))
        L = max(1.0, max(abs(x) for x in tau.lambdas()))
        scaled = [[w * c / L ** i for c in row] for i, row in enumerate(coeffs[: tau.a_tau + 1])]
        ext = cutoff_extension(GeneratorProfile.from_preset(tau, scaled), tau)
        x1 = np.linspace(-1.0, extent, grid)
        x2 = np.linspace(-extent * L, extent * L, grid)
        _, _, U = ext.grid(x1, x2)
        rows.append({"tau": str(tau), "n": tau.n, "casimir": cas, "weight": w, "sup": float(np.max(np.abs(U)))})
    rows.sort(key=lambda r: (r["n"], r["casimir"], r["tau"]))
    for n in sorted({r["n"] for r in rows}):
        fam = [r for r in rows if r["n"] == n]
        levels = sorted({r["casimir"] for r in fam})
        peak = [max(r["sup"] for r in fam if r["casimir"] == c) for c in levels]
        k = len(levels) - 1
        while k > 0 and peak[k - 1] >= peak[k]:
            k -= 1
        for r in fam:
            r["threshold_casimir"] = levels[k]
            r["beyond_threshold"] = r["casimir"] >= levels[k]
    return rows
