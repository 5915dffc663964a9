"""Exact rational cross-checks of the representation-theoretic formulas.

Everything here uses Python integers and ``fractions.Fraction`` only.  The
representation matrices use the non-unitary highest-weight basis

    J_+ e_m = (j - m) e_{m+1},   J_- e_m = (j + m) e_{m-1},   J_3 e_m = m e_m,

which keeps every entry rational.  Spectra, characteristic polynomials and
q-polynomials are basis independent, so they can be compared directly with the
floating-point pipeline.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .reps import TauLabel


class NotAnEigenvector(AssertionError):
    pass


# --- integer polynomials (coefficients in increasing powers) ----------------


def poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def poly_trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def expected_charpoly(tau: TauLabel):
    """prod_s (t - lambda_s)^{d_sigma_s} as exact integer coefficients."""
    out = [1]
    for lam, w in zip(tau.lambdas(), tau.weights()):
        for _ in range(w):
            out = poly_mul(out, [-lam, 1])
    return out


# --- rational representation -------------------------------------------------


@dataclass(frozen=True)
class RationalRep:
    j: Fraction
    jp: tuple
    jm: tuple
    j3: tuple

    @property
    def dim(self):
        return len(self.j3)


def rational_rep(j) -> RationalRep:
    j = Fraction(j)
    dim = int(2 * j + 1)
    m = [j - k for k in range(dim)]
    z = lambda: [[Fraction(0)] * dim for _ in range(dim)]
    jp, jm, j3 = z(), z(), z()
    for k in range(dim):
        j3[k][k] = m[k]
        if k > 0:  # e_{m+1} is index k-1
            jp[k - 1][k] = j - m[k]
        if k < dim - 1:
            jm[k + 1][k] = j + m[k]
    freeze = lambda M: tuple(tuple(r) for r in M)
    return RationalRep(j, freeze(jp), freeze(jm), freeze(j3))


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum(A[i][l] * B[l][c] for l in range(k) if A[i][l]) for c in range(m)] for i in range(n)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def kron(A, B):
    n, m = len(A), len(B)
    out = [[0] * (n * m) for _ in range(n * m)]
    for i in range(n):
        for j in range(n):
            a = A[i][j]
            if a:
                for k in range(m):
                    for l in range(m):
                        out[i * m + k][j * m + l] = a * B[k][l]
    return out


def check_commutators(rep: RationalRep) -> bool:
    """[J_+, J_-] = 2 J_3 and [J_3, J_pm] = pm J_pm, exactly."""
    comm = lambda A, B: mat_sub(mat_mul(A, B), mat_mul(B, A))
    two_j3 = [[2 * x for x in r] for r in rep.j3]
    ok = comm(rep.jp, rep.jm) == two_j3
    ok &= comm(rep.j3, rep.jp) == [list(r) for r in rep.jp]
    ok &= comm(rep.j3, rep.jm) == [[-x for x in r] for r in rep.jm]
    return bool(ok)


def rational_B(tau: TauLabel):
    """B over the rationals, together with the weight label of each basis vector.

    n = 3: B = -J_3.  n = 4: B = 4 J.K = 4 J_3 K_3 + 2 (J_+ K_- + J_- K_+).
    The labels (total J_3 weight) are conserved by B and give its block structure.
    """
    if tau.n == 3:
        rep = rational_rep(tau.mu)
        B = [[-x for x in r] for r in rep.j3]
        labels = [rep.j3[k][k] for k in range(rep.dim)]
        return B, labels
    L, R = rational_rep(tau.nu), rational_rep(tau.mu)
    t1 = kron(L.j3, R.j3)
    t2 = kron(L.jp, R.jm)
    t3 = kron(L.jm, R.jp)
    d = L.dim * R.dim
    B = [[4 * t1[i][k] + 2 * (t2[i][k] + t3[i][k]) for k in range(d)] for i in range(d)]
    labels = [L.j3[a][a] + R.j3[b][b] for a in range(L.dim) for b in range(R.dim)]
    return B, labels


def charpoly_exact(M):
    """Characteristic polynomial det(tI - M) by Faddeev-LeVerrier over Q."""
    n = len(M)
    if n == 0:
        return [1]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = M (M_{k-1} + c_{n-k+1} I)
        A = [row[:] for row in Mk]
        for i in range(n):
            A[i][i] += coeffs[n - k + 1]
        Mk = mat_mul(M, A)
        coeffs[n - k] = -sum(Mk[i][i] for i in range(n)) / k
    return coeffs


def blockwise_charpoly(B, labels):
    """Exact characteristic polynomial using the label-conserving block structure.

    Raises if B couples basis vectors with different labels.
    """
    d = len(B)
    for i in range(d):
        for k in range(d):
            if B[i][k] and labels[i] != labels[k]:
                raise AssertionError(f"B couples weights {labels[i]} and {labels[k]}")
    groups = defaultdict(list)
    for i, lab in enumerate(labels):
        groups[lab].append(i)
    out = [Fraction(1)]
    for idx in groups.values():
        block = [[Fraction(B[i][k]) for k in idx] for i in idx]
        out = poly_mul(out, charpoly_exact(block))
    return out


def rational_branch_check(tau: TauLabel) -> dict:
    """Compare the exact characteristic polynomial of B with prod (t - lambda_s)^{d_s}."""
    if tau.n == 3:
        reps_ok = check_commutators(rational_rep(tau.mu))
    else:
        reps_ok = check_commutators(rational_rep(tau.nu)) and check_commutators(rational_rep(tau.mu))
    B, labels = rational_B(tau)
    got = poly_trim(blockwise_charpoly(B, labels))
    want = poly_trim(expected_charpoly(tau))
    ok = reps_ok and got == want
    report = {
        "tau": str(tau),
        "commutators": reps_ok,
        "charpoly": [str(c) for c in got],
        "expected": [str(c) for c in want],
        "pass": ok,
    }
    if not ok:
        report["mismatch"] = [
            (k, str(a), str(b))
            for k, (a, b) in enumerate(zip(got + [0] * len(want), want + [0] * len(got)))
            if a != b
        ]
    return report


# --- polynomial model ----------------------------------------------------------


class BiPolynomial(dict):
    """Sparse polynomial in z1, z2, conj z1, conj z2.

    Keys are exponent tuples (a1, a2, b1, b2) of z1^a1 z2^a2 zb1^b1 zb2^b2.
    """

    def __add__(self, other):
        out = BiPolynomial(self)
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
            if out[k] == 0:
                del out[k]
        return out

    def scale(self, c):
        return BiPolynomial({k: c * v for k, v in self.items() if c * v})

    def bidegree(self):
        degs = {(a1 + a2, b1 + b2) for a1, a2, b1, b2 in self}
        if len(degs) != 1:
            raise ValueError(f"not bihomogeneous: {degs}")
        return degs.pop()


def model_vector(nu, mu, s) -> BiPolynomial:
    """|z|^{2s} z1^{2nu-s} conj(z2)^{2mu-s}, expanded."""
    a, b = int(2 * Fraction(nu)), int(2 * Fraction(mu))
    if not 0 <= s <= min(a, b):
        raise IndexError(f"s = {s} out of range")
    P = BiPolynomial()
    for k in range(s + 1):
        P[(a - s + k, s - k, k, b - k)] = comb(s, k)
    return P


def apply_model_B(P: BiPolynomial) -> BiPolynomial:
    """-(z1 d1 - z2 d2)(zb1 db1 - zb2 db2) - 2 z1 zb1 d2 db2 - 2 z2 zb2 d1 db1."""
    out = BiPolynomial()
    for (a1, a2, b1, b2), c in P.items():
        terms = [((a1, a2, b1, b2), -(a1 - a2) * (b1 - b2) * c)]
        if a2 and b2:
            terms.append(((a1 + 1, a2 - 1, b1 + 1, b2 - 1), -2 * a2 * b2 * c))
        if a1 and b1:
            terms.append(((a1 - 1, a2 + 1, b1 - 1, b2 + 1), -2 * a1 * b1 * c))
        for k, v in terms:
            if v:
                out = out + BiPolynomial({k: v})
    return out


def polynomial_model_eigenvalue(nu, mu, s) -> int:
    P = model_vector(nu, mu, s)
    BP = apply_model_B(P)
    if BP and BP.bidegree() != P.bidegree():
        raise NotAnEigenvector("bidegree not preserved")
    key = next(iter(P))
    lam = Fraction(BP.get(key, 0), P[key])
    if BP != P.scale(lam):
        raise NotAnEigenvector(f"B P is not a multiple of P for (nu, mu, s) = ({nu}, {mu}, {s})")
    if lam.denominator != 1:
        raise NotAnEigenvector(f"non-integer eigenvalue {lam}")
    return int(lam)


# --- exact q-polynomials --------------------------------------------------------


def exact_q_polys(tau: TauLabel) -> list[list[Fraction]]:
    """Monic orthogonal polynomials for sum_s d_s delta_{lambda_s}, by Gram-Schmidt over Q."""
    nodes = [Fraction(x) for x in tau.lambdas()]
    wts = [Fraction(w) for w in tau.weights()]

    def ev(p, x):
        acc = Fraction(0)
        for c in reversed(p):
            acc = acc * x + c
        return acc

    def inner(p, q):
        return sum(w * ev(p, x) * ev(q, x) for x, w in zip(nodes, wts))

    out = []
    for k in range(len(nodes)):
        p = [Fraction(0)] * k + [Fraction(1)]
        for q in out:
            c = inner(p, q) / inner(q, q)
            p = [a - c * (q[i] if i < len(q) else 0) for i, a in enumerate(p)]
        out.append(p)
    return out


def q_parity_exact(tau: TauLabel) -> bool:
    """n = 3: q^l only has powers of the same parity as l."""
    return all(
        all(c == 0 for i, c in enumerate(q) if (i - l) % 2)
        for l, q in enumerate(exact_q_polys(tau))
    )
