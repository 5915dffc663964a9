import numpy as np
import pytest

from motion_spherical.reps import TauLabel
from motion_spherical.transform import (
    BranchProfile,
    BranchSamples,
    DecayGuardViolation,
    GeneratorProfile,
    IllConditioned,
    apply_D,
    convolve,
    decompose_gamma,
    fourier_axis,
    minimal_poly_reduction,
    schur_defect,
    spherical_transform,
    synthesize_profile,
)
from motion_spherical.branch import build_branch_data
from motion_spherical.verification import balanced_preset

RHO = np.linspace(0.0, 3.0, 16)


@pytest.mark.parametrize("n,tau", [(3, TauLabel(3, 0)), (4, TauLabel(4, 0, 0))])
def test_gaussian_closed_form(n, tau):
    F = GeneratorProfile.from_preset(tau, [[1.0]])
    v = spherical_transform(F.to_branch_form(), tau, RHO).values[:, 0]
    assert np.allclose(v, np.exp(-RHO ** 2 / 2), rtol=1e-10)
    # spatial side: (2 pi)^{-n/2} exp(-|y|^2/2)
    y = np.array([[0.5] + [0.0] * (n - 1)])
    assert F.spatial(y)[0, 0, 0] == pytest.approx((2 * np.pi) ** (-n / 2) * np.exp(-0.125))


@pytest.mark.parametrize("tau", [TauLabel(3, 2), TauLabel(4, 1, 1), TauLabel(4, 0.5, 1.5)], ids=str)
def test_quadrature_matches_generator_form(tau):
    F = balanced_preset(tau, np.random.default_rng(1))
    v = spherical_transform(F.to_branch_form(), tau, RHO).values
    assert np.max(np.abs(v - F.branch_values(RHO))) < 1e-10 * np.max(np.abs(v))


def test_schur_defect_of_sphere_route():
    tau = TauLabel(4, 1, 1)
    F = balanced_preset(tau, np.random.default_rng(2))
    M = fourier_axis(F.to_branch_form(), tau, [1.0], method="sphere")
    assert schur_defect(M, tau) < 1e-9
    P = np.asarray(build_branch_data(tau).projections)
    assert schur_defect(P[0] + np.roll(P[1], 1, axis=0), tau) > 1e-3


@pytest.mark.parametrize("tau", [TauLabel(3, 2), TauLabel(4, 1, 1)], ids=str)
def test_multiplier_property(tau):
    F = balanced_preset(tau, np.random.default_rng(3))
    lam = np.asarray(tau.lambdas(), dtype=float)
    target = np.outer(RHO ** tau.u, lam) * F.branch_values(RHO)
    assert np.allclose(apply_D(F, tau).branch_values(RHO), target, atol=1e-10 * np.max(np.abs(target)))
    bp = apply_D(F.to_branch_form(), tau)
    v = spherical_transform(bp, tau, RHO).values
    assert np.max(np.abs(v - target)) < 1e-9 * np.max(np.abs(target))
    with pytest.raises(ValueError):
        bp.spatial_axis([0.0])


def test_apply_D_on_callables_matches_preset():
    tau = TauLabel(3, 1)
    F = balanced_preset(tau, np.random.default_rng(4))
    G = GeneratorProfile(tau, F.gammas)
    assert np.allclose(apply_D(G, tau).branch_values(RHO), apply_D(F, tau).branch_values(RHO))


def test_minimal_poly_reduction():
    data = build_branch_data(TauLabel(3, 1))
    # B^3 = B for eigenvalues -1, 0, 1
    assert np.allclose(minimal_poly_reduction(data), [0.0, 1.0, 0.0])


def test_convolution_multiplies_transforms():
    tau = TauLabel(4, 1, 1)
    rng = np.random.default_rng(5)
    F1, F2 = balanced_preset(tau, rng), balanced_preset(tau, rng)
    H = convolve(F1, F2)
    assert np.allclose(H.branch_values(RHO), F1.branch_values(RHO) * F2.branch_values(RHO), rtol=1e-9, atol=1e-12)
    assert H.preset.width2 == 2.0


@pytest.mark.parametrize("tau", [TauLabel(3, 2), TauLabel(4, 1, 1)], ids=str)
def test_decompose_roundtrip(tau):
    F = balanced_preset(tau, np.random.default_rng(6))
    rho = np.linspace(0.0, 3.0, 31)
    table = decompose_gamma(BranchSamples(tau, rho, F.branch_values(rho)))
    keep = rho >= 0.5
    true = F.gamma_values(rho ** 2)
    assert np.allclose(table.gammas[keep], true[keep], atol=1e-9)
    # near zero the fill-in is a smooth extrapolation
    assert np.allclose(table.gammas[0], true[0], atol=1e-3)
    H = synthesize_profile(table, tau)
    assert np.allclose(H.branch_values(rho[keep]), F.branch_values(rho[keep]), atol=1e-9)


def test_decompose_rejects_inconsistent_rows():
    tau = TauLabel(3, 1)
    rho = np.linspace(0.5, 2.0, 4)
    vals = np.ones((4, 3), dtype=complex)
    table = decompose_gamma(BranchSamples(tau, rho, vals))
    assert table.residual < 1e-12
    with pytest.raises(IllConditioned):
        decompose_gamma(BranchSamples(tau, np.array([0.0, 0.05]), np.ones((2, 3))), rho_floor=0.1)


def test_decay_guard():
    tau = TauLabel(3, 0)
    slow = BranchProfile(tau, lambda r: np.ones((len(r), 1)) / (1 + np.asarray(r)), width=1.0)
    with pytest.raises(DecayGuardViolation):
        spherical_transform(slow, tau, RHO)


def test_branch_profile_from_samples():
    tau = TauLabel(3, 1)
    F = balanced_preset(tau, np.random.default_rng(7))
    r = np.linspace(0.0, 12.0, 1201)
    bp = BranchProfile.from_samples(tau, r, F.axis_branch_coeffs(r))
    v = spherical_transform(bp, tau, RHO).values
    assert np.max(np.abs(v - F.branch_values(RHO))) < 1e-6
    bad = F.axis_branch_coeffs(r)
    bad[0, 1] += 1.0
    with pytest.raises(ValueError):
        BranchProfile.from_samples(tau, r, bad)


def test_preset_arity_check():
    with pytest.raises(ValueError):
        GeneratorProfile.from_preset(TauLabel(3, 0), [[1.0], [1.0]])
