import numpy as np
import pytest

from anisoinc.elliptic import EllipsoidAxes
from anisoinc.ellipsoid_potential import EllipsoidPose
from anisoinc.errors import DomainError
from anisoinc.geometry import VoxelRegion, voxelize_ball, voxelize_box, voxelize_ellipsoid
from anisoinc.materials import ElasticTensor
from anisoinc.verify import (
    DensityPolynomial,
    EigenstrainSpec,
    box_self_potential,
    certify_polynomial_conservation,
    fit_polynomial,
    hessian_field,
    monomial_basis,
    non_ellipsoidality_score,
    potential_quadrature,
    strain_from_hessian,
)

RHO1 = DensityPolynomial.constant(1.0)
RHO_Q = DensityPolynomial.quadratic([1.0, 1.0, 1.0])


def test_box_self_potential_cube_constant():
    # potential at the center of a unit cube: ~2.3800774 / (4 pi)
    assert box_self_potential([1.0, 1.0, 1.0]) * 4 * np.pi == pytest.approx(2.3800774, abs=2e-6)


def test_box_self_potential_against_refinement_oracle():
    spacing = np.array([0.8, 1.1, 0.55])
    offset = np.array([0.1, -0.2, 0.05])

    def midpoint(nsub):
        axes = [(np.arange(nsub) + 0.5) / nsub * spacing[k] - spacing[k] / 2 for k in range(3)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        r = np.linalg.norm(pts - offset, axis=1)
        return float(np.sum(1.0 / r)) * np.prod(spacing / nsub) / (4 * np.pi)

    # Richardson: midpoint error ~ O(1/n^2) off-singularity dominates
    coarse, fine = midpoint(48), midpoint(96)
    oracle = fine + (fine - coarse) / 3
    assert box_self_potential(spacing, offset) == pytest.approx(oracle, rel=5e-3)


def test_potential_empty_region():
    empty = VoxelRegion(np.zeros((0, 3)), np.ones(3), np.zeros(3))
    assert potential_quadrature(empty, RHO1, np.zeros(3)) == 0.0


def test_potential_ball_values():
    region = voxelize_ball(1.0, 1 / 32)
    assert potential_quadrature(region, RHO1, np.zeros(3)) == pytest.approx(-0.5, rel=2e-3)
    assert potential_quadrature(region, RHO_Q, np.zeros(3)) == pytest.approx(0.25, rel=2e-3)
    x = np.array([0.4, 0.1, -0.3])
    r2 = float(x @ x)
    assert potential_quadrature(region, RHO1, x) == pytest.approx(-(3 - r2) / 6, rel=3e-3)


def test_hessian_of_ball_constant_density():
    region = voxelize_ball(1.0, 1 / 32)
    pts = np.array([[0.0, 0.0, 0.0], [0.25, 0.1, -0.2], [0.3, 0.0, 0.1]])
    H, ok = hessian_field(region, RHO1, pts)
    assert ok.all()
    for k in range(3):
        assert np.allclose(H[k], np.eye(3) / 3, atol=0.01)
        assert np.trace(H[k]) == pytest.approx(1.0, rel=0.05)  # Delta N = rho inside


def test_hessian_trace_outside_is_zero():
    region = voxelize_ball(0.5, 1 / 24)
    pts = np.array([[1.0, 0.3, 0.2]])
    H, ok = hessian_field(region, RHO1, pts)
    assert not ok[0]  # flagged: stencil leaves the region
    assert abs(np.trace(H[0])) <= 0.05


def test_strain_map_isotropic_factor():
    C = ElasticTensor.from_constants("isotropic", C11=3.0, C12=1.0)  # lambda = mu = 1
    H = np.diag([0.2, -0.1, 0.4])
    eps = strain_from_hessian("isotropic", H, C)
    assert np.allclose(eps, (5.0 / 3.0) * H)


def test_strain_map_isotropic_reproduces_dilatational_eshelby():
    # sphere + uniform unit eigenstrain: interior strain (1+nu)/(3(1-nu)) I
    lam, mu = 2.0, 1.5
    C = ElasticTensor.from_constants("isotropic", C11=lam + 2 * mu, C12=lam)
    region = voxelize_ball(1.0, 1 / 32)
    pts = np.array([[0.0, 0.0, 0.0], [0.2, -0.1, 0.15]])
    H, ok = hessian_field(region, DensityPolynomial.constant(1.0), pts)
    eps = strain_from_hessian("isotropic", H, C)
    nu = lam / (2 * (lam + mu))
    factor = (1 + nu) / (3 * (1 - nu))
    for k in range(2):
        assert np.allclose(eps[k], factor * np.eye(3), atol=0.02 * factor)


def test_strain_map_cubic_structure():
    C = ElasticTensor.from_constants("cubic", C11=4.0, C12=-1.0, C44=1.0)
    P = np.zeros((3, 3))
    P[2, 2] = 1.0
    H = np.diag([0.3, 0.2, 0.5])
    eps = strain_from_hessian("cubic", H, C, P=P)
    assert eps[0, 0] == eps[1, 1] == eps[0, 1] == 0.0
    s2 = 1.0 / 4.0
    assert eps[2, 2] == pytest.approx(s2 * 0.5 / 1.0)
    assert np.allclose(strain_from_hessian("cubic", np.zeros((3, 3)), C, P=P), 0.0)


def test_fit_polynomial_exact_quartic():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(80, 3))
    vals = 0.3 - 0.2 * pts[:, 0] ** 4 + pts[:, 1] ** 2 * pts[:, 2] ** 2
    fit = fit_polynomial(pts, vals, 4)
    assert fit.relative_residual <= 1e-10


def test_fit_polynomial_exponential_floor():
    rng = np.random.default_rng(1)
    pts = rng.uniform(-1, 1, size=(100, 3))
    vals = np.exp(pts[:, 0])
    fit = fit_polynomial(pts, vals, 2)
    assert fit.relative_residual > 1e-3


def test_fit_polynomial_constant_data():
    rng = np.random.default_rng(2)
    pts = rng.uniform(-1, 1, size=(200, 3))
    fit = fit_polynomial(pts, np.full(200, 2.5), 4)
    assert np.max(np.abs(fit.coefficients[1:])) <= 1e-12


def test_fit_polynomial_requires_samples():
    with pytest.raises(DomainError):
        fit_polynomial(np.zeros((5, 3)), np.zeros(5), 2)


def test_monomial_basis_graded():
    basis = monomial_basis(2)
    degrees = [sum(b) for b in basis]
    assert degrees == sorted(degrees)
    assert basis[0] == (0, 0, 0)
    assert len(basis) == 10


def test_certify_ellipsoid_uniform_cubic():
    C = ElasticTensor.from_constants("cubic", C11=4.0, C12=-1.0, C44=1.0)
    pose = EllipsoidPose(EllipsoidAxes(0.9, 1.1, 1.3))
    region = voxelize_ellipsoid(pose, 1 / 28, subsample=4)
    eig = EigenstrainSpec.uniaxial(3, DensityPolynomial.constant(1.0), "cubic")
    report = certify_polynomial_conservation(region, C, eig, tol_cert=0.02)
    assert report.passed, report
    assert report.degree == 0


def test_certify_cube_fails_degree_zero():
    C = ElasticTensor.from_constants("isotropic", C11=3.0, C12=1.0)
    region = voxelize_box([0.5, 0.5, 0.5], 1 / 32)
    eig = EigenstrainSpec.uniaxial(3, DensityPolynomial.constant(1.0), "isotropic")
    report = certify_polynomial_conservation(region, C, eig, tol_cert=0.05)
    assert not report.passed


def test_non_ellipsoidality_floor_and_robustness():
    region = voxelize_ellipsoid(EllipsoidPose(EllipsoidAxes(0.8, 1.0, 1.2)), 1 / 32)
    base = non_ellipsoidality_score(region)
    assert base.score <= 0.03
    # removing one voxel must not fake non-ellipsoidality
    damaged = VoxelRegion(region.indices[1:], region.spacing, region.origin)
    perturbed = non_ellipsoidality_score(damaged)
    assert perturbed.score <= 2.0 * max(base.score, 0.01)
    # a cube is clearly flagged relative to the ellipsoid floor
    cube = voxelize_box([0.6, 0.6, 0.6], 1 / 32)
    assert non_ellipsoidality_score(cube).score >= 5 * max(base.score, 1e-3)


def test_density_transform():
    rho = DensityPolynomial.quadratic([1.0, 1.0, 0.25])
    out = rho.transform_diag([1.0, 1.0, 0.5])
    assert np.allclose(out.coefficients, [1.0, 1.0, 1.0])
    rho4 = DensityPolynomial.even_monomial([0.0625, 5.0625, 1.0], 4)
    out4 = rho4.transform_diag([0.5, 1.5, 1.0])
    assert np.allclose(out4.coefficients, [1.0, 1.0, 1.0])


def test_eigenstrain_spec_validation():
    with pytest.raises(DomainError):
        EigenstrainSpec(np.eye(3), RHO_Q, "cubic")  # rank 3, not uniaxial
    spec = EigenstrainSpec.uniaxial(3, RHO_Q, "cubic")
    assert spec.P[2, 2] == 1.0 and spec.P.sum() == 1.0


def test_certification_invariant_under_eigenstrain_scaling():
    C = ElasticTensor.from_constants("cubic", C11=4.0, C12=-1.0, C44=1.0)
    pose = EllipsoidPose(EllipsoidAxes(0.9, 1.1, 1.3))
    region = voxelize_ellipsoid(pose, 1 / 24, subsample=4)
    reports = []
    for amp in (1.0, 37.5):
        density = DensityPolynomial.quadratic([amp, amp, 0.25 * amp])
        eig = EigenstrainSpec.uniaxial(3, density, "cubic")
        reports.append(certify_polynomial_conservation(region, C, eig, tol_cert=0.05))
    assert reports[0].passed == reports[1].passed
    rel0 = reports[0].residual_at_degree / reports[0].field_rms
    rel1 = reports[1].residual_at_degree / reports[1].field_rms
    assert rel0 == pytest.approx(rel1, rel=1e-8)
