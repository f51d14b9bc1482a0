import numpy as np
import pytest

from anisoinc.elliptic import EllipsoidAxes, compute_i_integrals
from anisoinc.ellipsoid_potential import (
    EllipsoidPose,
    eval_polynomial_potential,
    potential_at,
    quadratic_density_coefficients,
    quartic_j_distinct,
    quartic_j_general,
    spheroid_quartic_coeffs,
)
from anisoinc.errors import DomainError
from anisoinc.geometry import voxelize_ellipsoid
from anisoinc.verify import DensityPolynomial, potential_quadrature
from conftest import random_rotation

SPHERE_J = np.array([-1 / 20, -1 / 20, -1 / 20, -1 / 10, -1 / 10, -1 / 10])


def test_sphere_coefficients_exact():
    coeffs = quadratic_density_coefficients(EllipsoidPose(EllipsoidAxes(1, 1, 1)))
    assert np.max(np.abs(coeffs.J - SPHERE_J)) < 1e-12
    assert coeffs.C_E == pytest.approx(0.25, abs=1e-12)
    assert np.all(coeffs.A == 0) and np.all(coeffs.H == 0)
    assert np.allclose(coeffs.B, 0.0, atol=1e-12)


def test_untranslated_pose_has_no_odd_terms():
    rng = np.random.default_rng(5)
    pose = EllipsoidPose(EllipsoidAxes(0.7, 1.2, 1.9), rotation=random_rotation(rng))
    coeffs = quadratic_density_coefficients(pose)
    assert np.all(coeffs.A == 0)
    assert np.all(coeffs.H == 0)


def test_polynomial_evaluation():
    coeffs = quadratic_density_coefficients(EllipsoidPose(EllipsoidAxes(1, 1, 1)))
    assert eval_polynomial_potential(coeffs, np.zeros(3)) == pytest.approx(coeffs.C_E)
    val = eval_polynomial_potential(coeffs, np.array([0.5, 0.0, 0.0]))
    expected = coeffs.C_E + coeffs.B[0] * 0.25 + coeffs.J[0] * 0.0625
    assert val == pytest.approx(expected, abs=1e-15)


def test_spheroid_relation_and_sphere_limit():
    for e in (0.3, 0.5, 0.8, 1.25, 2.0, 3.0):
        family = "oblate" if e < 1 else "prolate"
        J = spheroid_quartic_coeffs(e, family)
        assert J[0] == pytest.approx(J[1], abs=1e-12)
        assert J[0] == pytest.approx(J[3] / 2, abs=1e-9)
    for e in (1 - 1e-4, 1 + 1e-4):
        family = "oblate" if e < 1 else "prolate"
        J = spheroid_quartic_coeffs(e, family)
        assert np.max(np.abs(J - SPHERE_J)) < 1e-3


def test_spheroid_matches_general_axes_path():
    J_closed = spheroid_quartic_coeffs(2.0, "prolate")
    J_general = quartic_j_general(EllipsoidAxes(1.0, 1.0, 2.0))
    assert np.max(np.abs(J_closed - J_general)) < 1e-9


def test_spheroid_family_validation():
    with pytest.raises(DomainError):
        spheroid_quartic_coeffs(2.0, "oblate")
    with pytest.raises(DomainError):
        spheroid_quartic_coeffs(0.5, "prolate")
    with pytest.raises(DomainError):
        spheroid_quartic_coeffs(1.0, "prolate")


def test_j_quotient_form_cross_check():
    axes = EllipsoidAxes(0.9, 1.2, 1.6)
    table = compute_i_integrals(axes)
    assert np.max(np.abs(quartic_j_general(axes, table) - quartic_j_distinct(axes, table))) < 1e-10


def test_posed_ellipsoid_matches_voxel_quadrature():
    rng = np.random.default_rng(11)
    rho = DensityPolynomial.quadratic([1.0, 1.0, 1.0])
    for _ in range(2):
        axes = EllipsoidAxes(*rng.uniform(0.6, 1.5, size=3))
        pose = EllipsoidPose(axes, rotation=random_rotation(rng), translation=rng.uniform(-0.3, 0.3, 3))
        region = voxelize_ellipsoid(pose, 2.0 * max(axes.as_array()) / 120)
        z = rng.uniform(-1, 1, size=(300, 3))
        z = z[np.sum((z / axes.as_array()) ** 2, axis=1) <= 0.8**2][:20]
        x = z @ pose.rotation.T + pose.translation
        nq = potential_quadrature(region, rho, x)
        ne = potential_at(pose, x)
        assert np.max(np.abs(nq - ne)) <= 0.01 * np.max(np.abs(ne))


def test_j_never_matches_the_pure_quartic_patterns():
    """The quartic target patterns (scaled sum of fourth powers alone, or the
    half-rotated pattern with J1 = J3 = J2/2, J4 = J5 = 0) stay bounded away
    from every spheroid/sphere J-vector: the residual floor is reported."""
    target_b = np.array([-1 / 24, -1 / 12, -1 / 24, 0.0, 0.0, -1 / 4])
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    pair_slot = {frozenset((0, 1)): 3, frozenset((1, 2)): 4, frozenset((2, 0)): 5}

    def permute(J, p):
        Jp = np.empty(6)
        for k in range(3):
            Jp[k] = J[p[k]]
        for (k, l), slot in (((0, 1), 3), ((1, 2), 4), ((2, 0), 5)):
            Jp[slot] = J[pair_slot[frozenset((p[k], p[l]))]]
        return Jp

    def pattern_residual(J):
        norm = np.linalg.norm(J)
        res_a = np.linalg.norm(J[3:]) / norm  # J4=J5=J6=0 pattern
        res_b = np.inf
        for p in perms:
            Jp = permute(J, p)
            s = float(Jp @ target_b) / float(target_b @ target_b)  # best scale
            res_b = min(res_b, np.linalg.norm(Jp - s * target_b) / norm)
        return min(res_a, res_b)

    floor = np.inf
    for a3 in np.linspace(0.5, 2.0, 7):
        if abs(a3 - 1.0) < 1e-9:
            J = SPHERE_J
        else:
            J = spheroid_quartic_coeffs(a3, "oblate" if a3 < 1 else "prolate")
        floor = min(floor, pattern_residual(J))
    for axes in [(0.5, 1.0, 2.0), (0.7, 1.3, 1.9), (0.6, 0.9, 1.4)]:
        floor = min(floor, pattern_residual(quartic_j_general(EllipsoidAxes(*axes))))
    # measured floor; the patterns are unreachable by ellipsoids
    assert floor > 0.05
