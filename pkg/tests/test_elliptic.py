import numpy as np
import pytest

from anisoinc.elliptic import (
    EllipsoidAxes,
    compute_i_integrals,
    i_integrals_quadrature,
    recurrence_residuals,
)
from anisoinc.errors import DomainError


def test_unit_sphere_values():
    t = compute_i_integrals(EllipsoidAxes(1, 1, 1))
    assert t.I == pytest.approx(1.0, abs=1e-13)
    assert np.allclose(t.Ii, 1 / 3, atol=1e-13)
    assert np.allclose(t.Iij, 1 / 5, atol=1e-13)
    assert np.allclose(t.Iijk, 1 / 7, atol=1e-13)


def test_nonpositive_axis_rejected():
    with pytest.raises(DomainError):
        EllipsoidAxes(1.0, 0.0, 1.0)


def test_general_axes_match_quadrature_oracle():
    axes = EllipsoidAxes(1.0, 1.3, 1.7)
    table = compute_i_integrals(axes)
    oracle = i_integrals_quadrature(axes)
    assert abs(table.I - oracle.I) < 1e-10
    assert np.max(np.abs(table.Iij - oracle.Iij)) < 1e-8
    assert np.max(np.abs(table.Iijk - oracle.Iijk)) < 1e-8
    res = recurrence_residuals(axes, table)
    assert res["sum"] < 1e-10
    assert max(res.values()) < 1e-8


def test_random_axes_against_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        axes = EllipsoidAxes(*rng.uniform(0.5, 2.0, size=3))
        table = compute_i_integrals(axes)
        oracle = i_integrals_quadrature(axes)
        assert abs(table.Ii.sum() - 1.0) < 1e-10
        assert np.max(np.abs(table.Iij - oracle.Iij)) < 1e-8
        assert np.max(np.abs(table.Iijk - oracle.Iijk)) < 1e-8


@pytest.mark.parametrize("axes", [(1.0, 1.0, 2.0), (1.5, 0.7, 0.7), (2.0, 1.0, 2.0)])
def test_spheroid_degenerate_forms_match_quadrature(axes):
    table = compute_i_integrals(EllipsoidAxes(*axes))
    oracle = i_integrals_quadrature(EllipsoidAxes(*axes))
    assert np.max(np.abs(table.Iij - oracle.Iij)) < 1e-9
    assert np.max(np.abs(table.Iijk - oracle.Iijk)) < 1e-9


def test_nearly_equal_axes_stay_finite():
    table = compute_i_integrals(EllipsoidAxes(1.0, 1.0 + 1e-12, 2.0))
    oracle = i_integrals_quadrature(EllipsoidAxes(1.0, 1.0, 2.0))
    assert np.max(np.abs(table.Iij - oracle.Iij)) < 1e-8


def test_scaling_invariants():
    rng = np.random.default_rng(1)
    for _ in range(10):
        a = rng.uniform(0.5, 2.0, size=3)
        lam = rng.uniform(0.5, 3.0)
        t1 = compute_i_integrals(EllipsoidAxes(*a))
        t2 = compute_i_integrals(EllipsoidAxes(*(lam * a)))
        assert t2.I == pytest.approx(lam**2 * t1.I, rel=1e-10)
        assert np.allclose(t2.Ii, t1.Ii, atol=1e-10)
        # dimensionless combinations a_i^2 I_ij and a_i^4 I_iij are scale-free
        for i in range(3):
            for j in range(3):
                assert (lam * a[i]) ** 2 * t2.Iij[i, j] == pytest.approx(
                    a[i] ** 2 * t1.Iij[i, j], rel=1e-9
                )
                assert (lam * a[i]) ** 4 * t2.Iijk[i, i, j] == pytest.approx(
                    a[i] ** 4 * t1.Iijk[i, i, j], rel=1e-9
                )
