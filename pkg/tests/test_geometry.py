import numpy as np
import pytest

from anisoinc.elliptic import EllipsoidAxes
from anisoinc.ellipsoid_potential import EllipsoidPose
from anisoinc.errors import DomainError
from anisoinc.geometry import (
    DiagonalStretch,
    VoxelRegion,
    ellipsoid_fit,
    region_stats,
    stretch_region,
    voxelize_ball,
    voxelize_box,
    voxelize_ellipsoid,
)
from conftest import random_rotation


def test_identity_stretch():
    region = voxelize_ball(0.5, 1 / 16)
    out = stretch_region(region, DiagonalStretch(1, 1, 1))
    assert np.array_equal(out.indices, region.indices)
    assert np.allclose(out.spacing, region.spacing)


def test_stretch_extent_and_volume():
    region = voxelize_box([0.5, 0.5, 0.5], 1 / 16)
    # the omega-1 convention: d = (1, 1, 0.5) doubles the axis-3 extent
    out = stretch_region(region, DiagonalStretch(1.0, 1.0, 0.5))
    c_in, c_out = region.centers(), out.centers()
    assert np.ptp(c_out[:, 2]) == pytest.approx(2.0 * np.ptp(c_in[:, 2]))
    assert np.ptp(c_out[:, 0]) == pytest.approx(np.ptp(c_in[:, 0]))
    v_in = region_stats(region).volume
    v_out = region_stats(out).volume
    assert v_out == pytest.approx(v_in / (1.0 * 1.0 * 0.5), rel=1e-12)


def test_stretch_round_trip_exact():
    region = voxelize_ball(0.6, 1 / 20)
    d = DiagonalStretch(0.7, 1.3, 2.1)
    back = stretch_region(stretch_region(region, d), d.inverse())
    assert np.array_equal(np.sort(back.indices, axis=0), np.sort(region.indices, axis=0))
    assert np.allclose(back.spacing, region.spacing)


def test_region_stats_single_voxel():
    h = 0.25
    region = VoxelRegion(np.array([[0, 0, 0]]), np.full(3, h), np.zeros(3))
    stats = region_stats(region)
    assert stats.volume == pytest.approx(h**3)
    assert np.allclose(stats.centroid, 0.0)


def test_ball_volume():
    region = voxelize_ball(1.0, 1 / 32)
    stats = region_stats(region)
    assert stats.volume == pytest.approx(4 * np.pi / 3, rel=0.02)
    assert np.linalg.norm(stats.centroid) <= region.spacing[0] / 2


def test_empty_region_stats_raises():
    region = VoxelRegion(np.zeros((0, 3)), np.ones(3), np.zeros(3))
    with pytest.raises(DomainError):
        region_stats(region)


def test_ellipsoid_fit_recovers_axes():
    pose = EllipsoidPose(EllipsoidAxes(1.0, 1.5, 2.0))
    region = voxelize_ellipsoid(pose, 1 / 32)
    fit = ellipsoid_fit(region)
    got = np.sort([fit.axes.a1, fit.axes.a2, fit.axes.a3])
    assert np.allclose(got, [1.0, 1.5, 2.0], rtol=0.03)


def test_ellipsoid_fit_sphere():
    region = voxelize_ball(1.0, 1 / 32)
    fit = ellipsoid_fit(region)
    assert np.allclose([fit.axes.a1, fit.axes.a2, fit.axes.a3], 1.0, rtol=0.02)


def test_ellipsoid_fit_rotation():
    rng = np.random.default_rng(9)
    Q = random_rotation(rng)
    pose = EllipsoidPose(EllipsoidAxes(0.6, 1.0, 1.6), rotation=Q, translation=np.array([0.2, -0.1, 0.05]))
    region = voxelize_ellipsoid(pose, 1 / 32)
    fit = ellipsoid_fit(region)
    assert np.linalg.norm(fit.translation - pose.translation) <= 0.02
    # principal directions align within 2 degrees (descending axis order)
    order = np.argsort([0.6, 1.0, 1.6])[::-1]
    for k, axis_idx in enumerate(order):
        got = fit.rotation[:, k]
        want = Q[:, axis_idx]
        angle = np.degrees(np.arccos(min(1.0, abs(float(got @ want)))))
        assert angle <= 2.0


def test_planar_region_rejected():
    idx = np.array([[i, j, 0] for i in range(6) for j in range(6)])
    region = VoxelRegion(idx, np.full(3, 0.1), np.zeros(3))
    with pytest.raises(DomainError):
        ellipsoid_fit(region)
