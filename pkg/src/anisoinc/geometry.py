"""Voxel regions, diagonal stretches, shape statistics, moment ellipsoid fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .elliptic import EllipsoidAxes
from .ellipsoid_potential import EllipsoidPose
from .errors import DomainError


@dataclass
class VoxelRegion:
    """Occupancy set on a uniform (per-axis) voxel lattice.

    indices: (N, 3) integer voxel indices; spacing: per-axis voxel size;
    origin: center position of voxel (0, 0, 0).  Voxel centers are
    origin + indices * spacing.  ``weights``, when present, holds the
    volume fraction of each cell covered by the underlying shape
    (sub-cell resolution for quadrature); membership/statistics treat
    every listed cell as occupied.
    """

    indices: np.ndarray
    spacing: np.ndarray
    origin: np.ndarray
    component_count: int | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64).reshape(-1, 3)
        self.spacing = np.broadcast_to(np.asarray(self.spacing, dtype=float), (3,)).copy()
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        if np.any(self.spacing <= 0):
            raise DomainError("voxel spacing must be positive")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
            if self.weights.shape[0] != self.indices.shape[0]:
                raise DomainError("weights must match the voxel count")

    def cell_volumes(self) -> np.ndarray:
        base = float(np.prod(self.spacing))
        if self.weights is None:
            return np.full(self.indices.shape[0], base)
        return self.weights * base

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.indices.shape[0] == 0

    def centers(self) -> np.ndarray:
        return self.origin + self.indices * self.spacing

    @property
    def voxel_volume(self) -> float:
        return float(np.prod(self.spacing))

    def to_mask(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense boolean mask over the bounding box and its index offset."""
        if self.is_empty:
            return np.zeros((0, 0, 0), dtype=bool), np.zeros(3, dtype=np.int64)
        lo = self.indices.min(axis=0)
        hi = self.indices.max(axis=0)
        mask = np.zeros(hi - lo + 1, dtype=bool)
        rel = self.indices - lo
        mask[rel[:, 0], rel[:, 1], rel[:, 2]] = True
        return mask, lo

    @classmethod
    def from_mask(cls, mask: np.ndarray, spacing, origin, index_offset=(0, 0, 0)) -> "VoxelRegion":
        idx = np.argwhere(mask) + np.asarray(index_offset, dtype=np.int64)
        return cls(idx, spacing, origin)

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """Nearest-voxel membership of arbitrary points."""
        points = np.atleast_2d(points)
        idx = np.rint((points - self.origin) / self.spacing).astype(np.int64)
        mask, lo = self.to_mask()
        rel = idx - lo
        ok = np.all((rel >= 0) & (rel < np.array(mask.shape)), axis=1)
        out = np.zeros(points.shape[0], dtype=bool)
        if mask.size:
            out[ok] = mask[rel[ok, 0], rel[ok, 1], rel[ok, 2]]
        return out


@dataclass(frozen=True)
class DiagonalStretch:
    """Positive per-axis scale factors d = (d1, d2, d3).

    ``stretch_region(R, d)`` produces {x : diag(d) x in R}: extents scale
    by 1/d_i and volume by 1/(d1 d2 d3).
    """

    d1: float
    d2: float
    d3: float

    def __post_init__(self):
        for name in ("d1", "d2", "d3"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"stretch factor {name} must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.d1, self.d2, self.d3])

    def inverse(self) -> "DiagonalStretch":
        return DiagonalStretch(1.0 / self.d1, 1.0 / self.d2, 1.0 / self.d3)


@dataclass
class RegionStats:
    volume: float
    centroid: np.ndarray
    second_moment: np.ndarray  # central, per unit volume (length^2 units)


def stretch_region(region: VoxelRegion, stretch: DiagonalStretch) -> VoxelRegion:
    """Image of the region under x -> diag(d)^(-1) x.

    The output lattice is the image of the input lattice (per-axis spacing
    h_i / d_i), so the nearest-center membership test against the
    stretched implicit set is exact: occupancy carries over index by
    index and the voxel volume scales by exactly 1/(d1 d2 d3).
    """
    d = stretch.as_array()
    return VoxelRegion(
        indices=region.indices.copy(),
        spacing=region.spacing / d,
        origin=region.origin / d,
        component_count=region.component_count,
        weights=None if region.weights is None else region.weights.copy(),
    )


def region_stats(region: VoxelRegion) -> RegionStats:
    """Volume, centroid, central second moments by voxel summation.

    Each voxel contributes its center plus the exact diag(h^2)/12 cell
    self-moment, which makes the moments exact for axis-aligned boxes and
    second-order accurate for smooth shapes.
    """
    if region.is_empty:
        raise DomainError("region_stats of an empty region")
    centers = region.centers()
    volume = len(region) * region.voxel_volume
    centroid = centers.mean(axis=0)
    rel = centers - centroid
    moment = (rel.T @ rel) / len(region) + np.diag(region.spacing**2) / 12.0
    return RegionStats(volume, centroid, moment)


def ellipsoid_fit(region: VoxelRegion) -> EllipsoidPose:
    """Moment-matched ellipsoid: same centroid, principal axes from the
    second-moment eigenvectors, axis ratios from sqrt of the eigenvalues,
    overall scale fixed by the region's volume.

    For a uniform ellipsoid the central second moment is diag(a_i^2) / 5
    in the body frame, so the fit is exact on true ellipsoids.
    """
    stats = region_stats(region)
    evals, evecs = np.linalg.eigh(stats.second_moment)
    # A flat region's smallest moment is just the voxel self-moment h^2/12.
    cell_floor = float(np.max(region.spacing**2)) / 12.0
    if evals[0] <= 0 or evals[0] < 1.5 * cell_floor:
        raise DomainError("degenerate second moments; region is planar or thinner")
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if np.linalg.det(evecs) < 0:
        evecs[:, 2] = -evecs[:, 2]
    shape = np.sqrt(evals)
    lam = (stats.volume * 3.0 / (4.0 * np.pi) / float(np.prod(shape))) ** (1.0 / 3.0)
    a = lam * shape
    return EllipsoidPose(EllipsoidAxes(*a), rotation=evecs, translation=stats.centroid)


def voxelize_ellipsoid(pose: EllipsoidPose, spacing, origin=None, pad: int = 1,
                       subsample: int = 1) -> VoxelRegion:
    """Voxelize a posed ellipsoid by center-in-set membership.

    ``subsample > 1`` additionally stores per-cell volume fractions
    estimated on a subsample^3 sub-lattice (cells with any coverage are
    kept), which upgrades quadratures over the region from O(h) surface
    accuracy to near O(h^2).
    """
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (3,)).copy()
    amax = float(np.max(pose.axes.as_array()))
    lo_corner = pose.translation - amax - pad * spacing
    hi_corner = pose.translation + amax + pad * spacing
    if origin is None:
        origin = np.zeros(3)
    lo = np.floor((lo_corner - origin) / spacing).astype(np.int64)
    hi = np.ceil((hi_corner - origin) / spacing).astype(np.int64)
    axes_idx = [np.arange(lo[k], hi[k] + 1) for k in range(3)]
    grid = np.stack(np.meshgrid(*axes_idx, indexing="ij"), axis=-1).reshape(-1, 3)
    centers = origin + grid * spacing
    if subsample <= 1:
        inside = pose.contains(centers)
        return VoxelRegion(grid[inside], spacing, np.asarray(origin, dtype=float))
    s = (np.arange(subsample) + 0.5) / subsample - 0.5
    offsets = np.stack(np.meshgrid(s, s, s, indexing="ij"), axis=-1).reshape(-1, 3) * spacing
    frac = np.zeros(centers.shape[0])
    for off in offsets:
        frac += pose.contains(centers + off)
    frac /= offsets.shape[0]
    keep = frac > 0
    return VoxelRegion(grid[keep], spacing, np.asarray(origin, dtype=float), weights=frac[keep])


def voxelize_ball(radius: float, spacing: float, center=(0.0, 0.0, 0.0)) -> VoxelRegion:
    pose = EllipsoidPose(EllipsoidAxes(radius, radius, radius), translation=np.asarray(center, dtype=float))
    return voxelize_ellipsoid(pose, spacing)


def voxelize_box(halfwidths, spacing) -> VoxelRegion:
    """Axis-aligned box [-w1,w1]x[-w2,w2]x[-w3,w3] by center membership."""
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (3,)).copy()
    w = np.asarray(halfwidths, dtype=float)
    hi = np.floor((w - 1e-12) / spacing).astype(np.int64)
    axes_idx = [np.arange(-hi[k], hi[k] + 1) for k in range(3)]
    grid = np.stack(np.meshgrid(*axes_idx, indexing="ij"), axis=-1).reshape(-1, 3)
    centers = grid * spacing
    inside = np.all(np.abs(centers) <= w, axis=1)
    return VoxelRegion(grid[inside], spacing, np.zeros(3))


def connected_components(region: VoxelRegion) -> tuple[int, VoxelRegion, list[int]]:
    """6-connected components: count, largest component, sizes (descending)."""
    if region.is_empty:
        return 0, region, []
    mask, lo = region.to_mask()
    structure = ndimage.generate_binary_structure(3, 1)  # 6-connectivity
    labels, count = ndimage.label(mask, structure=structure)
    sizes = np.bincount(labels.ravel())[1:]
    order = np.argsort(sizes)[::-1]
    largest = VoxelRegion.from_mask(labels == order[0] + 1, region.spacing, region.origin, lo)
    largest.component_count = 1
    return int(count), largest, sorted((int(s) for s in sizes), reverse=True)


def symmetric_difference_volume(a: VoxelRegion, b: VoxelRegion) -> float:
    """Volume of the symmetric difference of two regions on the same lattice."""
    if not np.allclose(a.spacing, b.spacing) or not np.allclose(a.origin, b.origin):
        raise DomainError("regions must share a lattice for exact symmetric difference")
    sa = {tuple(r) for r in a.indices}
    sb = {tuple(r) for r in b.indices}
    return len(sa ^ sb) * a.voxel_volume


def interior_indices(region: VoxelRegion, shells: int) -> np.ndarray:
    """Indices of voxels surviving ``shells`` erosions (6-connectivity)."""
    mask, lo = region.to_mask()
    if shells > 0:
        structure = ndimage.generate_binary_structure(3, 1)
        mask = ndimage.binary_erosion(mask, structure=structure, iterations=shells)
    return np.argwhere(mask) + lo
