"""File formats: legacy-ASCII structured-points volumes and voxel-center CSV.

Floats are written with 17 significant digits, which round-trips IEEE
doubles exactly, so export -> import -> export is bit-for-bit stable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fbsolver import Grid, ScalarField
from .geometry import VoxelRegion


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_vtk_structured_points(path, field: ScalarField, name: str, title: str = "anisoinc volume") -> None:
    """Legacy-ASCII structured-points volume with one scalar array."""
    grid = field.grid
    n = grid.n
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {n} {n} {n}",
        f"ORIGIN {_fmt(-grid.L)} {_fmt(-grid.L)} {_fmt(-grid.L)}",
        f"SPACING {_fmt(grid.h)} {_fmt(grid.h)} {_fmt(grid.h)}",
        f"POINT_DATA {n**3}",
        f"SCALARS {name} double",
        "LOOKUP_TABLE default",
    ]
    # VTK structured points order: x varies fastest.
    flat = field.values.transpose(2, 1, 0).ravel()
    lines.extend(_fmt(v) for v in flat)
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk_structured_points(path) -> tuple[ScalarField, str]:
    """Read back a volume written by :func:`write_vtk_structured_points`."""
    lines = Path(path).read_text().splitlines()
    dims = origin = spacing = None
    name = "field"
    data_start = None
    for i, line in enumerate(lines):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "DIMENSIONS":
            dims = tuple(int(p) for p in parts[1:4])
        elif parts[0] == "ORIGIN":
            origin = tuple(float(p) for p in parts[1:4])
        elif parts[0] == "SPACING":
            spacing = tuple(float(p) for p in parts[1:4])
        elif parts[0] == "SCALARS":
            name = parts[1]
        elif parts[0] == "LOOKUP_TABLE":
            data_start = i + 1
            break
    if dims is None or origin is None or spacing is None or data_start is None:
        raise ValueError(f"{path} is not a structured-points volume")
    if len(set(dims)) != 1:
        raise ValueError("only cubic grids are produced by this tool")
    n = dims[0]
    values = np.array([float(v) for line in lines[data_start:] for v in line.split()])
    if values.size != n**3:
        raise ValueError(f"expected {n**3} values, found {values.size}")
    grid = Grid(n=n, L=-origin[0])
    field = ScalarField(grid, values.reshape(n, n, n).transpose(2, 1, 0))
    return field, name


def write_region_csv(path, region: VoxelRegion) -> None:
    """Voxel-center list with an x,y,z header and a lattice metadata comment."""
    lines = [
        "# lattice spacing=%s,%s,%s origin=%s,%s,%s"
        % tuple(_fmt(v) for v in (*region.spacing, *region.origin)),
        "x,y,z",
    ]
    for c in region.centers():
        lines.append(",".join(_fmt(v) for v in c))
    Path(path).write_text("\n".join(lines) + "\n")


def read_region_csv(path) -> VoxelRegion:
    lines = Path(path).read_text().splitlines()
    spacing = None
    origin = np.zeros(3)
    start = 0
    if lines and lines[0].startswith("#"):
        meta = lines[0]
        for token in meta.replace("#", "").split():
            if token.startswith("spacing="):
                spacing = np.array([float(v) for v in token[8:].split(",")])
            elif token.startswith("origin="):
                origin = np.array([float(v) for v in token[7:].split(",")])
        start = 1
    if start < len(lines) and lines[start].strip().lower() == "x,y,z":
        start += 1
    pts = np.array(
        [[float(v) for v in line.split(",")] for line in lines[start:] if line.strip()]
    ).reshape(-1, 3)
    if spacing is None:
        spacing = _infer_spacing(pts)
    idx = np.rint((pts - origin) / spacing).astype(np.int64)
    return VoxelRegion(idx, spacing, origin)


def _infer_spacing(pts: np.ndarray) -> np.ndarray:
    spacing = np.empty(3)
    for k in range(3):
        u = np.unique(pts[:, k])
        d = np.diff(u)
        spacing[k] = d.min() if d.size else 1.0
    return spacing
