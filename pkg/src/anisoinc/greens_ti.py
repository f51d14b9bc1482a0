"""Explicit Green functions for transversely isotropic media and the
displacement field of uniform-eigenstress inclusions as gradients of
single-kernel potentials.

Two closed-form branches:

* non-degenerate, sqrt(C11*C33) - C13 - 2*C44 > 0: kernels R_i with the
  two quartic roots v1 >= v2 plus the shear root v3 = sqrt((C11-C12)/(2 C44));
* degenerate, sqrt(C11*C33) = C13 + 2*C44: the quartic has the double
  root v = (C11/C33)^(1/4) and the Green function picks up R0-kernel
  terms with polynomial prefactors.

Displacements of an inclusion with uniform axisymmetric eigenstress
(s11 = s22, s33, zero shear) reduce to

    u(x) = sum_i K^i . grad int_Omega 1/R_i(x - y) dy             (non-deg.)
    u(x) = K^1 . grad int 1/R0 dy + K^2 . grad int dz^2/R0^3 dy   (deg.)

with diagonal K^i built from the constants below (see
:func:`displacement_coefficients`).  When s33/s11 equals the material
ratio gamma, the second kernel's coefficients vanish and the field
collapses to a single potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, UnsupportedInputError
from .geometry import VoxelRegion
from .materials import ElasticTensor, ti_quartic_roots, validate_elastic_tensor

_FOUR_PI = 4.0 * math.pi
_EIGHT_PI = 8.0 * math.pi


@dataclass(frozen=True)
class TIGreenConstants:
    """Material constants of the closed-form TI Green function."""

    degenerate: bool
    v1: float
    v2: float
    v3: float
    A: tuple[float, float] | None = None
    H: tuple[float, float] | None = None
    k: tuple[float, float] | None = None
    v: float | None = None  # degenerate double root

    def __post_init__(self):
        if not self.degenerate:
            if not (self.v1 >= self.v2 > 0.0):
                raise DomainError("need v1 >= v2 > 0")


def _require_ti(C: ElasticTensor) -> None:
    if C.symmetry_class != "transversely_isotropic":
        raise DomainError("Green function requires a transversely isotropic tensor")
    report = validate_elastic_tensor(C)
    if not report.passed:
        raise DomainError(f"tensor fails positive definiteness: {report.violations}")


def degeneracy_gap(C: ElasticTensor) -> float:
    g = C.entry
    return math.sqrt(g("C11") * g("C33")) - g("C13") - 2.0 * g("C44")


def ti_constants(C: ElasticTensor) -> TIGreenConstants:
    """All constants of the applicable branch.

    Raises DomainError for the complex-root regime
    sqrt(C11*C33) - C13 - 2*C44 < 0 and for C13 + C44 = 0 (the closed
    forms divide by C13 + C44).
    """
    _require_ti(C)
    g = C.entry
    c11, c12, c13, c33, c44 = (g(k) for k in ("C11", "C12", "C13", "C33", "C44"))
    if c13 + c44 == 0.0:
        raise DomainError("closed-form constants require C13 + C44 != 0")
    gap = degeneracy_gap(C)
    v3 = math.sqrt((c11 - c12) / (2.0 * c44))
    scale = math.sqrt(c11 * c33)
    if gap < -1e-10 * scale:
        raise DomainError(
            "complex-root regime: sqrt(C11*C33) - C13 - 2*C44 = "
            f"{gap:.6e} < 0 is out of scope"
        )
    if abs(gap) <= 1e-10 * scale:
        v = (c11 / c33) ** 0.25
        return TIGreenConstants(True, v, v, v3, v=v)
    v1, v2 = ti_quartic_roots(C)
    dd = v2 * v2 - v1 * v1  # negative for v1 > v2
    A = tuple(
        (-1.0) ** (i + 1) * (c13 + c44) / (_FOUR_PI * c33 * c44 * dd * vi)
        for i, vi in ((1, v1), (2, v2))
    )
    k = tuple((c11 / (vi * vi) - c44) / (c13 + c44) for vi in (v1, v2))
    H = tuple(
        (-1.0) ** i * (c44 - c33 * vi * vi) / (_EIGHT_PI * c33 * c44 * dd * vi * vi)
        for i, vi in ((1, v1), (2, v2))
    )
    return TIGreenConstants(False, v1, v2, v3, A=A, H=H, k=k)


def green_ti(C: ElasticTensor, x: np.ndarray) -> np.ndarray:
    """Closed-form Green function G(x) for a TI medium, x != 0.

    The expressions carry rho^4 = (x1^2 + x2^2)^2 denominators whose
    singular parts cancel between terms; points within 1e-8 |x| of the
    symmetry axis are rejected as numerically unstable.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise DomainError("Green function is singular at x = 0")
    x1, x2, x3 = x
    rho2 = x1 * x1 + x2 * x2
    if rho2 < (1e-8 * r) ** 2:
        raise DomainError("point too close to the symmetry axis for the rho^-4 forms")
    con = ti_constants(C)
    g = C.entry
    c44 = g("C44")
    rho4 = rho2 * rho2
    G = np.zeros((3, 3))
    v3 = con.v3
    R3 = math.sqrt(rho2 + v3 * v3 * x3 * x3)
    if not con.degenerate:
        # The H-weighted in-plane terms carry the opposite sign to the A/k
        # terms; the combination is pinned by the equilibrium identity
        # C_ijkl d_j d_l G_km = 0 away from the origin (see tests).
        for vi, Ai, Hi, ki in zip((con.v1, con.v2), con.A, con.H, con.k):
            Ri = math.sqrt(rho2 + vi * vi * x3 * x3)
            G[0, 0] += -2.0 * vi * Hi * (x2 * x2 * Ri * Ri - vi * vi * x1 * x1 * x3 * x3) / (rho4 * Ri)
            G[1, 1] += -2.0 * vi * Hi * (x1 * x1 * Ri * Ri - vi * vi * x2 * x2 * x3 * x3) / (rho4 * Ri)
            G[0, 1] += 2.0 * vi * Hi * x1 * x2 * (rho2 + 2.0 * vi * vi * x3 * x3) / (rho4 * Ri)
            G[0, 2] += -vi * Ai * vi * x1 * x3 / (rho2 * Ri)
            G[1, 2] += -vi * Ai * vi * x2 * x3 / (rho2 * Ri)
            G[2, 2] += vi * vi * ki * Ai / Ri
        G[0, 0] += (x1 * x1 * R3 * R3 - v3 * v3 * x2 * x2 * x3 * x3) / (_FOUR_PI * c44 * v3 * rho4 * R3)
        G[1, 1] += (x2 * x2 * R3 * R3 - v3 * v3 * x1 * x1 * x3 * x3) / (_FOUR_PI * c44 * v3 * rho4 * R3)
        G[0, 1] += x1 * x2 * (rho2 + 2.0 * v3 * v3 * x3 * x3) / (_FOUR_PI * c44 * v3 * rho4 * R3)
    else:
        c13, c33 = g("C13"), g("C33")
        v = con.v
        R0 = math.sqrt(rho2 + v * v * x3 * x3)
        ax3 = abs(x3)
        s3 = R3 + v3 * ax3
        s0 = R0 + v * ax3
        U = (
            -1.0 / (_EIGHT_PI * c33 * v**3 * R0**3)
            + (2.0 * v * v * x3 * x3 * s0 * s0 - rho4)
            / (_EIGHT_PI * c44 * v * R0**3 * s0**4)
        )
        common = (1.0 / (c33 * v * v) + rho2 / (c44 * s0 * s0)) / (_EIGHT_PI * v * R0)
        G[0, 0] = (s3 * R3 - x2 * x2) / (_FOUR_PI * c44 * v3 * s3 * s3 * R3) + common + U * x1 * x1
        G[1, 1] = (s3 * R3 - x1 * x1) / (_FOUR_PI * c44 * v3 * s3 * s3 * R3) + common + U * x2 * x2
        G[0, 1] = x1 * x2 / (_FOUR_PI * c44 * v3 * s3 * s3 * R3) + U * x1 * x2
        G[0, 2] = (c13 + c44) * x1 * x3 / (_EIGHT_PI * c33 * c44 * v * R0**3)
        G[1, 2] = (c13 + c44) * x2 * x3 / (_EIGHT_PI * c33 * c44 * v * R0**3)
        G[2, 2] = ((v * v * c33 + c44) * rho2 + 2.0 * c33 * v**4 * x3 * x3) / (
            _EIGHT_PI * c33 * c44 * v * R0**3
        )
    G[1, 0] = G[0, 1]
    G[2, 0] = G[0, 2]
    G[2, 1] = G[1, 2]
    return G


def _check_eigenstress(sigma_star: np.ndarray) -> tuple[float, float]:
    s = np.asarray(sigma_star, dtype=float)
    if s.shape != (3, 3):
        raise UnsupportedInputError("eigenstress must be a 3x3 matrix")
    scale = max(float(np.max(np.abs(s))), 1e-300)
    off = np.abs(s - np.diag(np.diag(s))).max()
    if off > 1e-12 * scale or abs(s[0, 0] - s[1, 1]) > 1e-12 * scale:
        raise UnsupportedInputError(
            "supported eigenstress is axisymmetric: s11 = s22, s33, no shear"
        )
    return float(s[0, 0]), float(s[2, 2])


@dataclass
class DisplacementCoefficients:
    """Kernel multipliers of the displacement representation.

    Non-degenerate: u_{1,2} = sum_i radial_i * (grad w_i)_{1,2} and
    u_3 = sum_i axial_i * (grad w_i)_3, with w_i = int 1/R_{v_i} dy.
    Degenerate: the two kernels are w0 = int 1/R0 dy and
    wt = int dz^2/R0^3 dy (same pattern).

    At the gamma eigenstress ratio the second kernel's multipliers vanish
    and the field collapses to a single potential.
    """

    degenerate: bool
    radial: tuple[float, float]
    axial: tuple[float, float]
    metrics: tuple[float, float]


def displacement_coefficients(C: ElasticTensor, sigma_star: np.ndarray) -> DisplacementCoefficients:
    """Multipliers fixed by differentiating the (equilibrium-validated)
    Green function and contracting with the eigenstress:

        radial_i = v_i (2 H_i s11 - A_i v_i s33)
        axial_i  = A_i (s11 - k_i v_i^2 s33)

    (quartic identity (C11 - C44 v^2)(C33 v^2 - C44) = (C13 + C44)^2 v^2
    makes axial_2 vanish together with radial_2 at the gamma ratio).
    """
    s11, s33 = _check_eigenstress(sigma_star)
    con = ti_constants(C)
    g = C.entry
    c13, c33, c44 = g("C13"), g("C33"), g("C44")
    if not con.degenerate:
        radial = tuple(
            vi * (2.0 * Hi * s11 - Ai * vi * s33)
            for vi, Ai, Hi in zip((con.v1, con.v2), con.A, con.H)
        )
        axial = tuple(
            Ai * (s11 - ki * vi * vi * s33)
            for vi, Ai, ki in zip((con.v1, con.v2), con.A, con.k)
        )
        return DisplacementCoefficients(False, radial, axial, (con.v1**2, con.v2**2))
    v = con.v
    den3 = _EIGHT_PI * c33 * c44 * v**3
    den1 = _EIGHT_PI * c33 * c44 * v
    b1 = -((c33 * v * v + c44) * s11 - (c13 + c44) * v * v * s33) / den3
    b2 = ((c33 * v * v - c44) * s11 - (c13 + c44) * v * v * s33) / den1
    b1p = ((c13 + c44) * s11 - (c33 * v * v + c44) * v * v * s33) / den3
    b2p = ((c13 + c44) * s11 - (c33 * v * v - c44) * v * v * s33) / den1
    return DisplacementCoefficients(True, (b1, b2), (b1p, b2p), (v * v, v * v))


def eigenstress_gamma_ratio(C: ElasticTensor) -> float:
    """gamma = (C11*C33 - C33*C44*v^2) / ((C13 + C44)*C11), v the larger root."""
    from .materials import ti_gamma

    con = ti_constants(C)
    v = con.v if con.degenerate else con.v1
    return ti_gamma(C, v)


def displacement_uniform_eigenstrain(
    region: VoxelRegion,
    C: ElasticTensor,
    sigma_star: np.ndarray,
    points: np.ndarray,
) -> np.ndarray:
    """Displacement at query points from a uniform axisymmetric eigenstress
    prescribed on a voxel region, by voxel quadrature of the analytic
    kernel gradients (the self-voxel gradient integral vanishes by
    symmetry and is skipped exactly).
    """
    if region.is_empty:
        return np.zeros((np.atleast_2d(points).shape[0], 3))
    coeffs = displacement_coefficients(C, sigma_star)
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    src = np.ascontiguousarray(region.centers())
    w = np.ascontiguousarray(region.cell_volumes())
    # Zero out the voxel containing each query point: its exact gradient
    # integral vanishes at the center and the near-singular midpoint value
    # would otherwise dominate the sum.  Points within rounding distance of
    # a center are snapped onto it so the in-kernel r = 0 skip applies
    # (a 1-ulp offset would otherwise be absorbed catastrophically).
    key = {tuple(r): i for i, r in enumerate(region.indices)}
    idx = np.rint((pts - region.origin) / region.spacing).astype(np.int64)
    cell_centers = region.origin + idx * region.spacing
    offset = pts - cell_centers
    inside = np.all(np.abs(offset) <= region.spacing / 2 + 1e-12, axis=1)
    snap = inside & np.all(np.abs(offset) <= 1e-9 * region.spacing, axis=1)
    pts[snap] = cell_centers[snap]
    self_pairs = [
        (a, key[tuple(idx[a])])
        for a in np.nonzero(inside & ~snap)[0]
        if tuple(idx[a]) in key
    ]
    u = np.zeros((pts.shape[0], 3))
    def grad_sum(kernel_fn, vsq):
        out = kernel_fn(pts, src, w, vsq)
        for a, b in self_pairs:
            out[a] -= kernel_fn(
                np.ascontiguousarray(pts[a : a + 1]),
                np.ascontiguousarray(src[b : b + 1]),
                np.ascontiguousarray(w[b : b + 1]),
                vsq,
            )[0]
        return out

    if not coeffs.degenerate:
        for (a, ap, vsq) in zip(coeffs.radial, coeffs.axial, coeffs.metrics):
            grad = grad_sum(kernels.aniso_grad_inv_r_sum, vsq)
            u[:, 0] += a * grad[:, 0]
            u[:, 1] += a * grad[:, 1]
            u[:, 2] += ap * grad[:, 2]
    else:
        vsq = coeffs.metrics[0]
        g0 = grad_sum(kernels.aniso_grad_inv_r_sum, vsq)
        gt = grad_sum(kernels.aniso_grad_z2_r3_sum, vsq)
        b1, b2 = coeffs.radial
        b1p, b2p = coeffs.axial
        u[:, 0] = b1 * g0[:, 0] + b2 * gt[:, 0]
        u[:, 1] = b1 * g0[:, 1] + b2 * gt[:, 1]
        u[:, 2] = b1p * g0[:, 2] + b2p * gt[:, 2]
    return u
