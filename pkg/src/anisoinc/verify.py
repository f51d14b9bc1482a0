"""Independent verification of constructed inclusions.

Direct voxel quadrature of the Newtonian potential (with exact box
self-cell correction), finite-difference Hessians, the per-symmetry
Hessian-to-strain maps, polynomial-degree certification by least squares
in a graded-lex monomial basis, and a numeric non-ellipsoidality score.

Sign convention: N[rho](x) = -int rho(y)/(4 pi |x-y|) dy, so that
Delta N = rho inside the region and trace(Hessian) vanishes outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ellipsoid_potential import quadratic_density_coefficients, eval_polynomial_potential
from .errors import DomainError, UnsupportedInputError
from .geometry import (
    DiagonalStretch,
    VoxelRegion,
    ellipsoid_fit,
    interior_indices,
    stretch_region,
    voxelize_ellipsoid,
)
from .materials import ElasticTensor, scale_factors, stretch_diagonal

CASES = ("cubic", "transiso", "transiso_gamma", "ortho_mono", "isotropic", "general_even")


@dataclass(frozen=True)
class DensityPolynomial:
    """Mass density: constant c0, quadratic -sum c_k x_k^2, or even
    monomial -sum d_i x_i^n."""

    form: str
    coefficients: np.ndarray
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, dtype=float)))
        if self.form not in ("constant", "quadratic", "even_monomial"):
            raise ValueError(f"unknown density form {self.form!r}")
        if self.degree % 2:
            raise DomainError("density degree must be even")

    @classmethod
    def constant(cls, c0: float) -> "DensityPolynomial":
        return cls("constant", np.array([float(c0)]), 0)

    @classmethod
    def quadratic(cls, c) -> "DensityPolynomial":
        return cls("quadratic", np.asarray(c, dtype=float).reshape(3), 2)

    @classmethod
    def even_monomial(cls, d, n: int) -> "DensityPolynomial":
        if n < 4 or n % 2:
            raise DomainError("even_monomial needs even n >= 4 (use quadratic for n = 2)")
        return cls("even_monomial", np.asarray(d, dtype=float).reshape(3), int(n))

    def eval(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.form == "constant":
            return np.full(pts.shape[0], self.coefficients[0])
        if self.form == "quadratic":
            return -(pts**2) @ self.coefficients
        return -(pts**self.degree) @ self.coefficients

    def transform_diag(self, q) -> "DensityPolynomial":
        """Density in stretched coordinates y' = diag(q) y: rho'(y') = rho(y'/q)."""
        q = np.asarray(q, dtype=float).reshape(3)
        if self.form == "constant":
            return self
        return DensityPolynomial(self.form, self.coefficients / q**self.degree, self.degree)

    def to_dict(self) -> dict:
        return {
            "form": self.form,
            "coefficients": [float(c) for c in self.coefficients],
            "degree": self.degree,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DensityPolynomial":
        form = data["form"]
        if form == "constant":
            return cls.constant(data["coefficients"][0] if isinstance(data["coefficients"], list) else data["coefficients"])
        if form == "quadratic":
            return cls.quadratic(data["coefficients"])
        return cls.even_monomial(data["coefficients"], int(data["degree"]))


@dataclass(frozen=True)
class EigenstrainSpec:
    """Uniaxial eigenstress direction P (rank-1 symmetric 0/1 matrix),
    its polynomial amplitude, and the material case tag."""

    P: np.ndarray
    density: DensityPolynomial
    case: str

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.shape != (3, 3) or np.max(np.abs(P - P.T)) > 0:
            raise DomainError("P must be a symmetric 3x3 matrix")
        if not set(np.unique(P)) <= {0.0, 1.0} or np.linalg.matrix_rank(P) != 1 or P.trace() != 1.0:
            raise DomainError("P must be a rank-1 0/1 uniaxial direction matrix")
        P.setflags(write=False)
        object.__setattr__(self, "P", P)
        if self.case not in CASES:
            raise ValueError(f"unknown case tag {self.case!r}")

    @classmethod
    def uniaxial(cls, axis: int, density: DensityPolynomial, case: str) -> "EigenstrainSpec":
        P = np.zeros((3, 3))
        P[axis - 1, axis - 1] = 1.0
        return cls(P, density, case)


# ---------------------------------------------------------------------------
# Newtonian potential quadrature


def _corner_integral(a, b, c):
    """int_0^a int_0^b int_0^c dx dy dz / r, any nonnegative sides (vectorized)."""
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    r = np.sqrt(a * a + b * b + c * c)
    out = np.zeros_like(r)

    def asinh_term(p, q, s):
        den = np.hypot(q, s)
        return np.where(den > 0, q * s * np.arcsinh(np.divide(p, den, where=den > 0, out=np.zeros_like(den))), 0.0)

    def atan_term(p, q, s):
        pr = p * r
        return np.where(pr > 0, 0.5 * p * p * np.arctan(np.divide(q * s, pr, where=pr > 0, out=np.zeros_like(pr))), 0.0)

    out = (
        asinh_term(a, b, c) + asinh_term(b, c, a) + asinh_term(c, a, b)
        - atan_term(a, b, c) - atan_term(b, c, a) - atan_term(c, a, b)
    )
    return out


def box_self_potential(spacing, offset=(0.0, 0.0, 0.0)) -> float:
    """int_box 1/(4 pi |y - x|) dy for a box of side lengths ``spacing``
    centered at the origin, evaluated at interior point x = offset,
    by splitting into the 8 octant boxes cornered at x (exact)."""
    h = np.broadcast_to(np.asarray(spacing, dtype=float), (3,))
    off = np.asarray(offset, dtype=float).reshape(3)
    if np.any(np.abs(off) > h / 2):
        raise DomainError("self-potential point must lie inside the box")
    total = 0.0
    for sx in (-1, 1):
        for sy in (-1, 1):
            for sz in (-1, 1):
                sides = [h[k] / 2 - s * off[k] for k, s in enumerate((sx, sy, sz))]
                total += float(_corner_integral(*sides))
    return total / (4.0 * math.pi)


def potential_quadrature(region: VoxelRegion, rho: DensityPolynomial, x: np.ndarray) -> np.ndarray | float:
    """N(x) = -sum_v rho(y_v) h^3 / (4 pi |x - y_v|), the voxel containing
    x (if occupied) replaced by rho(x) times the exact box self potential."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.ascontiguousarray(np.atleast_2d(x))
    if region.is_empty:
        out = np.zeros(pts.shape[0])
        return float(out[0]) if single else out
    centers = np.ascontiguousarray(region.centers())
    charge = np.ascontiguousarray(rho.eval(centers) * region.cell_volumes() / (4.0 * math.pi))

    # Map each query point to the index of the occupied voxel containing it.
    idx = np.rint((pts - region.origin) / region.spacing).astype(np.int64)
    key = {tuple(r): i for i, r in enumerate(region.indices)}
    skip = np.full(pts.shape[0], -1, dtype=np.int64)
    inside_box = np.all(np.abs(pts - (region.origin + idx * region.spacing)) <= region.spacing / 2 + 1e-12, axis=1)
    for a in np.nonzero(inside_box)[0]:
        skip[a] = key.get(tuple(idx[a]), -1)

    out = -kernels.inv_r_sum(pts, centers, charge, np.ascontiguousarray(skip))
    has_self = skip >= 0
    fractions = region.weights
    for a in np.nonzero(has_self)[0]:
        center = region.origin + idx[a] * region.spacing
        self_pot = box_self_potential(region.spacing, pts[a] - center)
        if fractions is not None:
            self_pot *= float(fractions[skip[a]])
        out[a] -= float(rho.eval(pts[a])[0]) * self_pot
    return float(out[0]) if single else out


def hessian_field(
    region: VoxelRegion,
    rho: DensityPolynomial,
    points: np.ndarray,
    step: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Hessians of the quadrature potential.

    Default step is two voxel spacings.  Returns (hessians (M,3,3),
    ok_flags (M,)) where a sample is flagged False if any stencil point
    leaves the region (boundary noise dominates there).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[0]
    s = 2.0 * float(np.max(region.spacing)) if step is None else float(step)
    eye = np.eye(3)
    stencil = [np.zeros(3)]
    for i in range(3):
        stencil += [s * eye[i], -s * eye[i]]
    pairs = [(0, 1), (1, 2), (0, 2)]
    for i, j in pairs:
        for si in (1, -1):
            for sj in (1, -1):
                stencil.append(s * (si * eye[i] + sj * eye[j]))
    stencil = np.array(stencil)  # (19, 3)
    targets = (pts[:, None, :] + stencil[None, :, :]).reshape(-1, 3)
    vals = np.asarray(potential_quadrature(region, rho, targets)).reshape(m, len(stencil))
    H = np.zeros((m, 3, 3))
    for i in range(3):
        H[:, i, i] = (vals[:, 1 + 2 * i] - 2 * vals[:, 0] + vals[:, 2 + 2 * i]) / s**2
    for p, (i, j) in enumerate(pairs):
        base = 7 + 4 * p
        cross = (vals[:, base] - vals[:, base + 1] - vals[:, base + 2] + vals[:, base + 3]) / (4 * s**2)
        H[:, i, j] = H[:, j, i] = cross
    ok = region.contains_points(targets).reshape(m, len(stencil)).all(axis=1)
    return H, ok


# ---------------------------------------------------------------------------
# Hessian-to-strain maps


def strain_from_hessian(
    case: str,
    hessians: np.ndarray,
    C: ElasticTensor,
    P: np.ndarray | None = None,
    K_star: np.ndarray | None = None,
) -> np.ndarray:
    """Apply the exact linear Hessian-to-strain map of the given case.

    cubic:          eps = (B P + P B) / (2 C44),   B = Qt H Qt, Qt = diag(1,1,sqrt(C44/C11))
    transiso:       same with Qt = diag(1,1,sqrt(C44/C33)) (needs C13 + C44 = 0)
    transiso_gamma: eps = (B K* + K* B) / 2,       Qt = diag(1,1,v)
    ortho_mono:     eps = (B P + P B) / (2 C33),   Qt = diag(s1, s2, 1)
    isotropic:      eps = (3 lambda + 2 mu)/(lambda + 2 mu) * H
    general_even:   eps proportional to (B P + P B); returned with unit
                    prefactor (scale-free, certifies degree only)
    """
    H = np.asarray(hessians, dtype=float)
    single = H.ndim == 2
    H = H.reshape(-1, 3, 3)
    g = C.entry
    if case == "isotropic":
        lam, mu = g("C12"), 0.5 * (g("C11") - g("C12"))
        out = (3 * lam + 2 * mu) / (lam + 2 * mu) * H
        return out[0] if single else out
    try:
        q = stretch_diagonal(C)
    except DomainError as err:
        raise DomainError(f"stretch factors unavailable (see scale_factors): {err}") from err
    if case == "transiso_gamma":
        if K_star is None:
            K_star = k_star_matrix(C)
        M = np.asarray(K_star, dtype=float)
        pref = 0.5
    else:
        if P is None:
            raise DomainError("cases with uniaxial eigenstress need P")
        M = np.asarray(P, dtype=float)
        if case == "cubic":
            pref = 1.0 / (2.0 * g("C44"))
        elif case == "transiso":
            pref = 1.0 / (2.0 * g("C44"))
        elif case == "ortho_mono":
            pref = 1.0 / (2.0 * g("C33"))
        elif case == "general_even":
            pref = 1.0
        else:
            raise ValueError(f"unknown case tag {case!r}")
    B = q[None, :, None] * H * q[None, None, :]
    out = pref * (B @ M + M @ B)
    return out[0] if single else out


def k_star_matrix(C: ElasticTensor, sigma11: float = 1.0) -> np.ndarray:
    """K* of the transversely isotropic gamma-ratio eigenstress:
    K11 = K22 = s11/C11, K33 = (C11 - C44 v^2) s11 / (v^2 (C13+C44) C11)."""
    f = scale_factors(C)
    if f.kind != "transiso_v":
        raise DomainError("K* requires a transversely isotropic tensor with C13 + C44 != 0")
    g = C.entry
    v = f.v
    k33 = (g("C11") - g("C44") * v * v) * sigma11 / (v * v * (g("C13") + g("C44")) * g("C11"))
    return np.diag([sigma11 / g("C11"), sigma11 / g("C11"), k33])


# ---------------------------------------------------------------------------
# Polynomial fitting


def monomial_basis(degree: int) -> list[tuple[int, int, int]]:
    """Graded lexicographic exponent triples up to total degree."""
    basis = []
    for d in range(degree + 1):
        for i in range(d, -1, -1):
            for j in range(d - i, -1, -1):
                basis.append((i, j, d - i - j))
    return basis


@dataclass
class PolynomialFit:
    degree: int
    basis: list[tuple[int, int, int]]
    coefficients: np.ndarray
    rms_residual: float
    relative_residual: float
    per_degree_norms: dict[int, float]
    condition_number: float


def fit_polynomial(points: np.ndarray, values: np.ndarray, degree: int) -> PolynomialFit:
    """Least-squares fit in the monomial basis up to the given total degree.

    Requires at least twice as many samples as basis functions; raises on
    a rank-deficient design with the condition number in the message.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = np.asarray(values, dtype=float).reshape(pts.shape[0])
    basis = monomial_basis(degree)
    if pts.shape[0] < 2 * len(basis):
        raise DomainError(
            f"need >= {2 * len(basis)} samples for degree {degree}, got {pts.shape[0]}"
        )
    design = np.column_stack(
        [pts[:, 0] ** i * pts[:, 1] ** j * pts[:, 2] ** k for (i, j, k) in basis]
    )
    coef, _, rank, sv = np.linalg.lstsq(design, vals, rcond=None)
    cond_normal = (sv[0] / sv[-1]) ** 2 if sv[-1] > 0 else np.inf
    if rank < len(basis):
        raise DomainError(
            f"rank-deficient design (rank {rank} < {len(basis)}), "
            f"normal-matrix condition {cond_normal:.3e}"
        )
    resid = vals - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    scale = float(np.sqrt(np.mean(vals**2)))
    per_degree: dict[int, float] = {}
    for d in range(degree + 1):
        cols = [b for b, (i, j, k) in enumerate(basis) if i + j + k == d]
        contrib = design[:, cols] @ coef[cols]
        per_degree[d] = float(np.sqrt(np.mean(contrib**2)))
    return PolynomialFit(
        degree=degree,
        basis=basis,
        coefficients=coef,
        rms_residual=rms,
        relative_residual=rms / scale if scale > 0 else rms,
        per_degree_norms=per_degree,
        condition_number=float(cond_normal),
    )


# ---------------------------------------------------------------------------
# Certification pipeline


STRAIN_COMPONENTS = ("e11", "e22", "e33", "e12", "e13", "e23")


@dataclass
class CertificationReport:
    case: str
    degree: int
    passed: bool
    field_rms: float
    residual_at_degree: float
    residual_at_degree_plus_1: float
    incremental_energy: float
    tolerance: float
    sample_count: int
    scale_free: bool
    grid_note: str = ""
    sample_points: np.ndarray | None = None   # (M, 3), stretched frame
    sample_values: np.ndarray | None = None   # (M, 6), order STRAIN_COMPONENTS
    fitted_values: np.ndarray | None = None   # (M, 6), degree-n fit


def _interior_samples(region: VoxelRegion, margin_shells: int, limit: int) -> np.ndarray:
    idx = interior_indices(region, margin_shells)
    if idx.shape[0] == 0:
        raise DomainError("region has no interior voxels at the requested margin")
    pts = region.origin + idx * region.spacing
    if pts.shape[0] > limit:
        stride = int(np.ceil(pts.shape[0] / limit))
        pts = pts[::stride]
    return pts


def certify_polynomial_conservation(
    region: VoxelRegion,
    C: ElasticTensor,
    eigenstrain: EigenstrainSpec,
    tol_cert: float = 0.05,
    max_samples: int = 120,
) -> CertificationReport:
    """Certify that the induced elastic strain inside the region is a
    polynomial of the same (even) degree as the eigenstress amplitude.

    Pipeline: stretch the region to the Laplacian frame, transform the
    density, sample finite-difference Hessians of the quadrature
    potential at interior points, apply the Hessian-to-strain map, fit
    all strain components at degree n and n+1.  PASS iff the degree-n
    residual and the incremental energy captured by the degree-(n+1)
    terms are both <= tol_cert times the field rms.

    The tolerance is resolution-dependent (default 5% of field rms at a
    64^3-construction scale); the report records the grid spacing.
    """
    from .geometry import connected_components

    count, _, _ = connected_components(region)
    if count != 1:
        raise DomainError(f"certification requires a one-component region, got {count}")
    case = eigenstrain.case
    n = eigenstrain.density.degree
    if case == "isotropic":
        q = np.ones(3)
    else:
        try:
            q = stretch_diagonal(C)
        except DomainError as err:
            raise DomainError(f"stretch factors unavailable (see scale_factors): {err}") from err
    region_p = stretch_region(region, DiagonalStretch(*(1.0 / q)))
    rho_p = eigenstrain.density.transform_diag(q)

    h = float(np.max(region_p.spacing))
    step = 2.0 * h
    shells = int(np.ceil(1.5 * step / float(np.min(region_p.spacing)))) + 1
    pts = _interior_samples(region_p, shells, max_samples)
    H, ok = hessian_field(region_p, rho_p, pts, step=step)
    if np.count_nonzero(ok) < max(12, H.shape[0] // 2):
        raise DomainError("insufficient interior samples away from the boundary")
    H = H[ok]
    pts = pts[ok]
    eps = strain_from_hessian(case, H, C, P=eigenstrain.P)
    comp_idx = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
    values = np.stack([eps[:, i, j] for i, j in comp_idx], axis=1)
    field_rms = float(np.sqrt(np.mean(values**2)))

    def joint_residual(degree: int) -> tuple[float, np.ndarray]:
        sq = 0.0
        fitted = np.empty_like(values)
        for c in range(values.shape[1]):
            fit = fit_polynomial(pts, values[:, c], degree)
            sq += fit.rms_residual**2
            fitted[:, c] = _eval_fit(fit, pts)
        return math.sqrt(sq / values.shape[1]), fitted

    res_n, fitted_n = joint_residual(n)
    res_n1, _ = joint_residual(n + 1)
    incremental = math.sqrt(max(res_n**2 - res_n1**2, 0.0))
    passed = (res_n <= tol_cert * field_rms) and (incremental <= tol_cert * field_rms)
    return CertificationReport(
        case=case,
        degree=n,
        passed=bool(passed),
        field_rms=field_rms,
        residual_at_degree=res_n,
        residual_at_degree_plus_1=res_n1,
        incremental_energy=incremental,
        tolerance=tol_cert,
        sample_count=int(pts.shape[0]),
        scale_free=(case == "general_even"),
        grid_note=f"spacing={tuple(float(s) for s in region.spacing)}",
        sample_points=pts,
        sample_values=values,
        fitted_values=fitted_n,
    )


def _eval_fit(fit: PolynomialFit, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(pts.shape[0])
    for coef, (i, j, k) in zip(fit.coefficients, fit.basis):
        out += coef * pts[:, 0] ** i * pts[:, 1] ** j * pts[:, 2] ** k
    return out


# ---------------------------------------------------------------------------
# Non-ellipsoidality score


@dataclass
class NonEllipsoidalityReport:
    score: float
    geometric_mismatch: float
    potential_mismatch: float
    fitted_axes: tuple[float, float, float]
    fitted_center: np.ndarray
    sample_count: int


def non_ellipsoidality_score(
    region: VoxelRegion,
    rho: DensityPolynomial | None = None,
    max_samples: int = 160,
) -> NonEllipsoidalityReport:
    """max of (a) symmetric-difference volume fraction against the
    moment-fitted ellipsoid and (b) rms mismatch between the quadrature
    potential of the region and the closed-form potential of the fitted
    ellipsoid under rho = -|x|^2, normalized by the potential variation."""
    if rho is None:
        rho = DensityPolynomial.quadratic([1.0, 1.0, 1.0])
    if rho.form != "quadratic" or np.ptp(rho.coefficients) > 1e-12 * max(abs(rho.coefficients[0]), 1e-300):
        raise UnsupportedInputError("the closed-form comparison needs rho = -c |x|^2")
    c_amp = float(rho.coefficients[0])

    from .geometry import connected_components

    count, _, _ = connected_components(region)
    if count != 1:
        raise DomainError(f"non-ellipsoidality score requires a one-component region, got {count}")
    pose = ellipsoid_fit(region)
    fitted = voxelize_ellipsoid(pose, region.spacing, origin=region.origin)
    sa = {tuple(r) for r in region.indices}
    sb = {tuple(r) for r in fitted.indices}
    geo = len(sa ^ sb) / max(len(sa), 1)

    pts = _interior_samples(region, 2, max_samples)
    nq = np.asarray(potential_quadrature(region, rho, pts))
    coeffs = quadratic_density_coefficients(pose)
    ne = c_amp * np.asarray(eval_polynomial_potential(coeffs, pose.to_body(pts)))
    denom = float(np.sqrt(np.mean((nq - nq.mean()) ** 2)))
    pot = float(np.sqrt(np.mean((nq - ne) ** 2))) / max(denom, 1e-300)
    return NonEllipsoidalityReport(
        score=max(geo, pot),
        geometric_mismatch=float(geo),
        potential_mismatch=pot,
        fitted_axes=(pose.axes.a1, pose.axes.a2, pose.axes.a3),
        fitted_center=pose.translation,
        sample_count=int(pts.shape[0]),
    )
