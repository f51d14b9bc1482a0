"""The three obstacle-function families that manufacture coincidence sets.

quartic
    phi*(x) = C - (x1^4 + x2^4 + x3^4)/12   on U = {sum x_k^4 <= 48 C},
    phi*(x) = -3C                           outside U.
    Continuous across dU; support radius r0 = 6 sqrt(C).

quartic_log
    phi' = phi* + omega*, where omega* is the clamped harmonic log

        omega*(x1, x2) = 0                       if rho2 <= 36 C
                       = -beta log(rho2 / 36C)   if 36 C <= rho2 <= 324 C
                       = -beta log 9             if rho2 >= 324 C

    with rho2 = (x1 - 12 sqrt(C))^2 + (x2 - 12 sqrt(C))^2 and beta > 0,
    so omega* <= 0 everywhere and vanishes on the inner clamp circle.

even_degree_log (even n >= 4)
    phi_hat*(x) = C_hat - (x1^{n+2} + x2^{n+2} + x3^{n+2})/((n+2)(n+1))
                  + omega*                      on U_hat,
    phi_hat*(x) = -C_hat + omega*               outside U_hat,
    with U_hat = {sum x_k^{n+2} <= 2 (n+1)(n+2) C_hat} and the nominal
    radius r_hat = (2 (n+1)(n+2) C_hat)^{1/(n+2)}.

A note on radii: r_hat is the per-axis extent of U_hat (U_hat is inscribed
in the cube of half-width r_hat, not in the ball of radius r_hat), so the
guaranteed non-positivity radius for the even-degree family is the
diagonal extent sqrt(3) * (2 (n+1)(n+2) C_hat / 3)^{1/(n+2)}; the
validator uses that radius while ``obstacle_radius`` returns the nominal
one.  Likewise the quartic family's r0 = 6 sqrt(C) is a valid
non-positivity radius exactly for C >= 1/36 (the canonical C = 1/36 is
the tight case); the validator reports honestly for other C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

FAMILIES = ("quartic", "quartic_log", "even_degree_log")


@dataclass(frozen=True)
class ObstacleSpec:
    """Parameters of one obstacle family.

    C is the quartic constant (also the log-geometry constant for the
    families with the omega* term); beta the log amplitude; n the even
    density degree and C_hat the polynomial constant of the even-degree
    family.
    """

    family: str
    C: float | None = None
    beta: float | None = None
    n: int | None = None
    C_hat: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown obstacle family {self.family!r}")
        if self.family in ("quartic", "quartic_log"):
            if self.C is None or not self.C > 0.0:
                raise DomainError("quartic families need C > 0")
        if self.family in ("quartic_log", "even_degree_log"):
            if self.beta is None or not self.beta > 0.0:
                raise DomainError("log families need beta > 0")
            if self.C is None or not self.C > 0.0:
                raise DomainError("log families need C > 0 (log-center geometry)")
        if self.family == "even_degree_log":
            if self.n is None or self.n < 4 or self.n % 2:
                raise DomainError("even_degree_log needs even integer n >= 4")
            if self.C_hat is None or not self.C_hat > 0.0:
                raise DomainError("even_degree_log needs C_hat > 0")

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for k in ("C", "beta", "n", "C_hat"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ObstacleSpec":
        return cls(
            family=data["family"],
            C=data.get("C"),
            beta=data.get("beta"),
            n=int(data["n"]) if "n" in data else None,
            C_hat=data.get("C_hat"),
        )


@dataclass
class ObstacleReport:
    """Numerical obstacle-condition check results."""

    lipschitz_bound: float
    r0: float
    nonpositivity_radius: float
    max_laplacian: float
    semiconvexity_constant: float
    all_conditions_pass: bool
    conditions: dict[str, bool] = field(default_factory=dict)
    first_violation: np.ndarray | None = None


def _omega_star(spec: ObstacleSpec, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    c0 = 12.0 * math.sqrt(spec.C)
    rho2 = (x1 - c0) ** 2 + (x2 - c0) ** 2
    inner, outer = 36.0 * spec.C, 324.0 * spec.C
    out = np.zeros_like(rho2)
    mid = (rho2 > inner) & (rho2 < outer)
    out[mid] = -spec.beta * np.log(rho2[mid] / inner)
    out[rho2 >= outer] = -spec.beta * math.log(9.0)
    return out


def eval_obstacle(spec: ObstacleSpec, x: np.ndarray) -> np.ndarray | float:
    """Piecewise evaluation of the obstacle at point(s) x, shape (..., 3)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if spec.family == "quartic":
        s4 = np.sum(pts**4, axis=-1)
        val = np.where(s4 <= 48.0 * spec.C, spec.C - s4 / 12.0, -3.0 * spec.C)
    elif spec.family == "quartic_log":
        s4 = np.sum(pts**4, axis=-1)
        val = np.where(s4 <= 48.0 * spec.C, spec.C - s4 / 12.0, -3.0 * spec.C)
        val = val + _omega_star(spec, pts[..., 0], pts[..., 1])
    else:
        m = spec.n + 2
        sm = np.sum(pts**m, axis=-1)
        bound = 2.0 * (spec.n + 1) * (spec.n + 2) * spec.C_hat
        val = np.where(
            sm <= bound,
            spec.C_hat - sm / ((spec.n + 2) * (spec.n + 1)),
            -spec.C_hat,
        )
        val = val + _omega_star(spec, pts[..., 0], pts[..., 1])
    return float(val[0]) if single else val


def eval_obstacle_smooth_part(spec: ObstacleSpec, x: np.ndarray) -> np.ndarray:
    """The polynomial-plus-log branch without the outer piecewise clamps.

    This is the function the coincidence-set potential must reproduce:
    phi on the contact region, where the contact region sits inside the
    support set and (for the log families) inside the live log annulus.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if spec.family == "quartic":
        return spec.C - np.sum(pts**4, axis=-1) / 12.0
    if spec.family == "quartic_log":
        return (
            spec.C
            - np.sum(pts**4, axis=-1) / 12.0
            + _omega_star(spec, pts[..., 0], pts[..., 1])
        )
    m = spec.n + 2
    return (
        spec.C_hat
        - np.sum(pts**m, axis=-1) / ((spec.n + 2) * (spec.n + 1))
        + _omega_star(spec, pts[..., 0], pts[..., 1])
    )


def obstacle_radius(spec: ObstacleSpec) -> float:
    """Nominal support radius: 6 sqrt(C), or (2(n+1)(n+2) C_hat)^{1/(n+2)}."""
    if spec.family in ("quartic", "quartic_log"):
        return 6.0 * math.sqrt(spec.C)
    return (2.0 * (spec.n + 1) * (spec.n + 2) * spec.C_hat) ** (1.0 / (spec.n + 2))


def nonpositivity_radius(spec: ObstacleSpec) -> float:
    """Radius outside which the family guarantees phi <= 0 (see module notes)."""
    if spec.family in ("quartic", "quartic_log"):
        # Diagonal extent of {phi* > 0} = {sum x^4 < 12 C}.
        return max(6.0 * math.sqrt(spec.C), math.sqrt(3.0) * (4.0 * spec.C) ** 0.25)
    n = spec.n
    return math.sqrt(3.0) * (2.0 * (n + 1) * (n + 2) * spec.C_hat / 3.0) ** (1.0 / (n + 2))


def support_halfwidth(spec: ObstacleSpec) -> float:
    """Per-axis extent of the support set U / U_hat."""
    if spec.family in ("quartic", "quartic_log"):
        return (48.0 * spec.C) ** 0.25
    return obstacle_radius(spec)


def _kink_distance(spec: ObstacleSpec, pts: np.ndarray) -> np.ndarray:
    """Distance proxy to the declared non-smooth surfaces (clamp circles,
    support seam); used to exclude a tube around them when sampling
    second derivatives."""
    d = np.full(pts.shape[0], np.inf)
    if spec.family in ("quartic", "quartic_log"):
        s4 = np.sum(pts**4, axis=-1)
        grad = 4.0 * np.linalg.norm(pts**3, axis=-1) + 1e-30
        d = np.minimum(d, np.abs(s4 - 48.0 * spec.C) / grad)
    else:
        m = spec.n + 2
        sm = np.sum(pts**m, axis=-1)
        bound = 2.0 * (spec.n + 1) * (spec.n + 2) * spec.C_hat
        grad = m * np.linalg.norm(pts ** (m - 1), axis=-1) + 1e-30
        d = np.minimum(d, np.abs(sm - bound) / grad)
    if spec.family in ("quartic_log", "even_degree_log"):
        c0 = 12.0 * math.sqrt(spec.C)
        rho = np.hypot(pts[..., 0] - c0, pts[..., 1] - c0)
        d = np.minimum(d, np.abs(rho - 6.0 * math.sqrt(spec.C)))
        d = np.minimum(d, np.abs(rho - 18.0 * math.sqrt(spec.C)))
    return d


def validate_obstacle(spec: ObstacleSpec, resolution: int = 40,
                      seed: int = 0) -> ObstacleReport:
    """Numerically check the four obstacle-function conditions.

    1. Finite value and finite sampled gradient (Lipschitz proxy) on a
       dense sample of the support region and the log annulus.
    2. phi <= 0 on 1e5 samples with |x| in [R, 3R], R the family's
       guaranteed non-positivity radius.
    3. |Laplacian phi| bounded on B_r0 away from the declared non-smooth
       surfaces (empty singular set for these families).
    4. Sampled directional second differences of phi + C_phi |x|^2 / 2
       are >= -tolerance, with C_phi the sampled bound
       sup|dphi/dzeta| + sup|d2phi/dzeta2|.

    Finite-difference step: 1e-4 * r0.
    """
    rng = np.random.default_rng(seed)
    r0 = obstacle_radius(spec)
    R = nonpositivity_radius(spec)
    h = 1e-4 * r0
    conditions: dict[str, bool] = {}
    first_violation = None

    # Sample cloud: support box plus (log families) the annulus region.
    half = support_halfwidth(spec)
    pts = rng.uniform(-1.2 * half, 1.2 * half, size=(resolution**3, 3))
    if spec.family in ("quartic_log", "even_degree_log"):
        c0 = 12.0 * math.sqrt(spec.C)
        r = np.sqrt(rng.uniform((6 * math.sqrt(spec.C)) ** 2, (18 * math.sqrt(spec.C)) ** 2,
                                size=resolution**3))
        th = rng.uniform(0.0, 2 * math.pi, size=resolution**3)
        ann = np.column_stack([
            c0 + r * np.cos(th), c0 + r * np.sin(th),
            rng.uniform(-half, half, size=resolution**3),
        ])
        pts = np.vstack([pts, ann])

    values = eval_obstacle(spec, pts)
    grads = np.empty_like(pts)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        grads[:, k] = (eval_obstacle(spec, pts + e) - eval_obstacle(spec, pts - e)) / (2 * h)
    lipschitz = float(np.max(np.abs(values)) + np.max(np.linalg.norm(grads, axis=1)))
    conditions["finite_value_and_gradient"] = bool(np.all(np.isfinite(values)) and np.all(np.isfinite(grads)))

    # Condition 2: non-positivity outside R.
    u = rng.normal(size=(100_000, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    radii = rng.uniform(R, 3.0 * R, size=100_000)
    outside = u * radii[:, None]
    vals_out = eval_obstacle(spec, outside)
    ok2 = bool(np.max(vals_out) <= 1e-12)
    conditions["nonpositive_outside_r0"] = ok2
    if not ok2 and first_violation is None:
        first_violation = outside[int(np.argmax(vals_out))]

    # Condition 3: bounded Laplacian inside B_r0, away from kink tubes.
    u = rng.normal(size=(20_000, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    inside = u * (r0 * rng.uniform(0.0, 1.0, size=20_000) ** (1 / 3))[:, None]
    inside = inside[_kink_distance(spec, inside) > 5.0 * h]
    lap = np.zeros(inside.shape[0])
    center = eval_obstacle(spec, inside)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        lap += (eval_obstacle(spec, inside + e) - 2 * center + eval_obstacle(spec, inside - e)) / h**2
    max_lap = float(np.max(np.abs(lap))) if lap.size else 0.0
    lap_bound = _laplacian_bound(spec)
    conditions["bounded_laplacian"] = bool(np.isfinite(max_lap) and max_lap <= 1.5 * lap_bound + 1.0)

    # Condition 4: semiconvexity with the sampled constant.
    zeta = rng.normal(size=(64, 3))
    zeta /= np.linalg.norm(zeta, axis=1, keepdims=True)
    sample = inside[:2000] if inside.shape[0] >= 2000 else inside
    sup_d1 = np.max(np.abs(grads)) if grads.size else 0.0
    worst = 0.0
    c_phi = 0.0
    second_ok = True
    for z in zeta:
        plus = eval_obstacle(spec, sample + h * z)
        minus = eval_obstacle(spec, sample - h * z)
        mid = eval_obstacle(spec, sample)
        second = (plus - 2 * mid + minus) / h**2
        c_phi = max(c_phi, float(np.max(np.abs(second))))
    c_phi = sup_d1 + c_phi
    tol = 1e-8 * max(1.0, c_phi)
    for z in zeta[:16]:
        plus = eval_obstacle(spec, sample + h * z)
        minus = eval_obstacle(spec, sample - h * z)
        mid = eval_obstacle(spec, sample)
        second = (plus - 2 * mid + minus) / h**2 + c_phi
        m = float(np.min(second)) if second.size else 0.0
        worst = min(worst, m)
        if m < -tol:
            second_ok = False
            if first_violation is None:
                first_violation = sample[int(np.argmin(second))]
    conditions["semiconvex_with_sampled_constant"] = second_ok

    all_pass = all(conditions.values())
    return ObstacleReport(
        lipschitz_bound=lipschitz,
        r0=r0,
        nonpositivity_radius=R,
        max_laplacian=max_lap,
        semiconvexity_constant=c_phi,
        all_conditions_pass=all_pass,
        conditions=conditions,
        first_violation=first_violation,
    )


def _laplacian_bound(spec: ObstacleSpec) -> float:
    """Analytic sup of |Laplacian| of the smooth branch inside B_r0."""
    r0 = obstacle_radius(spec)
    if spec.family in ("quartic", "quartic_log"):
        return r0 * r0  # |Delta phi*| = sum x_k^2 <= r0^2 on B_r0
    n = spec.n
    return 3.0 * (2.0 * (n + 1) * (n + 2) * spec.C_hat) ** (n / (n + 2))


def density_for(spec: ObstacleSpec) -> "DensityPolynomial":
    """The mass density rho = Laplacian(phi) of the family's smooth branch.

    quartic / quartic_log -> rho(x) = -(x1^2 + x2^2 + x3^2)
    even_degree_log       -> rho(x) = -(x1^n + x2^n + x3^n)
    """
    from .verify import DensityPolynomial

    if spec.family in ("quartic", "quartic_log"):
        return DensityPolynomial.quadratic([1.0, 1.0, 1.0])
    return DensityPolynomial.even_monomial([1.0, 1.0, 1.0], spec.n)
