"""Closed-form Newtonian potential of an ellipsoid under rho(x) = -|x|^2.

Sign convention throughout: N[rho](x) = -int rho(y) / (4*pi*|x - y|) dy,
so Delta N = rho inside the body.  With the quadratic density the interior
potential of a posed ellipsoid (rotation Q, translation d, body frame z,
x = Q z + d) is the quartic polynomial

    N(z) = C_E + A.z + B.z^2 + (cubic H terms) + (quartic J terms),

whose coefficients are combinations of the shape integrals I, I_i, I_ij,
I_ijk and the vector f = 2 d.Q.  With d = 0 every odd (A, H) coefficient
vanishes; for a sphere J1 = J2 = J3 = -1/20 and J4 = J5 = J6 = -1/10.

The quartic J coefficients are evaluated through the repeated-axis-safe
forms (which add one extra s-weighted shape integral); the axis-difference
quotient forms valid for distinct axes are kept as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import EllipsoidAxes, IIntegralTable, compute_i_integrals, shape_integral, _axis_groups, _powers
from .errors import DomainError

#: Monomial order of the cubic coefficients H1..H9.
H_MONOMIALS = (
    (3, 0, 0), (0, 3, 0), (0, 0, 3),
    (1, 2, 0), (1, 0, 2), (2, 1, 0),
    (0, 1, 2), (2, 0, 1), (0, 2, 1),
)
#: Monomial order of the quartic coefficients J1..J6.
J_MONOMIALS = ((4, 0, 0), (0, 4, 0), (0, 0, 4), (2, 2, 0), (0, 2, 2), (2, 0, 2))


@dataclass(frozen=True)
class EllipsoidPose:
    """Ellipsoid with axes, rotation Q (body -> global) and translation d."""

    axes: EllipsoidAxes
    rotation: np.ndarray | None = None
    translation: np.ndarray | None = None

    def __post_init__(self):
        Q = np.eye(3) if self.rotation is None else np.array(self.rotation, dtype=float)
        d = np.zeros(3) if self.translation is None else np.array(self.translation, dtype=float)
        if Q.shape != (3, 3):
            raise DomainError("rotation must be 3x3")
        if np.max(np.abs(Q.T @ Q - np.eye(3))) > 1e-12:
            raise DomainError("rotation is not orthogonal within 1e-12")
        if d.shape != (3,):
            raise DomainError("translation must be a 3-vector")
        Q.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "rotation", Q)
        object.__setattr__(self, "translation", d)

    def to_body(self, x: np.ndarray) -> np.ndarray:
        """Global point(s) -> body frame z = Q^T (x - d)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (x - self.translation) @ self.rotation

    def contains(self, x: np.ndarray) -> np.ndarray:
        z = self.to_body(x)
        a = self.axes.as_array()
        return np.sum((z / a) ** 2, axis=-1) <= 1.0


@dataclass
class NewtonianCoefficients:
    """Polynomial coefficients of the quadratic-density interior potential."""

    C_E: float
    A: np.ndarray    # (3,)  linear
    B: np.ndarray    # (3,)  squares z_i^2
    H: np.ndarray    # (9,)  cubics, order H_MONOMIALS
    J: np.ndarray    # (6,)  quartics, order J_MONOMIALS


def _j_extra(axes: EllipsoidAxes, i: int, j: int) -> float:
    """(a1 a2 a3 / 8) * int_0^inf s ds / ((a_i^2+s)(a_j^2+s) sqrt(prod))."""
    if len(_axis_groups(axes.as_array())) == 1:
        return 1.0 / 30.0  # sphere: exact, radius-independent
    return 0.25 * shape_integral(axes, _powers((i, j)), s_weight=1)


def quartic_j_general(axes: EllipsoidAxes, table: IIntegralTable | None = None) -> np.ndarray:
    """J1..J6 in the form valid for any axes, repeated or not."""
    t = table if table is not None else compute_i_integrals(axes)
    a2 = axes.as_array() ** 2
    J = np.empty(6)
    for k, i in enumerate((0, 1, 2)):
        j, l = [q for q in range(3) if q != i]
        J[k] = (
            -1.0 / 6.0
            + (4 * a2[i] + 3 * a2[j]) * t.Iij[i, j] / 24.0
            + (4 * a2[i] + 3 * a2[l]) * t.Iij[i, l] / 24.0
        )
    for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        J[3 + k] = (
            0.25 * (t.Ii[i] + t.Ii[j])
            - 0.75 * (a2[i] + a2[j]) * t.Iij[i, j]
            + _j_extra(axes, i, j)
        )
    return J


def quartic_j_distinct(axes: EllipsoidAxes, table: IIntegralTable | None = None) -> np.ndarray:
    """J1..J6 in the axis-difference quotient form (distinct axes only)."""
    a2 = axes.as_array() ** 2
    if min(abs(a2[0] - a2[1]), abs(a2[1] - a2[2]), abs(a2[0] - a2[2])) < 1e-9 * a2.max():
        raise DomainError("quotient form of J requires distinct axes")
    t = table if table is not None else compute_i_integrals(axes)
    I1, I2, I3 = t.Ii
    a1, a2_, a3 = a2
    J = np.empty(6)
    J[0] = -1/6 + (I2 - I1) * (4*a1 + 3*a2_) / (24 * (a1 - a2_)) + (I3 - I1) * (4*a1 + 3*a3) / (24 * (a1 - a3))
    J[1] = -1/6 + (I2 - I1) * (4*a2_ + 3*a1) / (24 * (a1 - a2_)) + (I3 - I2) * (4*a2_ + 3*a3) / (24 * (a2_ - a3))
    J[2] = -1/6 + (I3 - I1) * (4*a3 + 3*a1) / (24 * (a1 - a3)) + (I3 - I2) * (4*a3 + 3*a2_) / (24 * (a2_ - a3))
    J[3] = ((5*a1 + 2*a2_) * I1 - (5*a2_ + 2*a1) * I2) / (4 * (a1 - a2_))
    J[4] = ((5*a2_ + 2*a3) * I2 - (5*a3 + 2*a2_) * I3) / (4 * (a2_ - a3))
    J[5] = ((5*a3 + 2*a1) * I3 - (5*a1 + 2*a3) * I1) / (4 * (a3 - a1))
    return J


def quadratic_density_coefficients(pose: EllipsoidPose) -> NewtonianCoefficients:
    """Interior-potential coefficients for rho(x) = -|x|^2 in the global frame.

    f = 2 d.Q couples the translation into the odd coefficients; with
    d = 0, A and H vanish identically.
    """
    axes = pose.axes
    t = compute_i_integrals(axes)
    a = axes.as_array()
    a2, a4 = a * a, a**4
    d = pose.translation
    f = 2.0 * pose.rotation.T @ d
    d2 = float(d @ d)
    suma2 = float(a2.sum())

    C_E = 0.125 * (suma2 * t.I - float(a4 @ t.Ii)) + 0.5 * d2 * t.I
    A = 0.5 * a2 * t.Ii * f
    B = np.empty(3)
    for i in range(3):
        j, l = [q for q in range(3) if q != i]
        B[i] = (
            0.75 * t.Iij[i, i] * a4[i]
            + 0.25 * t.Iij[i, j] * a4[j]
            + 0.25 * t.Iij[i, l] * a4[l]
            - 0.25 * suma2 * t.Ii[i]
            - 0.5 * d2 * t.Ii[i]
        )
    # Cubic coefficients: z_i^3 carries -a_i^2 I_ii f_i / 2, z_i z_j^2
    # carries -a_i^2 I_ij f_i / 2.
    H = np.empty(9)
    H[0] = -0.5 * a2[0] * t.Iij[0, 0] * f[0]
    H[1] = -0.5 * a2[1] * t.Iij[1, 1] * f[1]
    H[2] = -0.5 * a2[2] * t.Iij[2, 2] * f[2]
    H[3] = -0.5 * a2[0] * t.Iij[1, 0] * f[0]
    H[4] = -0.5 * a2[0] * t.Iij[2, 0] * f[0]
    H[5] = -0.5 * a2[1] * t.Iij[1, 0] * f[1]
    H[6] = -0.5 * a2[1] * t.Iij[1, 2] * f[1]
    H[7] = -0.5 * a2[2] * t.Iij[0, 2] * f[2]
    H[8] = -0.5 * a2[2] * t.Iij[1, 2] * f[2]
    J = quartic_j_general(axes, t)
    return NewtonianCoefficients(C_E, A, B, H, J)


def eval_polynomial_potential(coeffs: NewtonianCoefficients, z: np.ndarray) -> np.ndarray | float:
    """Evaluate the quartic interior polynomial at body-frame point(s) z."""
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    out = np.full(z.shape[0], coeffs.C_E)
    out += z @ coeffs.A
    out += (z * z) @ coeffs.B
    for c, (p, q, r) in zip(coeffs.H, H_MONOMIALS):
        out += c * z[:, 0] ** p * z[:, 1] ** q * z[:, 2] ** r
    for c, (p, q, r) in zip(coeffs.J, J_MONOMIALS):
        out += c * z[:, 0] ** p * z[:, 1] ** q * z[:, 2] ** r
    return float(out[0]) if single else out


def potential_at(pose: EllipsoidPose, x: np.ndarray,
                 coeffs: NewtonianCoefficients | None = None) -> np.ndarray:
    """Closed-form potential at global interior point(s) x."""
    if coeffs is None:
        coeffs = quadratic_density_coefficients(pose)
    return eval_polynomial_potential(coeffs, pose.to_body(x))


def spheroid_quartic_coeffs(e: float, family: str) -> np.ndarray:
    """J1..J6 for a spheroid a1 = a2 = a3/e from the closed forms.

    family 'oblate' requires e < 1 (arccos branch), 'prolate' e > 1
    (arccosh branch).  Both satisfy J1 = J2 = J4/2.  e = 1 must use the
    sphere path instead.
    """
    if not e > 0.0:
        raise DomainError("aspect ratio e must be positive")
    if e == 1.0:
        raise DomainError("e = 1 is the sphere; use the sphere path")
    if family == "oblate":
        if e >= 1.0:
            raise DomainError("oblate spheroid requires e < 1")
        g = math.sqrt(1.0 - e * e)
        arc = math.acos(e)
        den = (1.0 - e * e) ** 2.5
    elif family == "prolate":
        if e <= 1.0:
            raise DomainError("prolate spheroid requires e > 1")
        g = math.sqrt(e * e - 1.0)
        arc = math.acosh(e)
        den = (e * e - 1.0) ** 2.5
    else:
        raise ValueError(f"unknown spheroid family {family!r}")
    arc_term = 3.0 * e * (3.0 + 4.0 * e * e) * arc
    J = np.empty(6)
    J[0] = J[1] = -((2.0 * e * e - 23.0) * e * e * g + arc_term) / (64.0 * den)
    J[2] = -(-(2.0 + 19.0 * e * e) * g + arc_term) / (24.0 * den)
    J[3] = -((2.0 * e * e - 23.0) * e * e * g + arc_term) / (32.0 * den)
    J[4] = J[5] = -((2.0 * e**4 + 15.0 * e * e + 4.0) * g - arc_term) / (8.0 * den)
    return J
