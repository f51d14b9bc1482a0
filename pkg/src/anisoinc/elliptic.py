"""Ellipsoid shape integrals I, I_i, I_ij, I_ijk and their recurrences.

Definitions (interior forms, dimensionless normalization):

    I      = (a1*a2*a3/2) * int_0^inf ds / sqrt(prod_q (a_q^2+s))
    I_i    = (a1*a2*a3/2) * int_0^inf ds / ((a_i^2+s)   * sqrt(...))
    I_ij   = (a1*a2*a3/2) * int_0^inf ds / ((a_i^2+s)(a_j^2+s) * sqrt(...))
    I_ijk  = likewise with three linear factors.

For the unit sphere I = 1, I_i = 1/3, I_ij = 1/5, I_ijk = 1/7.

Recurrences used to fill the higher tables from I_i:

    I1 + I2 + I3 = 1
    I_ij  = (I_j - I_i) / (a_i^2 - a_j^2)            (i != j)
    I_ii  = (1/3) * (1/a_i^2 - sum_{q != i} I_iq)
    I_ijk = (I_jk - I_ik) / (a_i^2 - a_j^2)          (i != j != k)
    I_iij = (I_ij - I_ii) / (a_i^2 - a_j^2)          (i != j)
    I_iii = (1/5) * (1/a_i^4 - sum_{q != i} I_iiq)

Near-equal axes divide by vanishing axis differences, so below a relative
gap of 1e-9 the degenerate closed forms (finite limits of the recurrences)
take over: for a_i = a_j, I_ij = I_ii and I_iij = I_iii by definition of
the integrals, which closes the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy.integrate import quad

from .errors import DomainError

# Relative axis gap below which the repeated-axis forms replace the
# recurrences (which divide by a_i^2 - a_j^2).
REPEATED_AXIS_RTOL = 1e-9

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)


@dataclass(frozen=True)
class EllipsoidAxes:
    """Semi-axis lengths a1, a2, a3 > 0 along the coordinate axes."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        for name in ("a1", "a2", "a3"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"semi-axis {name}={getattr(self, name)} must be > 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3])


@dataclass
class IIntegralTable:
    """I, I_i (3,), I_ij (3,3 symmetric), I_ijk (3,3,3 fully symmetric)."""

    I: float
    Ii: np.ndarray
    Iij: np.ndarray
    Iijk: np.ndarray


def shape_integral(axes: EllipsoidAxes, powers=(0, 0, 0), s_weight: int = 0) -> float:
    """One integral (a1*a2*a3/2) * int_0^inf s^w ds / (prod (a_i^2+s)^p_i * sqrt(prod)).

    ``powers`` gives the extra (integer) power of each (a_i^2 + s) factor
    beyond the square root; ``s_weight`` an extra factor s^w in the
    numerator (w = 1 appears in the quartic J coefficients).
    """
    a = axes.as_array()
    a2 = a * a
    scale = float(np.min(a2))
    powers = np.asarray(powers)

    def f(theta: float) -> float:
        t = math.tan(theta)
        s = scale * t * t
        ds = 2.0 * scale * t / math.cos(theta) ** 2
        den = math.sqrt((a2[0] + s) * (a2[1] + s) * (a2[2] + s))
        num = s**s_weight if s_weight else 1.0
        for i in range(3):
            if powers[i]:
                den *= (a2[i] + s) ** powers[i]
        return num * ds / den

    val, _ = quad(f, 0.0, 0.5 * math.pi, **_QUAD_OPTS)
    return 0.5 * float(np.prod(a)) * val


def _powers(indices: tuple[int, ...]) -> tuple[int, int, int]:
    p = [0, 0, 0]
    for i in indices:
        p[i] += 1
    return tuple(p)


def i_integrals_quadrature(axes: EllipsoidAxes) -> IIntegralTable:
    """Every table entry by direct adaptive quadrature (oracle path)."""
    I = shape_integral(axes)
    Ii = np.array([shape_integral(axes, _powers((i,))) for i in range(3)])
    Iij = np.zeros((3, 3))
    for i, j in combinations_with_replacement(range(3), 2):
        Iij[i, j] = Iij[j, i] = shape_integral(axes, _powers((i, j)))
    Iijk = np.zeros((3, 3, 3))
    for idx in combinations_with_replacement(range(3), 3):
        v = shape_integral(axes, _powers(idx))
        for perm in {(idx[0], idx[1], idx[2]), (idx[0], idx[2], idx[1]),
                     (idx[1], idx[0], idx[2]), (idx[1], idx[2], idx[0]),
                     (idx[2], idx[0], idx[1]), (idx[2], idx[1], idx[0])}:
            Iijk[perm] = v
    return IIntegralTable(I, Ii, Iij, Iijk)


def _axis_groups(a: np.ndarray) -> list[list[int]]:
    """Indices grouped by equality within REPEATED_AXIS_RTOL (relative)."""
    groups: list[list[int]] = []
    for i in range(3):
        for g in groups:
            if abs(a[i] - a[g[0]]) <= REPEATED_AXIS_RTOL * max(a[i], a[g[0]]):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def compute_i_integrals(axes: EllipsoidAxes) -> IIntegralTable:
    """I and I_i by quadrature, I_ij and I_ijk by the recurrences.

    Repeated axes (relative gap below 1e-9) switch to the finite limits
    of the recurrences; the sphere is fully analytic:
    I = a^2, I_i = 1/3, I_ij = 1/(5 a^2), I_ijk = 1/(7 a^4).
    """
    a = axes.as_array()
    a2 = a * a
    groups = _axis_groups(a)

    if len(groups) == 1:  # sphere
        r2 = float(np.mean(a2))
        return IIntegralTable(
            I=r2,
            Ii=np.full(3, 1.0 / 3.0),
            Iij=np.full((3, 3), 1.0 / (5.0 * r2)),
            Iijk=np.full((3, 3, 3), 1.0 / (7.0 * r2 * r2)),
        )

    I = shape_integral(axes)
    Ii = np.array([shape_integral(axes, _powers((i,))) for i in range(3)])
    Iij = np.zeros((3, 3))
    Iijk = np.zeros((3, 3, 3))

    if len(groups) == 3:  # distinct axes: plain recurrences
        for i in range(3):
            for j in range(3):
                if i != j:
                    Iij[i, j] = (Ii[j] - Ii[i]) / (a2[i] - a2[j])
        for i in range(3):
            others = [q for q in range(3) if q != i]
            Iij[i, i] = (1.0 / a2[i] - sum(Iij[i, q] for q in others)) / 3.0
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                Iijk[i, i, j] = (Iij[i, j] - Iij[i, i]) / (a2[i] - a2[j])
        i, j, k = 0, 1, 2
        Iijk[i, j, k] = (Iij[j, k] - Iij[i, k]) / (a2[i] - a2[j])
        for i in range(3):
            others = [q for q in range(3) if q != i]
            Iijk[i, i, i] = (1.0 / a2[i] ** 2 - sum(Iijk[i, i, q] for q in others)) / 5.0
        _symmetrize_third(Iijk)
        return IIntegralTable(I, Ii, Iij, Iijk)

    # Spheroid: one pair of (numerically) equal axes, indices p = q != r.
    pair = next(g for g in groups if len(g) == 2)
    p, q = pair
    r = next(g for g in groups if len(g) == 1)[0]
    ap2 = 0.5 * (a2[p] + a2[q])
    # Distinct pair first, then the equal-axes limits I_pq = I_pp, I_ppq = I_ppp.
    Ipr = (Ii[r] - Ii[p]) / (ap2 - a2[r])
    Ipp = (1.0 / ap2 - Ipr) / 4.0
    Irr = (1.0 / a2[r] - 2.0 * Ipr) / 3.0
    Iij[p, r] = Iij[r, p] = Iij[q, r] = Iij[r, q] = Ipr
    Iij[p, p] = Iij[q, q] = Iij[p, q] = Iij[q, p] = Ipp
    Iij[r, r] = Irr
    Ippr = (Ipr - Ipp) / (ap2 - a2[r])
    Iprr = (Irr - Ipr) / (ap2 - a2[r])
    Irrr = (1.0 / a2[r] ** 2 - 2.0 * Iprr) / 5.0
    Ippp = (1.0 / ap2**2 - Ippr) / 6.0
    for idx, v in (
        ((p, p, p), Ippp), ((q, q, q), Ippp), ((p, p, q), Ippp), ((p, q, q), Ippp),
        ((p, p, r), Ippr), ((q, q, r), Ippr), ((p, q, r), Ippr),
        ((p, r, r), Iprr), ((q, r, r), Iprr),
        ((r, r, r), Irrr),
    ):
        for perm in _perms3(idx):
            Iijk[perm] = v
    return IIntegralTable(I, Ii, Iij, Iijk)


def _perms3(idx):
    i, j, k = idx
    return {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}


def _symmetrize_third(T: np.ndarray) -> None:
    for idx in combinations_with_replacement(range(3), 3):
        vals = [T[p] for p in _perms3(idx) if T[p] != 0.0]
        if vals:
            v = vals[0]
            for p in _perms3(idx):
                T[p] = v


def recurrence_residuals(axes: EllipsoidAxes, table: IIntegralTable) -> dict[str, float]:
    """Max absolute residual of each recurrence family on a table.

    Entries whose recurrence divides by a near-zero axis difference are
    skipped (they are defined by the degenerate limits instead).
    """
    a2 = axes.as_array() ** 2
    scale2 = float(np.max(a2))
    res = {"sum": abs(table.Ii.sum() - 1.0)}
    off = 0.0
    diag = 0.0
    third = 0.0
    for i in range(3):
        for j in range(3):
            if i == j or abs(a2[i] - a2[j]) <= 1e-9 * scale2:
                continue
            off = max(off, abs(table.Iij[i, j] - (table.Ii[j] - table.Ii[i]) / (a2[i] - a2[j])))
            third = max(
                third,
                abs(table.Iijk[i, i, j] - (table.Iij[i, j] - table.Iij[i, i]) / (a2[i] - a2[j])),
            )
            k = 3 - i - j
            if abs(a2[i] - a2[j]) > 1e-9 * scale2:
                third = max(
                    third,
                    abs(table.Iijk[i, j, k] - (table.Iij[j, k] - table.Iij[i, k]) / (a2[i] - a2[j])),
                )
    for i in range(3):
        others = [q for q in range(3) if q != i]
        diag = max(
            diag,
            abs(table.Iij[i, i] - (1.0 / a2[i] - sum(table.Iij[i, q] for q in others)) / 3.0),
        )
        third = max(
            third,
            abs(table.Iijk[i, i, i] - (1.0 / a2[i] ** 2 - sum(table.Iijk[i, i, q] for q in others)) / 5.0),
        )
    res["offdiag"] = off
    res["diag"] = diag
    res["third"] = third
    return res
