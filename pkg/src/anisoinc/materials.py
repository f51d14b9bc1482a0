"""Anisotropic elastic stiffness tensors in Voigt notation.

Voigt index convention: 1<->11, 2<->22, 3<->33, 4<->23, 5<->13, 6<->12,
with the crystal axes aligned with the coordinate axes (axis 3 is the
symmetry axis for transverse isotropy and the 2-fold axis for monoclinic
symmetry).

The module provides

* positive-definiteness validation per symmetry class,
* the construction constraints under which uniaxial eigenstress problems
  reduce to a single scalar potential (e.g. cubic C12 + C44 = 0),
* the anisotropy scale factors t, s1, s2, v and the stress ratio gamma
  used by the coordinate stretches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError

SYMMETRY_CLASSES = (
    "isotropic",
    "cubic",
    "transversely_isotropic",
    "orthotropic",
    "monoclinic",
)

# Independent Voigt constants per symmetry class, by name.
INDEPENDENT_CONSTANTS = {
    "isotropic": ("C11", "C12"),
    "cubic": ("C11", "C12", "C44"),
    "transversely_isotropic": ("C11", "C12", "C13", "C33", "C44"),
    "orthotropic": ("C11", "C22", "C33", "C44", "C55", "C66", "C12", "C13", "C23"),
    "monoclinic": (
        "C11", "C22", "C33", "C44", "C55", "C66",
        "C12", "C13", "C23", "C16", "C26", "C36", "C45",
    ),
}

_VOIGT = {(0, 0): 0, (1, 1): 1, (2, 2): 2, (1, 2): 3, (0, 2): 4, (0, 1): 5}

# Relative tolerance for declaring the Voigt matrix symmetric / on-pattern.
SYMMETRY_RTOL = 1e-12
# Absolute tolerance for the "=0" construction constraints, applied after
# normalizing the stiffness by its largest entry (the constraints are exact
# algebraic conditions the user constructs deliberately).
CONSTRAINT_ATOL = 1e-10
# Relative tolerance for the transverse-isotropy degeneracy test
# sqrt(C11*C33) - C13 - 2*C44 = 0.
DEGENERACY_RTOL = 1e-10


def _name_to_index(name: str) -> tuple[int, int]:
    i, j = int(name[1]) - 1, int(name[2]) - 1
    return (i, j) if i <= j else (j, i)


def voigt_from_constants(symmetry_class: str, constants: dict[str, float]) -> np.ndarray:
    """Build the full 6x6 Voigt matrix from the independent constants.

    Dependent entries are filled from the symmetry pattern, e.g. cubic
    C22 = C33 = C11, C55 = C66 = C44, C13 = C23 = C12; transversely
    isotropic C66 = (C11 - C12)/2.
    """
    if symmetry_class not in SYMMETRY_CLASSES:
        raise ValueError(f"unknown symmetry class {symmetry_class!r}")
    required = INDEPENDENT_CONSTANTS[symmetry_class]
    missing = [k for k in required if k not in constants]
    if missing:
        raise ValueError(f"{symmetry_class} tensor needs constants {missing}")
    unknown = [k for k in constants if k not in required]
    if unknown:
        raise ValueError(
            f"constants {unknown} are not independent for class {symmetry_class!r}"
        )
    c = dict(constants)
    if symmetry_class == "isotropic":
        c["C44"] = 0.5 * (c["C11"] - c["C12"])
        full = {
            "C11": c["C11"], "C22": c["C11"], "C33": c["C11"],
            "C12": c["C12"], "C13": c["C12"], "C23": c["C12"],
            "C44": c["C44"], "C55": c["C44"], "C66": c["C44"],
        }
    elif symmetry_class == "cubic":
        full = {
            "C11": c["C11"], "C22": c["C11"], "C33": c["C11"],
            "C12": c["C12"], "C13": c["C12"], "C23": c["C12"],
            "C44": c["C44"], "C55": c["C44"], "C66": c["C44"],
        }
    elif symmetry_class == "transversely_isotropic":
        full = {
            "C11": c["C11"], "C22": c["C11"], "C33": c["C33"],
            "C12": c["C12"], "C13": c["C13"], "C23": c["C13"],
            "C44": c["C44"], "C55": c["C44"], "C66": 0.5 * (c["C11"] - c["C12"]),
        }
    else:
        full = c
    voigt = np.zeros((6, 6))
    for name, value in full.items():
        i, j = _name_to_index(name)
        voigt[i, j] = voigt[j, i] = value
    return voigt


def _pattern_mask(symmetry_class: str) -> np.ndarray:
    """Boolean 6x6 mask of entries allowed to be nonzero for the class."""
    mask = np.zeros((6, 6), dtype=bool)
    names = {
        "isotropic": ("C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66"),
        "cubic": ("C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66"),
        "transversely_isotropic": (
            "C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66",
        ),
        "orthotropic": (
            "C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66",
        ),
        "monoclinic": (
            "C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66",
            "C16", "C26", "C36", "C45",
        ),
    }[symmetry_class]
    for name in names:
        i, j = _name_to_index(name)
        mask[i, j] = mask[j, i] = True
    return mask


@dataclass(frozen=True)
class ElasticTensor:
    """A 6x6 symmetric Voigt stiffness matrix with a declared symmetry class.

    Units are any consistent pressure unit; no conversion is performed.
    """

    voigt: np.ndarray
    symmetry_class: str

    def __post_init__(self):
        object.__setattr__(self, "voigt", np.array(self.voigt, dtype=float))
        if self.voigt.shape != (6, 6):
            raise StructuralError("Voigt matrix must be 6x6")
        if self.symmetry_class not in SYMMETRY_CLASSES:
            raise ValueError(f"unknown symmetry class {self.symmetry_class!r}")
        self.voigt.setflags(write=False)

    @classmethod
    def from_constants(cls, symmetry_class: str, **constants: float) -> "ElasticTensor":
        return cls(voigt_from_constants(symmetry_class, constants), symmetry_class)

    def entry(self, name: str) -> float:
        i, j = _name_to_index(name)
        return float(self.voigt[i, j])

    def to_dict(self) -> dict:
        """Serialize as symmetry class plus the independent constants by name."""
        out = {"symmetry_class": self.symmetry_class}
        for name in INDEPENDENT_CONSTANTS[self.symmetry_class]:
            out[name] = self.entry(name)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ElasticTensor":
        data = dict(data)
        symmetry_class = data.pop("symmetry_class")
        return cls.from_constants(symmetry_class, **{k: float(v) for k, v in data.items()})

    def full_tensor(self) -> np.ndarray:
        """C_ijkl as a 3x3x3x3 array (Voigt factors are not needed for
        stiffness, only for compliance, so this is a direct unpacking)."""
        C = np.zeros((3, 3, 3, 3))
        for (i, j), m in _VOIGT.items():
            for (k, l), n in _VOIGT.items():
                v = self.voigt[m, n]
                C[i, j, k, l] = C[j, i, k, l] = C[i, j, l, k] = C[j, i, l, k] = v
        return C


@dataclass(frozen=True)
class ScaleFactors:
    """Anisotropy stretch factors for one of the construction scenarios.

    kind:
        ``cubic_t``     -- t = sqrt(C44/C11)
        ``transiso_v``  -- v = positive root of the quartic
                           C33*C44*v^4 - (C11*C33 + C44^2 - (C13+C44)^2)*v^2
                           + C11*C44 = 0, plus the eigenstress ratio gamma
        ``transiso_s``  -- the C13 + C44 = 0 branch, t = sqrt(C44/C33)
        ``ortho_s1s2``  -- s1 = sqrt(C33/C55), s2 = sqrt(C33/C44)

    For ``transiso_v`` the convention is v = v1, the larger root; both
    roots are exposed as (v1, v2) together with their quartic residuals.
    """

    kind: str
    t: float | None = None
    s1: float | None = None
    s2: float | None = None
    v: float | None = None
    gamma: float | None = None
    v1: float | None = None
    v2: float | None = None
    degenerate: bool = False
    quartic_residuals: tuple[float, float] | None = None

    def __post_init__(self):
        for name in ("t", "s1", "s2", "v"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise ValueError(f"scale factor {name}={value} must be positive")


@dataclass
class ValidityReport:
    """Outcome of the per-class positive-definiteness inequalities."""

    symmetry_class: str
    passed: bool
    violations: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)


@dataclass
class ConstraintItem:
    name: str
    satisfied: bool
    residual: float


@dataclass
class ConstraintReport:
    """Which construction scenario the tensor supports.

    For transverse isotropy the report is informational (a case split),
    flagging independently whether C13 + C44 = 0 holds and whether the
    tensor sits on the degenerate manifold sqrt(C11*C33) = C13 + 2*C44;
    the caller chooses the branch when both hold.
    """

    symmetry_class: str
    satisfied: bool
    items: list[ConstraintItem] = field(default_factory=list)
    scenario: str = ""
    gamma_branch: bool | None = None   # TI only: C13 + C44 != 0
    degenerate: bool | None = None     # TI only

    def item(self, name: str) -> ConstraintItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)


def _check_structure(C: ElasticTensor) -> None:
    scale = float(np.max(np.abs(C.voigt)))
    if scale == 0.0:
        raise StructuralError("Voigt matrix is identically zero")
    asym = float(np.max(np.abs(C.voigt - C.voigt.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise StructuralError(
            f"Voigt matrix asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL} relative"
        )
    off = ~_pattern_mask(C.symmetry_class)
    bad = np.abs(C.voigt[off]) > 0.0
    if np.any(bad):
        raise StructuralError(
            f"entries outside the {C.symmetry_class} sparsity pattern are nonzero"
        )
    if C.symmetry_class in ("isotropic", "cubic", "transversely_isotropic"):
        # Dependent entries must agree with the pattern exactly.
        ref = voigt_from_constants(
            C.symmetry_class,
            {k: C.entry(k) for k in INDEPENDENT_CONSTANTS[C.symmetry_class]},
        )
        if np.max(np.abs(ref - C.voigt)) > SYMMETRY_RTOL * scale:
            raise StructuralError(
                f"dependent entries violate the {C.symmetry_class} pattern"
            )


def validate_elastic_tensor(C: ElasticTensor) -> ValidityReport:
    """Check the positive-definiteness inequalities of the declared class.

    Cubic:         C11 > 0, C44 > 0, C11 > C12 > -C11/3.
    Transversely
    isotropic:     C44 > 0, C11 - C12 > 0, C11 + C12 + C33 > 0,
                   (C11 + C12)*C33 > 2*C13^2.
    Orthotropic:   all six diagonal constants > 0, C11*C22 > C12^2,
                   C11*C22*C33 + 2*C12*C23*C13
                       > C11*C23^2 + C22*C13^2 + C33*C12^2.
    Monoclinic:    the orthotropic list plus C44*C55 > C45^2.
    Isotropic:     mu > 0 and 3*lambda + 2*mu > 0.

    Every class additionally carries a ``voigt_positive_definite``
    eigenvalue check of the full 6x6 matrix; for monoclinic symmetry the
    inequality list above does not constrain C16/C26/C36 and is not by
    itself sufficient.

    Raises
    ------
    StructuralError
        If the matrix is asymmetric beyond 1e-12 relative or has entries
        outside the declared sparsity pattern (distinct from an
        inequality failure, which is reported).
    """
    _check_structure(C)
    g = C.entry
    checks: dict[str, bool] = {}
    cls = C.symmetry_class
    if cls == "isotropic":
        lam, mu = g("C12"), 0.5 * (g("C11") - g("C12"))
        checks["mu>0"] = mu > 0
        checks["3*lambda+2*mu>0"] = 3 * lam + 2 * mu > 0
    elif cls == "cubic":
        checks["C11>0"] = g("C11") > 0
        checks["C44>0"] = g("C44") > 0
        checks["C11>C12"] = g("C11") > g("C12")
        checks["C12>-C11/3"] = g("C12") > -g("C11") / 3.0
    elif cls == "transversely_isotropic":
        checks["C44>0"] = g("C44") > 0
        checks["C11-C12>0"] = g("C11") - g("C12") > 0
        checks["C11+C12+C33>0"] = g("C11") + g("C12") + g("C33") > 0
        checks["(C11+C12)*C33>2*C13^2"] = (g("C11") + g("C12")) * g("C33") > 2 * g("C13") ** 2
    else:
        for name in ("C11", "C22", "C33", "C44", "C55", "C66"):
            checks[f"{name}>0"] = g(name) > 0
        checks["C11*C22>C12^2"] = g("C11") * g("C22") > g("C12") ** 2
        lhs = g("C11") * g("C22") * g("C33") + 2 * g("C12") * g("C23") * g("C13")
        rhs = g("C11") * g("C23") ** 2 + g("C22") * g("C13") ** 2 + g("C33") * g("C12") ** 2
        checks["C11*C22*C33+2*C12*C23*C13>C11*C23^2+C22*C13^2+C33*C12^2"] = lhs > rhs
        if cls == "monoclinic":
            checks["C44*C55>C45^2"] = g("C44") * g("C55") > g("C45") ** 2
    checks["voigt_positive_definite"] = bool(np.min(np.linalg.eigvalsh(C.voigt)) > 0)
    violations = [name for name, ok in checks.items() if not ok]
    return ValidityReport(cls, not violations, violations, checks)


def check_construction_constraints(C: ElasticTensor) -> ConstraintReport:
    """Report whether the tensor satisfies its class's construction scenario.

    Cubic:       C12 + C44 = 0.
    Orthotropic: C33 != C44, C44 != C55, C12 + C66 = 0, C13 + C55 = 0,
                 C23 + C44 = 0.
    Monoclinic:  C16 != 0, C36 = 0, C45 = 0, C13 + C55 = 0, C23 + C44 = 0.
    Transversely isotropic: an informational case split, see
    :class:`ConstraintReport`.

    Equality constraints use absolute tolerance 1e-10 on the stiffness
    normalized by its largest entry.
    """
    report = validate_elastic_tensor(C)
    if not report.passed:
        raise DomainError(
            f"tensor fails positive-definiteness: {report.violations}"
        )
    g = C.entry
    scale = float(np.max(np.abs(C.voigt)))
    tol = CONSTRAINT_ATOL * scale

    def eq(name: str, value: float) -> ConstraintItem:
        return ConstraintItem(name, abs(value) <= tol, abs(value) / scale)

    def ne(name: str, value: float) -> ConstraintItem:
        return ConstraintItem(name, abs(value) > tol, abs(value) / scale)

    cls = C.symmetry_class
    items: list[ConstraintItem]
    if cls == "cubic":
        items = [eq("C12+C44=0", g("C12") + g("C44"))]
        ok = all(it.satisfied for it in items)
        return ConstraintReport(cls, ok, items, "cubic" if ok else "unsupported")
    if cls == "orthotropic":
        items = [
            ne("C33!=C44", g("C33") - g("C44")),
            ne("C44!=C55", g("C44") - g("C55")),
            eq("C12+C66=0", g("C12") + g("C66")),
            eq("C13+C55=0", g("C13") + g("C55")),
            eq("C23+C44=0", g("C23") + g("C44")),
        ]
        ok = all(it.satisfied for it in items)
        return ConstraintReport(cls, ok, items, "orthotropic" if ok else "unsupported")
    if cls == "monoclinic":
        items = [
            ne("C16!=0", g("C16")),
            eq("C36=0", g("C36")),
            eq("C45=0", g("C45")),
            eq("C13+C55=0", g("C13") + g("C55")),
            eq("C23+C44=0", g("C23") + g("C44")),
        ]
        ok = all(it.satisfied for it in items)
        return ConstraintReport(cls, ok, items, "monoclinic" if ok else "unsupported")
    if cls == "transversely_isotropic":
        gap = math.sqrt(g("C11") * g("C33")) - g("C13") - 2 * g("C44")
        rel = gap / math.sqrt(g("C11") * g("C33"))
        gamma_free = abs(g("C13") + g("C44")) <= tol
        degenerate = abs(rel) <= DEGENERACY_RTOL
        items = [
            ConstraintItem("C13+C44=0", gamma_free, abs(g("C13") + g("C44")) / scale),
            ConstraintItem("sqrt(C11*C33)-C13-2*C44=0 (degenerate)", degenerate, abs(rel)),
            ConstraintItem("sqrt(C11*C33)-C13-2*C44>=0 (real roots)", rel >= -DEGENERACY_RTOL, rel),
        ]
        if gamma_free and degenerate:
            scenario = "both (caller chooses branch)"
        elif gamma_free:
            scenario = "gamma_free"
        else:
            scenario = "degenerate" if degenerate else "non_degenerate"
        ok = rel >= -DEGENERACY_RTOL
        return ConstraintReport(cls, ok, items, scenario, gamma_free, degenerate)
    # Isotropic has no construction constraint; the strain map is unconditional.
    return ConstraintReport(cls, True, [], "isotropic")


def ti_quartic_coefficients(C: ElasticTensor) -> tuple[float, float, float]:
    """Coefficients (A, B, D) of A*v^4 - B*v^2 + D = 0 for transverse isotropy."""
    g = C.entry
    A = g("C33") * g("C44")
    B = g("C11") * g("C33") + g("C44") ** 2 - (g("C13") + g("C44")) ** 2
    D = g("C11") * g("C44")
    return A, B, D


def ti_quartic_roots(C: ElasticTensor) -> tuple[float, float]:
    """Roots v1 >= v2 > 0 of the quartic, solved as a quadratic in v^2.

    Raises
    ------
    DomainError
        If the discriminant B^2 - 4*A*D is negative (complex-root regime,
        equivalently sqrt(C11*C33) - C13 - 2*C44 < 0).
    """
    A, B, D = ti_quartic_coefficients(C)
    disc = B * B - 4.0 * A * D
    if disc < 0.0:
        raise DomainError(
            "quartic in v^2 has no positive real root: discriminant "
            f"B^2-4AD = {disc:.6e} < 0 (A={A:.6g}, B={B:.6g}, D={D:.6g})"
        )
    sq = math.sqrt(disc)
    w1 = (B + sq) / (2.0 * A)
    w2 = (B - sq) / (2.0 * A)
    if w2 <= 0.0 or B <= 0.0:
        raise DomainError("quartic in v^2 has no positive real root pair")
    return math.sqrt(w1), math.sqrt(w2)


def ti_quartic_residual(C: ElasticTensor, v: float) -> float:
    """Quartic residual at v, relative to C11*C44."""
    A, B, D = ti_quartic_coefficients(C)
    return abs(A * v**4 - B * v**2 + D) / D


def ti_gamma(C: ElasticTensor, v: float) -> float:
    """Eigenstress ratio gamma = (C11*C33 - C33*C44*v^2) / ((C13+C44)*C11)."""
    g = C.entry
    return (g("C11") * g("C33") - g("C33") * g("C44") * v * v) / (
        (g("C13") + g("C44")) * g("C11")
    )


def scale_factors(C: ElasticTensor) -> ScaleFactors:
    """Compute the stretch factors of the tensor's construction scenario.

    cubic                 -> t = sqrt(C44/C11)
    orthotropic/monoclinic-> s1 = sqrt(C33/C55), s2 = sqrt(C33/C44)
    transversely isotropic-> v = v1 (larger quartic root; the degenerate
                             case collapses to v = (C11/C33)^(1/4)) and
                             gamma, unless C13 + C44 = 0, in which case
                             the scenario degenerates to a single factor
                             t = sqrt(C44/C33).
    """
    report = check_construction_constraints(C)
    g = C.entry
    cls = C.symmetry_class
    if cls == "cubic":
        return ScaleFactors("cubic_t", t=math.sqrt(g("C44") / g("C11")))
    if cls in ("orthotropic", "monoclinic"):
        return ScaleFactors(
            "ortho_s1s2",
            s1=math.sqrt(g("C33") / g("C55")),
            s2=math.sqrt(g("C33") / g("C44")),
        )
    if cls == "transversely_isotropic":
        degenerate = bool(report.degenerate)
        if report.gamma_branch:
            # gamma of Eq. (gamma) divides by C13 + C44; this branch uses the
            # cubic-style single stretch instead.
            factors = ScaleFactors(
                "transiso_s",
                t=math.sqrt(g("C44") / g("C33")),
                degenerate=degenerate,
            )
            return factors
        if degenerate:
            v = (g("C11") / g("C33")) ** 0.25
            return ScaleFactors(
                "transiso_v",
                v=v,
                gamma=ti_gamma(C, v),
                v1=v,
                v2=v,
                degenerate=True,
                quartic_residuals=(ti_quartic_residual(C, v),) * 2,
            )
        v1, v2 = ti_quartic_roots(C)
        return ScaleFactors(
            "transiso_v",
            v=v1,
            gamma=ti_gamma(C, v1),
            v1=v1,
            v2=v2,
            degenerate=False,
            quartic_residuals=(ti_quartic_residual(C, v1), ti_quartic_residual(C, v2)),
        )
    if cls == "isotropic":
        # Identity stretch; kept for uniform call sites.
        return ScaleFactors("cubic_t", t=1.0)
    raise ValueError(cls)


def stretch_diagonal(C: ElasticTensor) -> np.ndarray:
    """Diagonal of the coordinate stretch Q mapping the physical frame to
    the frame where the scalar potential obeys the plain Laplacian.

    cubic: diag(1, 1, t); transversely isotropic: diag(1, 1, t) or
    diag(1, 1, v); orthotropic/monoclinic: diag(s1, s2, 1); isotropic:
    identity.
    """
    f = scale_factors(C)
    if f.kind == "cubic_t" or f.kind == "transiso_s":
        return np.array([1.0, 1.0, f.t])
    if f.kind == "transiso_v":
        return np.array([1.0, 1.0, f.v])
    return np.array([f.s1, f.s2, 1.0])
