import numpy as np
import pytest

from anisoinc.errors import DomainError, StructuralError
from anisoinc.materials import (
    ElasticTensor,
    check_construction_constraints,
    scale_factors,
    stretch_diagonal,
    ti_quartic_residual,
    ti_quartic_roots,
    validate_elastic_tensor,
)


def cubic(c11, c12, c44):
    return ElasticTensor.from_constants("cubic", C11=c11, C12=c12, C44=c44)


def ti(c11, c12, c13, c33, c44):
    return ElasticTensor.from_constants(
        "transversely_isotropic", C11=c11, C12=c12, C13=c13, C33=c33, C44=c44
    )


def test_cubic_pass():
    report = validate_elastic_tensor(cubic(4.0, -1.0, 1.0))
    assert report.passed and not report.violations


def test_cubic_fail_lists_inequality():
    report = validate_elastic_tensor(cubic(1.0, 2.0, 1.0))
    assert not report.passed
    assert any("C11>C12" in v for v in report.violations)


def test_orthotropic_strict_determinant_inequality():
    # Choose constants with C11 C22 C33 + 2 C12 C23 C13 exactly equal to the
    # right-hand side: C12 = C23 = 0, C13^2 = C11 C33.
    C = ElasticTensor.from_constants(
        "orthotropic",
        C11=4.0, C22=3.0, C33=1.0, C44=1.0, C55=2.0, C66=1.5,
        C12=0.0, C13=2.0, C23=0.0,
    )
    report = validate_elastic_tensor(C)
    assert not report.passed


def test_asymmetric_matrix_is_structural_error():
    v = cubic(4.0, -1.0, 1.0).voigt.copy()
    v[0, 1] += 1e-6
    with pytest.raises(StructuralError):
        validate_elastic_tensor(ElasticTensor(v, "cubic"))


def test_off_pattern_entry_is_structural_error():
    v = cubic(4.0, -1.0, 1.0).voigt.copy()
    v[0, 3] = v[3, 0] = 0.1  # C14 is zero for cubic symmetry
    with pytest.raises(StructuralError):
        validate_elastic_tensor(ElasticTensor(v, "cubic"))


def test_eigenvalues_positive_whenever_validation_passes():
    rng = np.random.default_rng(42)
    checked = 0
    for _ in range(300):
        cls = rng.choice(["cubic", "transversely_isotropic", "orthotropic"])
        if cls == "cubic":
            C = cubic(*rng.uniform(-2, 5, size=3))
        elif cls == "transversely_isotropic":
            C = ti(*rng.uniform(-2, 5, size=5))
        else:
            vals = rng.uniform(-2, 5, size=9)
            C = ElasticTensor.from_constants(
                "orthotropic",
                C11=vals[0], C22=vals[1], C33=vals[2], C44=vals[3],
                C55=vals[4], C66=vals[5], C12=vals[6], C13=vals[7], C23=vals[8],
            )
        report = validate_elastic_tensor(C)
        if report.passed:
            checked += 1
            assert np.min(np.linalg.eigvalsh(C.voigt)) > 0
    assert checked > 20


def test_cubic_constraint():
    report = check_construction_constraints(cubic(4.0, -1.0, 1.0))
    assert report.satisfied
    assert report.item("C12+C44=0").satisfied


def test_degenerate_ti_branch():
    C = ti(16.0, 0.0, 2.0, 1.0, 1.0)  # sqrt(16*1) - 2 - 2 = 0
    report = check_construction_constraints(C)
    assert report.degenerate is True
    assert report.scenario == "degenerate"
    factors = scale_factors(C)
    assert factors.degenerate
    assert factors.v == pytest.approx(2.0, abs=1e-14)
    assert factors.v == pytest.approx((16.0 / 1.0) ** 0.25, abs=1e-12)


def test_degenerate_v_solves_quartic():
    C = ti(16.0, 0.0, 2.0, 1.0, 1.0)
    assert ti_quartic_residual(C, 2.0) <= 1e-12


def test_orthotropic_constraint_violated_when_c33_equals_c44():
    C = ElasticTensor.from_constants(
        "orthotropic",
        C11=28.0, C22=26.0, C33=9.0, C44=9.0, C55=1.0, C66=2.0,
        C12=-2.0, C13=-1.0, C23=-9.0,
    )
    report = check_construction_constraints(C)
    assert not report.item("C33!=C44").satisfied


def test_scale_factors_cubic_and_ortho():
    assert scale_factors(cubic(4.0, -1.0, 1.0)).t == pytest.approx(0.5)
    C = ElasticTensor.from_constants(
        "orthotropic",
        C11=28.0, C22=26.0, C33=9.0, C44=1.0, C55=4.0, C66=2.0,
        C12=-2.0, C13=-4.0, C23=-1.0,
    )
    f = scale_factors(C)
    assert f.s1 == pytest.approx(1.5)
    assert f.s2 == pytest.approx(3.0)


def test_nondegenerate_ti_roots_and_product():
    C = ti(5.0, 2.0, 1.5, 4.0, 1.3)
    v1, v2 = ti_quartic_roots(C)
    assert v1 >= v2 > 0
    assert ti_quartic_residual(C, v1) <= 1e-10
    assert ti_quartic_residual(C, v2) <= 1e-10
    # product of the quadratic's roots in v^2 is C11/C33
    assert (v1 * v2) ** 2 == pytest.approx(5.0 / 4.0, rel=1e-10)


def test_complex_root_regime_raises():
    C = ti(4.0, 2.0, 1.5, 4.0, 1.5)  # sqrt(16) - 1.5 - 3 < 0
    assert validate_elastic_tensor(C).passed
    with pytest.raises(DomainError, match="discriminant"):
        ti_quartic_roots(C)


def test_serialization_round_trip():
    C = ti(5.0, 2.0, 1.5, 4.0, 1.3)
    other = ElasticTensor.from_dict(C.to_dict())
    assert np.array_equal(other.voigt, C.voigt)
    # dependent entries filled from the pattern
    assert C.entry("C22") == C.entry("C11")
    assert C.entry("C66") == pytest.approx(0.5 * (C.entry("C11") - C.entry("C12")))


def test_stretch_diagonal():
    assert np.allclose(stretch_diagonal(cubic(4.0, -1.0, 1.0)), [1, 1, 0.5])
    C = ElasticTensor.from_constants(
        "orthotropic",
        C11=200.0, C22=180.0, C33=9.0, C44=4.0, C55=36.0, C66=10.0,
        C12=-10.0, C13=-36.0, C23=-4.0,
    )
    assert np.allclose(stretch_diagonal(C), [0.5, 1.5, 1.0])


def test_isotropic_validation():
    good = ElasticTensor.from_constants("isotropic", C11=3.0, C12=1.0)
    assert validate_elastic_tensor(good).passed
    bad = ElasticTensor.from_constants("isotropic", C11=1.0, C12=2.0)  # mu < 0
    assert not validate_elastic_tensor(bad).passed
