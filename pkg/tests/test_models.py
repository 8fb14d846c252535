import math
from fractions import Fraction

import pytest
from pydantic import ValidationError

from app.models import (
    CurveId,
    CurvePoint,
    DomainLabel,
    FamilyKind,
    FamilyParam,
    Group,
    Half,
    HalfPlanePoint,
    UnimodularMatrix,
    ZeroRecord,
    parse_complex,
)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("0.5+2i", 0.5 + 2j),
        ("1e-3+1e-3i", 1e-3 + 1e-3j),
        ("2i", 2j),
        ("-i", -1j),
        ("0.25-1.5e1i", 0.25 - 15j),
        (" 0.5 + 0.8660254i ", 0.5 + 0.8660254j),
    ],
)
def test_parse_complex(text, expected):
    assert parse_complex(text) == expected


@pytest.mark.parametrize("text", ["", "tau", "1+2k", "1++2i"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValueError):
        parse_complex(text)


def test_half_plane_point_rejects_lower_half():
    with pytest.raises(ValidationError):
        HalfPlanePoint(re=0.5, im=-1.0)
    assert HalfPlanePoint(re=0.5, im=2.0).value == 0.5 + 2j


def test_matrix_determinant_and_canonical_sign():
    with pytest.raises(ValidationError):
        UnimodularMatrix.model_validate("1,2,3,4")
    g = UnimodularMatrix(a=0, b=1, c=-1, d=1)
    assert (g.a, g.b, g.c, g.d) == (0, -1, 1, -1)
    tau = 0.3 + 1.2j
    assert g.apply(tau) == pytest.approx(1 / (1 - tau))
    assert g.model_dump() == [0, -1, 1, -1]


def test_matrix_algebra():
    s = UnimodularMatrix.model_validate([0, -1, 1, 0])
    t = UnimodularMatrix.translation(1)
    tau = 0.1 + 0.9j
    assert (s @ t).apply(tau) == pytest.approx(s.apply(t.apply(tau)))
    assert (s @ s.inverse()).is_identity
    assert t.cusp() is None
    assert UnimodularMatrix(a=1, b=-1, c=3, d=-2).cusp() == Fraction(2, 3)
    with pytest.raises(ValidationError):
        UnimodularMatrix(a=1, b=0, c=3, d=-2)


def test_domain_label_requires_even_c_for_gamma0_2():
    with pytest.raises(ValidationError):
        DomainLabel(group=Group.GAMMA0_2, representative=UnimodularMatrix(a=1, b=0, c=1, d=1))
    DomainLabel(group=Group.SL2Z, representative=UnimodularMatrix(a=1, b=0, c=1, d=1))


def test_family_param():
    with pytest.raises(ValidationError):
        FamilyParam(kind=FamilyKind.HOMOTOPY_T, value=1.5)
    assert FamilyParam(kind=FamilyKind.CURVE_C, value="Infinity").is_infinite
    with pytest.raises(ValidationError):
        FamilyParam(kind=FamilyKind.CURVE_C, value=float("nan"))


def test_curve_point_membership():
    with pytest.raises(ValidationError):
        CurvePoint(C=2.0, tau=0.7 + 1j, curve=CurveId.C2, half=Half.RIGHT)
    with pytest.raises(ValidationError):
        CurvePoint(C=0.5, tau=0.3 + 0.6j, curve=CurveId.C1, half=Half.LEFT)
    with pytest.raises(ValidationError):
        CurvePoint(C=1.5, tau=0.8 + 1j, curve=CurveId.C3, half=Half.RIGHT)


def test_serialization_of_complex_and_infinity():
    point = CurvePoint(C=math.inf, tau=0.5 + 0.634j, curve=CurveId.C1, half=Half.ON)
    dumped = point.model_dump(mode="json")
    assert dumped["C"] == "Infinity"
    assert dumped["tau"] == [0.5, 0.634]
    again = CurvePoint.model_validate(dumped)
    assert math.isinf(again.C)
    assert again.tau == 0.5 + 0.634j


def test_zero_record_accepts_pair_and_mapping_forms():
    param = FamilyParam(kind=FamilyKind.CURVE_C, value=3.0)
    from_pair = ZeroRecord(tau=[0.2, 1.1], param=param, residual=0.0, half=Half.LEFT)
    from_map = ZeroRecord(tau={"re": 0.2, "im": 1.1}, param=param, residual=0.0, half=Half.LEFT)
    assert from_pair.tau == from_map.tau == 0.2 + 1.1j
    with pytest.raises(ValidationError):
        ZeroRecord(tau=[0.2, -1.1], param=param, residual=0.0, half=Half.LEFT)
