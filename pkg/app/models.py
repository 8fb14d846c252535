import math
import re
from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, List, Optional, Union

import numpy as np
from pydantic import (
    AfterValidator,
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    model_serializer,
    model_validator,
)

MACHINE_EPS = float(np.finfo(float).eps)

_COMPLEX_TOKEN = re.compile(r"^[0-9eE.+\-ij]+$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` (scientific notation allowed) into a complex number."""
    token = text.strip().replace(" ", "").replace("I", "i")
    if not token or not _COMPLEX_TOKEN.match(token):
        raise ValueError(f"cannot parse complex number from {text!r}")
    token = re.sub(r"(^|[+\-])j", r"\g<1>1j", token.replace("i", "j"))
    try:
        return complex(token)
    except ValueError:
        raise ValueError(f"cannot parse complex number from {text!r}") from None


def _coerce_complex(value: Any) -> Any:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict) and {"re", "im"} <= set(value):
        return complex(float(value["re"]), float(value["im"]))
    if isinstance(value, str):
        return parse_complex(value)
    return value


def _complex_pair(value: complex) -> List[float]:
    return [value.real, value.imag]


def _check_upper(value: complex) -> complex:
    if not value.imag > 0:
        raise ValueError(f"{value} is not in the upper half-plane")
    return value


def _coerce_real(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in ("infinity", "inf", "+inf", "∞"):
        return math.inf
    if isinstance(value, Fraction):
        return float(value)
    return value


def _real_or_infinity(value: float) -> Union[float, str]:
    return "Infinity" if math.isinf(value) else value


ComplexValue = Annotated[
    complex,
    BeforeValidator(_coerce_complex),
    PlainSerializer(_complex_pair, return_type=List[float]),
]
HalfPlaneValue = Annotated[
    complex,
    BeforeValidator(_coerce_complex),
    AfterValidator(_check_upper),
    PlainSerializer(_complex_pair, return_type=List[float]),
]
RealOrInfinity = Annotated[
    float,
    BeforeValidator(_coerce_real),
    PlainSerializer(_real_or_infinity, return_type=Union[float, str]),
]


# Labels
class Group(str, Enum):
    SL2Z = "sl2z"
    GAMMA0_2 = "gamma02"


class DomainName(str, Enum):
    F0 = "f0"
    F = "f"


class FamilyKind(str, Enum):
    HOMOTOPY_T = "t"
    CURVE_C = "fc"


class Half(str, Enum):
    LEFT = "left"
    ON = "on"
    RIGHT = "right"


class CurveId(str, Enum):
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"


# Points and precision
class HalfPlanePoint(BaseModel):
    re: float
    im: float = Field(..., gt=0)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class Precision(BaseModel):
    model_config = ConfigDict(frozen=True)

    target_abs_error: float = Field(1e-13, ge=64 * MACHINE_EPS)
    max_terms: int = Field(400, ge=8)
    min_im_for_series: float = Field(0.3, gt=0)


class EisensteinEval(BaseModel):
    """Values at one tau; err_bound covers g2, g3, eta1, eta2, E2, E4, E6."""

    tau: HalfPlaneValue
    g2: ComplexValue
    g3: ComplexValue
    eta1: ComplexValue
    eta2: ComplexValue
    E2: ComplexValue
    E4: ComplexValue
    E6: ComplexValue
    discriminant: ComplexValue
    dE6: ComplexValue
    critical_form: ComplexValue
    critical_form_prime: ComplexValue
    err_bound: float = Field(..., ge=0)
    critical_err: float = Field(..., ge=0)
    terms: int = Field(0, ge=0)


# Group elements
class UnimodularMatrix(BaseModel):
    """Integer matrix (a b; c d) of determinant one, stored with c > 0 or (c = 0, d > 0)."""

    model_config = ConfigDict(frozen=True)

    a: int
    b: int
    c: int
    d: int

    @model_validator(mode="before")
    @classmethod
    def _canonical(cls, data: Any) -> Any:
        if isinstance(data, BaseModel):
            return data
        if isinstance(data, str):
            data = [int(part) for part in data.replace(" ", "").split(",") if part]
        if isinstance(data, (list, tuple)):
            if len(data) != 4:
                raise ValueError("a matrix needs four entries a,b,c,d")
            data = dict(zip("abcd", data))
        if isinstance(data, dict):
            a, b, c, d = (int(data[key]) for key in "abcd")
            if a * d - b * c != 1:
                raise ValueError(f"determinant of ({a} {b}; {c} {d}) is {a * d - b * c}, expected 1")
            if c < 0 or (c == 0 and d < 0):
                a, b, c, d = -a, -b, -c, -d
            return {"a": a, "b": b, "c": c, "d": d}
        return data

    @model_serializer
    def _as_list(self) -> List[int]:
        return [self.a, self.b, self.c, self.d]

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(a=1, b=0, c=0, d=1)

    @classmethod
    def translation(cls, shift: int) -> "UnimodularMatrix":
        return cls(a=1, b=shift, c=0, d=1)

    def apply(self, tau: complex) -> complex:
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def automorphy(self, tau: complex) -> complex:
        return self.c * tau + self.d

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(a=self.d, b=-self.b, c=-self.c, d=self.a)

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            a=self.a * other.a + self.b * other.c,
            b=self.a * other.b + self.b * other.d,
            c=self.c * other.a + self.d * other.c,
            d=self.c * other.b + self.d * other.d,
        )

    @property
    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)

    @property
    def is_gamma0_2(self) -> bool:
        return self.c % 2 == 0

    def cusp(self) -> Optional[Fraction]:
        """-d/c, or None for c = 0 (the cusp at infinity)."""
        if self.c == 0:
            return None
        return Fraction(-self.d, self.c)


class DomainLabel(BaseModel):
    group: Group
    representative: UnimodularMatrix

    @model_validator(mode="after")
    def _check_membership(self) -> "DomainLabel":
        if self.group == Group.GAMMA0_2 and not self.representative.is_gamma0_2:
            raise ValueError("a Gamma0(2) representative needs even c")
        return self


# Families and zeros
class FamilyParam(BaseModel):
    kind: FamilyKind
    value: RealOrInfinity

    @model_validator(mode="after")
    def _check_range(self) -> "FamilyParam":
        if math.isnan(self.value):
            raise ValueError("family parameter is NaN")
        if self.kind == FamilyKind.HOMOTOPY_T and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"t={self.value} outside [0, 1]")
        if self.kind == FamilyKind.CURVE_C and math.isinf(self.value):
            self.value = math.inf
        return self

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


class ZeroRecord(BaseModel):
    tau: HalfPlaneValue
    param: FamilyParam
    residual: float = Field(..., ge=0)
    multiplicity: int = Field(1, ge=1)
    half: Half
    derivative: Optional[ComplexValue] = None


class ZeroCountReport(BaseModel):
    count: int = Field(..., ge=0)
    family: FamilyParam
    domain: DomainName
    height: float
    cusp_radius: Optional[float] = None
    samples: int
    winding_raw: ComplexValue
    integrality_gap: float = Field(..., ge=0)
    cusp_caps_zero_free: bool = True


# Curves
class CurvePoint(BaseModel):
    C: RealOrInfinity
    tau: HalfPlaneValue
    curve: CurveId
    half: Half
    residual: float = 0.0
    c: Optional[int] = None
    d: Optional[int] = None

    @model_validator(mode="after")
    def _check_curve(self) -> "CurvePoint":
        if self.curve == CurveId.C2 and not (self.half == Half.LEFT and 0 < self.C < math.inf):
            raise ValueError(f"C2 point needs Re tau < 1/2 and C > 0 (got C={self.C}, {self.half.value})")
        if self.curve == CurveId.C3 and not (self.half == Half.RIGHT and self.C < 1):
            raise ValueError(f"C3 point needs Re tau > 1/2 and C < 1 (got C={self.C}, {self.half.value})")
        if self.curve == CurveId.C1 and 0 <= self.C <= 1:
            raise ValueError(f"C1 parameter {self.C} lies in [0, 1]")
        return self


class DenseSampleSpec(BaseModel):
    max_denominator: int = Field(..., ge=2)
    group: Group
    max_abs_C: float = Field(4.0, gt=0)


# Monodromy
class WeierstrassEval(BaseModel):
    z: ComplexValue
    tau: HalfPlaneValue
    p: ComplexValue
    p_prime: ComplexValue
    p_dprime: ComplexValue
    zeta_w: ComplexValue
    err_bound: float = Field(..., ge=0)


class MonodromyResult(BaseModel):
    tau: HalfPlaneValue
    q1: Optional[ComplexValue] = None
    q2: Optional[ComplexValue] = None
    chi1: ComplexValue
    chi2: ComplexValue
    D: Optional[ComplexValue] = None
    D_infinite: bool = False
    phi: Optional[ComplexValue] = None
    base_point: Optional[ComplexValue] = None
    ode_matrices: Optional[List[List[List[ComplexValue]]]] = None
    ode_deviation: Optional[float] = None  # entrywise |M - expected| / max(1, |expected|)
    chi_increments: Optional[List[ComplexValue]] = None


# Reports
class EvalReport(BaseModel):
    eval: EisensteinEval
    reduction: Optional[UnimodularMatrix] = None
    reduced_tau: Optional[HalfPlaneValue] = None
    legendre_residual: float
    ramanujan_residual: float
    flags: List[str] = []


class CriticalPointsReport(BaseModel):
    group: Group
    matrix: UnimodularMatrix
    cusp: Optional[str] = None
    points: List[HalfPlaneValue]
    residuals: List[float]


class VerificationCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


class VerificationReport(BaseModel):
    checks: List[VerificationCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


# HTTP request models
class EvalRequest(BaseModel):
    tau: HalfPlanePoint


class CriticalRequest(BaseModel):
    group: Group
    matrix: UnimodularMatrix


class CountRequest(BaseModel):
    family: FamilyKind
    value: RealOrInfinity
    domain: DomainName = DomainName.F0
    height: Optional[float] = Field(None, ge=5)
    cusp_radius: Optional[float] = Field(None, gt=0, le=0.05)


class SolveRequest(BaseModel):
    C: float


class SolveResponse(BaseModel):
    lower: Optional[ZeroRecord] = None
    upper: Optional[ZeroRecord] = None


class TraceRequest(BaseModel):
    curve: CurveId
    C_lo: RealOrInfinity
    C_hi: RealOrInfinity
    max_step: Optional[float] = Field(None, gt=0)


class MonodromyRequest(BaseModel):
    tau: HalfPlanePoint
    ode: bool = False
