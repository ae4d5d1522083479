import typing

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def monomial_exponents(degree: int) -> typing.Tuple[typing.Tuple[int, int], ...]:
    """
    Exponent pairs (p, q) of t^p u^q, ordered by total degree and then by
    decreasing power of t. Degree 2 gives 1, t, u, t^2, tu, u^2.
    """
    return tuple((d - q, q) for d in range(degree + 1) for q in range(d + 1))


class SurfaceFit(BaseModel):
    """
    Global polynomial r(t, u) = sum_k a_k t^p_k u^q_k fitted by ordinary least squares.
    """

    degree: int = Field(default=2, ge=2)
    coefficients: np.ndarray = Field(...)
    residual_variance: float = Field(..., ge=0.0)
    n: int = Field(..., ge=1)

    model_config = ConfigDict(
        populate_by_name=True,
        arbitrary_types_allowed=True,
        frozen=True,
    )

    @field_validator("coefficients", mode="before")
    @classmethod
    def as_array(cls, value):
        return np.asarray(value, dtype=float)

    @property
    def exponents(self) -> typing.Tuple[typing.Tuple[int, int], ...]:
        return monomial_exponents(self.degree)

    def coefficient(self, p: int, q: int) -> float:
        return float(self.coefficients[self.exponents.index((p, q))])

    def evaluate(self, t, u) -> np.ndarray:
        return self.partial(0, 0, t, u)

    def partial(self, dt: int, du: int, t, u) -> np.ndarray:
        """The (dt, du) partial derivative evaluated at (t, u)."""
        t = np.asarray(t, dtype=float)
        u = np.asarray(u, dtype=float)
        out = np.zeros(np.broadcast(t, u).shape)
        for (p, q), a in zip(self.exponents, self.coefficients):
            if p < dt or q < du or a == 0.0:
                continue
            factor = float(np.prod(np.arange(p - dt + 1, p + 1))) * float(
                np.prod(np.arange(q - du + 1, q + 1))
            )
            out = out + a * factor * t ** (p - dt) * u ** (q - du)
        return out


class Region(BaseModel):
    t_min: float = Field(...)
    t_max: float = Field(...)
    u_min: float = Field(...)
    u_max: float = Field(...)

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @property
    def width(self) -> float:
        return self.t_max - self.t_min

    @property
    def height(self) -> float:
        return self.u_max - self.u_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def swapped(self) -> "Region":
        return Region(t_min=self.u_min, t_max=self.u_max, u_min=self.t_min, u_max=self.t_max)


class FunctionalSet(BaseModel):
    i_tt: float = Field(..., ge=0.0)
    i_uu: float = Field(..., ge=0.0)
    i_tu: float = Field(...)
    i_f: float = Field(..., gt=0.0)
    region: Region = Field(...)
    weight: str = Field(default="indicator of region")

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        json_schema_extra={
            "example": {
                "i_tt": 4.0,
                "i_uu": 0.0,
                "i_tu": 0.0,
                "i_f": 1.0,
                "region": {"t_min": 0.0, "t_max": 1.0, "u_min": 0.0, "u_max": 1.0},
                "weight": "indicator of region",
            }
        },
    )


class BandwidthPair(BaseModel):
    b_t: float = Field(..., gt=0.0, allow_inf_nan=False)
    b_u: float = Field(..., gt=0.0, allow_inf_nan=False)
    source: typing.Literal["plug-in", "fallback", "fixed"] = Field(default="plug-in")
    fallback: bool = Field(default=False)
    reason: typing.Optional[str] = Field(default=None)
    n: int = Field(default=0, ge=0)
    sigma2: typing.Optional[float] = Field(default=None)
    functionals: typing.Optional[FunctionalSet] = Field(default=None)

    model_config = ConfigDict(populate_by_name=True, frozen=True)


class OneDimFunctionals(BaseModel):
    """
    Estimated ingredients of the 1-D plug-in formula: noise variance, the
    integral of 1/f and the curvature integral of (r'' + 2 r' f'/f)^2.
    """

    sigma2: float = Field(..., ge=0.0)
    inverse_density: float = Field(..., gt=0.0)
    curvature: float = Field(..., ge=0.0)
    sample_range: float = Field(..., ge=0.0)

    model_config = ConfigDict(populate_by_name=True, frozen=True)


class Bandwidth1D(BaseModel):
    h: float = Field(..., gt=0.0, allow_inf_nan=False)
    fallback: bool = Field(default=False)
    reason: typing.Optional[str] = Field(default=None)
    functionals: typing.Optional[OneDimFunctionals] = Field(default=None)

    model_config = ConfigDict(populate_by_name=True, frozen=True)
