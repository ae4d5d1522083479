import typing

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class KernelSpec(BaseModel):
    family: typing.Literal["epanechnikov", "gaussian", "uniform"] = Field(default="epanechnikov")

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @property
    def compact(self) -> bool:
        return self.family != "gaussian"

    @property
    def support(self) -> typing.Tuple[float, float]:
        return (-1.0, 1.0) if self.compact else (-np.inf, np.inf)


class KernelConstants(BaseModel):
    """
    roughness = R(K) = int K^2, second_moment = mu_2(K) = int x^2 K,
    squared_second_moment = int x^2 K^2 (the constant the 1-D plug-in formula uses).
    """

    family: str = Field(...)
    roughness: float = Field(..., gt=0.0)
    second_moment: float = Field(..., gt=0.0)
    squared_second_moment: float = Field(..., gt=0.0)

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        json_schema_extra={
            "example": {
                "family": "epanechnikov",
                "roughness": 0.6,
                "second_moment": 0.2,
                "squared_second_moment": 0.0857142857,
            }
        },
    )


class SmoothingSample(BaseModel):
    coordinates: np.ndarray = Field(...)
    responses: np.ndarray = Field(...)

    model_config = ConfigDict(
        populate_by_name=True,
        arbitrary_types_allowed=True,
        frozen=True,
    )

    @field_validator("coordinates", "responses", mode="before")
    @classmethod
    def as_array(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim == 2 and array.shape[1] == 1:
            array = array[:, 0]
        return array

    @model_validator(mode="after")
    def check_sample(self):
        if self.coordinates.ndim not in (1, 2) or (
            self.coordinates.ndim == 2 and self.coordinates.shape[1] != 2
        ):
            raise ValueError("coordinates must be 1-D (n,) or 2-D (n, 2)")
        if self.responses.ndim != 1 or self.responses.shape[0] != self.coordinates.shape[0]:
            raise ValueError("one response per coordinate is required")
        if self.responses.shape[0] < 1:
            raise ValueError("a smoothing sample needs at least one point")
        if not (np.all(np.isfinite(self.coordinates)) and np.all(np.isfinite(self.responses))):
            raise ValueError("coordinates and responses must be finite")
        return self

    @property
    def n(self) -> int:
        return int(self.responses.shape[0])

    @property
    def dimension(self) -> int:
        return 1 if self.coordinates.ndim == 1 else 2

    @property
    def t(self) -> np.ndarray:
        return self.coordinates if self.dimension == 1 else self.coordinates[:, 0]

    @property
    def u(self) -> np.ndarray:
        if self.dimension == 1:
            raise ValueError("a 1-D sample has no u axis")
        return self.coordinates[:, 1]

    def swapped(self) -> "SmoothingSample":
        """Same sample with the t and u axes exchanged."""
        return SmoothingSample(coordinates=self.coordinates[:, ::-1], responses=self.responses)


class BandwidthMatrix(BaseModel):
    H: np.ndarray = Field(...)
    regularized: bool = Field(default=False)

    model_config = ConfigDict(
        populate_by_name=True,
        arbitrary_types_allowed=True,
        frozen=True,
    )

    @field_validator("H", mode="before")
    @classmethod
    def as_array(cls, value):
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def check_positive_definite(self):
        if self.H.shape != (2, 2):
            raise ValueError("H must be 2x2")
        if abs(self.H[0, 1] - self.H[1, 0]) > 1e-12:
            raise ValueError("H must be symmetric")
        if not np.all(np.linalg.eigvalsh(self.H) > 0):
            raise ValueError("H must be positive-definite")
        return self


class NWEstimate(BaseModel):
    value: float = Field(...)
    fallback: bool = Field(default=False)
    weight_sum: float = Field(default=0.0)

    model_config = ConfigDict(populate_by_name=True, frozen=True)
