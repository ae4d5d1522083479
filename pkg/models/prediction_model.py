import typing

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Prediction(BaseModel):
    user_id: str = Field(...)
    item_id: str = Field(...)
    score: float = Field(..., allow_inf_nan=False)
    method: typing.Literal["classic-cf", "kernel-cf"] = Field(...)
    neighborhood_size: int = Field(default=0, ge=0)
    fallback: bool = Field(default=False)

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        json_schema_extra={
            "example": {
                "user_id": "u1",
                "item_id": "i7",
                "score": 4.25,
                "method": "kernel-cf",
                "neighborhood_size": 12,
                "fallback": False,
            }
        },
    )


class Neighborhood(BaseModel):
    """
    Window selection for one node: the positive-similarity candidates and the
    subset retained by the kernel window.
    """

    node: int = Field(...)
    candidates: typing.Tuple[int, ...] = Field(default=())
    retained: typing.Tuple[int, ...] = Field(default=())
    fallback: bool = Field(default=False)

    model_config = ConfigDict(populate_by_name=True, frozen=True)


class MethodScore(BaseModel):
    rmse: typing.Optional[float] = Field(default=None, ge=0.0)
    mae: typing.Optional[float] = Field(default=None, ge=0.0)
    coverage: float = Field(..., ge=0.0, le=1.0)
    fallback_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    n_predicted: int = Field(default=0, ge=0)

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @model_validator(mode="after")
    def check_power_means(self):
        if self.rmse is not None and self.mae is not None and self.mae > self.rmse + 1e-12:
            raise ValueError("mae cannot exceed rmse")
        return self


class EvalReport(BaseModel):
    method: str = Field(...)
    seed: int = Field(...)
    holdout_fraction: float = Field(...)
    n_test: int = Field(..., ge=1)
    rmse: typing.Optional[float] = Field(default=None, ge=0.0)
    mae: typing.Optional[float] = Field(default=None, ge=0.0)
    coverage: float = Field(..., ge=0.0, le=1.0)
    fallback_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    breakdown: typing.Dict[str, MethodScore] = Field(default_factory=dict)

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        json_schema_extra={
            "example": {
                "method": "kernel-cf",
                "seed": 7,
                "holdout_fraction": 0.2,
                "n_test": 200,
                "rmse": 0.93,
                "mae": 0.74,
                "coverage": 1.0,
                "fallback_rate": 0.05,
            }
        },
    )
