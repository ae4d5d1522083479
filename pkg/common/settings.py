import pathlib
import typing

from dotenv import dotenv_values
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from common.errors import ConfigError


class Settings(BaseSettings):
    debug: bool = False
    seed: int = 0

    # ratings-core
    delimiter: typing.Literal["auto", "comma", "tab"] = "auto"
    holdout_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)

    # similarity
    mode: typing.Literal["user", "item"] = "user"
    metric: typing.Literal["cosine", "jaccard"] = "cosine"
    edge_threshold: float = 0.0
    mean_center: bool = False
    min_co_rated: int = Field(default=1, ge=1)
    sim_floor: float = Field(default=1e-6, gt=0.0)

    # fa2-layout
    k_r: float = Field(default=10.0, gt=0.0)
    max_iterations: int = Field(default=1000, ge=0)
    initial_step: float = Field(default=0.1, gt=0.0)
    max_step: float = Field(default=10.0, gt=0.0)
    convergence_tolerance: float = Field(default=1e-4, gt=0.0)

    # kernels / bandwidth
    kernel: typing.Literal["epanechnikov", "gaussian", "uniform"] = "epanechnikov"
    weighting: typing.Literal["kernel", "similarity"] = "kernel"
    bandwidth_t: typing.Optional[float] = Field(default=None, gt=0.0)
    bandwidth_u: typing.Optional[float] = Field(default=None, gt=0.0)
    surface_degree: int = Field(default=2, ge=2, le=6)
    quantile_coverage: float = Field(default=0.9, gt=0.0, le=1.0)
    functional_grid: int = Field(default=50, ge=1)
    density_floor_ratio: float = Field(default=1e-3, gt=0.0, lt=1.0)

    # pipeline
    allow_fallback: bool = True
    top_n: int = Field(default=10, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="KCF_",
        extra="forbid",
    )

    @property
    def fixed_bandwidth(self) -> bool:
        return self.bandwidth_t is not None and self.bandwidth_u is not None


def read_config_file(path) -> dict:
    path = pathlib.Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        if value is None or value.strip() == "":
            continue
        values[key.strip().lower()] = value.strip()
    return values


def load_settings(config_path=None, **overrides) -> Settings:
    values = read_config_file(config_path) if config_path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Settings(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}") from e
