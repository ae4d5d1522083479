import typing

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LayoutConfig(BaseModel):
    k_r: float = Field(default=10.0, gt=0.0)
    max_iterations: int = Field(default=1000, ge=0)
    initial_step: float = Field(default=0.1, gt=0.0)
    max_step: float = Field(default=10.0, gt=0.0)
    convergence_tolerance: float = Field(default=1e-4, gt=0.0)
    sim_floor: float = Field(default=1e-6, gt=0.0)
    seed: int = Field(default=0)

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        json_schema_extra={
            "example": {
                "k_r": 10.0,
                "max_iterations": 1000,
                "initial_step": 0.1,
                "max_step": 10.0,
                "convergence_tolerance": 1e-4,
                "sim_floor": 1e-6,
                "seed": 7,
            }
        },
    )

    @classmethod
    def from_settings(cls, settings, **overrides) -> "LayoutConfig":
        values = {
            "k_r": settings.k_r,
            "max_iterations": settings.max_iterations,
            "initial_step": settings.initial_step,
            "max_step": max(settings.max_step, settings.initial_step),
            "convergence_tolerance": settings.convergence_tolerance,
            "sim_floor": settings.sim_floor,
            "seed": settings.seed,
        }
        values.update(overrides)
        return cls(**values)


class LayoutState(BaseModel):
    """
    2-D coordinates (t, u) per node, row k belonging to node_ids[k].
    """

    node_ids: typing.Tuple[str, ...] = Field(default=())
    positions: np.ndarray = Field(...)
    iteration: int = Field(default=0, ge=0)
    converged: bool = Field(default=False)
    energy_trace: typing.Tuple[float, ...] = Field(default=())

    model_config = ConfigDict(
        populate_by_name=True,
        arbitrary_types_allowed=True,
        frozen=True,
    )

    @field_validator("positions", mode="before")
    @classmethod
    def as_array(cls, value):
        positions = np.asarray(value, dtype=float)
        if positions.size == 0:
            positions = positions.reshape(0, 2)
        return positions

    @model_validator(mode="after")
    def check_positions(self):
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must have shape (n, 2)")
        if self.positions.shape[0] != len(self.node_ids):
            raise ValueError("one position per node id is required")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        return self

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def position(self, node: int) -> np.ndarray:
        return self.positions[node]
