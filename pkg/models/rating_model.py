import functools
import typing

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import sparse


class Rating(BaseModel):
    user_id: str = Field(...)
    item_id: str = Field(...)
    value: float = Field(..., allow_inf_nan=False)

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        json_schema_extra={
            "example": {
                "user_id": "u1",
                "item_id": "i1",
                "value": 5.0,
            }
        },
    )


class RatingsMatrix(BaseModel):
    """
    Sparse user x item rating store. Ids map to dense indices in first-seen order;
    entries keep the order in which pairs were first ingested.
    """

    users: typing.Tuple[str, ...] = Field(default=())
    items: typing.Tuple[str, ...] = Field(default=())
    entries: typing.Dict[typing.Tuple[int, int], float] = Field(default_factory=dict)

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        json_schema_extra={
            "example": {
                "users": ["u1", "u2"],
                "items": ["i1", "i2"],
            }
        },
    )

    @model_validator(mode="after")
    def check_indices(self):
        n_users, n_items = len(self.users), len(self.items)
        for (u, i), value in self.entries.items():
            if not (0 <= u < n_users and 0 <= i < n_items):
                raise ValueError(f"entry ({u}, {i}) is out of range")
            if not np.isfinite(value):
                raise ValueError(f"entry ({u}, {i}) has non-finite value {value!r}")
        return self

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_entries(self) -> int:
        return len(self.entries)

    @property
    def is_empty(self) -> bool:
        return not self.entries

    @functools.cached_property
    def user_index(self) -> typing.Dict[str, int]:
        return {user_id: idx for idx, user_id in enumerate(self.users)}

    @functools.cached_property
    def item_index(self) -> typing.Dict[str, int]:
        return {item_id: idx for idx, item_id in enumerate(self.items)}

    @functools.cached_property
    def user_ratings(self) -> typing.List[typing.Dict[int, float]]:
        """Per user index: item index -> rating."""
        rows = [{} for _ in self.users]
        for (u, i), value in self.entries.items():
            rows[u][i] = value
        return rows

    @functools.cached_property
    def item_ratings(self) -> typing.List[typing.Dict[int, float]]:
        """Per item index: user index -> rating."""
        cols = [{} for _ in self.items]
        for (u, i), value in self.entries.items():
            cols[i][u] = value
        return cols

    @functools.cached_property
    def item_means(self) -> np.ndarray:
        means = np.full(self.n_items, np.nan)
        for i, raters in enumerate(self.item_ratings):
            if raters:
                means[i] = float(np.mean(list(raters.values())))
        return means

    @functools.cached_property
    def global_mean(self) -> typing.Optional[float]:
        if not self.entries:
            return None
        return float(np.mean(list(self.entries.values())))

    @functools.cached_property
    def rating_range(self) -> typing.Optional[typing.Tuple[float, float]]:
        if not self.entries:
            return None
        values = list(self.entries.values())
        return float(min(values)), float(max(values))

    def to_csr(self) -> sparse.csr_matrix:
        if not self.entries:
            return sparse.csr_matrix((self.n_users, self.n_items))
        keys = np.array(list(self.entries.keys()), dtype=np.int64)
        values = np.array(list(self.entries.values()), dtype=float)
        matrix = sparse.csr_matrix(
            (values, (keys[:, 0], keys[:, 1])), shape=(self.n_users, self.n_items)
        )
        matrix.sort_indices()
        return matrix

    def value(self, user: int, item: int) -> typing.Optional[float]:
        return self.entries.get((user, item))

    def triples(self) -> typing.Iterator[typing.Tuple[str, str, float]]:
        for (u, i), value in self.entries.items():
            yield self.users[u], self.items[i], value

    def subset(self, keys: typing.Iterable[typing.Tuple[int, int]]) -> "RatingsMatrix":
        """Same user/item index, only the given entries (in the given order)."""
        return RatingsMatrix(
            users=self.users,
            items=self.items,
            entries={key: self.entries[key] for key in keys},
        )


class DatasetSplit(BaseModel):
    train: RatingsMatrix = Field(...)
    test: RatingsMatrix = Field(...)
    seed: int = Field(...)
    holdout_fraction: float = Field(..., gt=0.0, lt=1.0)

    model_config = ConfigDict(populate_by_name=True, frozen=True)
