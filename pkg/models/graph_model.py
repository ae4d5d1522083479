import typing

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import sparse


class SimilarityGraph(BaseModel):
    """
    Symmetric weighted graph over users (user mode) or items (item mode).
    `weights` holds both (i, j) and (j, i); self-edges are never stored.
    """

    mode: typing.Literal["user", "item"] = Field(...)
    metric: typing.Literal["cosine", "jaccard"] = Field(default="cosine")
    node_ids: typing.Tuple[str, ...] = Field(...)
    weights: sparse.csr_matrix = Field(...)
    degrees: np.ndarray = Field(...)
    edge_threshold: float = Field(default=0.0)
    isolated: int = Field(default=0)

    model_config = ConfigDict(
        populate_by_name=True,
        arbitrary_types_allowed=True,
        frozen=True,
    )

    @model_validator(mode="after")
    def check_shape(self):
        n = len(self.node_ids)
        if self.weights.shape != (n, n):
            raise ValueError(f"weights shape {self.weights.shape} does not match {n} nodes")
        if self.degrees.shape != (n,):
            raise ValueError("degrees must have one entry per node")
        if n and self.weights.diagonal().any():
            raise ValueError("self-edges are not allowed")
        return self

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.weights.nnz // 2)

    def neighbors(self, node: int) -> typing.Tuple[np.ndarray, np.ndarray]:
        """Neighbor indices in ascending order and their similarities."""
        start, end = self.weights.indptr[node], self.weights.indptr[node + 1]
        idx = np.asarray(self.weights.indices[start:end], dtype=np.int64)
        sims = np.asarray(self.weights.data[start:end], dtype=float)
        order = np.argsort(idx, kind="stable")
        return idx[order], sims[order]

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[i, j])

    def edges(self) -> typing.Iterator[typing.Tuple[int, int, float]]:
        upper = sparse.triu(self.weights, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        for k in order:
            yield int(upper.row[k]), int(upper.col[k]), float(upper.data[k])
