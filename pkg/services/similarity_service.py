import logging
import typing

import numpy as np
from scipy import sparse

from common.errors import ArgumentError, NoDistanceError, UndefinedSimilarityError
from common.storage import write_rows
from models.graph_model import SimilarityGraph
from models.rating_model import RatingsMatrix
from schema.layout_schema import EDGE_HEADER, edge_rows


logger = logging.getLogger(__name__)

SIM_FLOOR = 1e-6


def _dense(vector) -> np.ndarray:
    if sparse.issparse(vector):
        return np.asarray(vector.todense(), dtype=float).ravel()
    return np.asarray(vector, dtype=float).ravel()


def cosine_similarity(a, b) -> float:
    """
    dot(a, b) / (|a| |b|) over the full item axis, missing entries counted as 0.
    Accepts dense array-likes or scipy sparse rows.
    """
    a, b = _dense(a), _dense(b)
    if a.shape != b.shape:
        raise ArgumentError(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    norm_a, norm_b = np.linalg.norm(a), np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise UndefinedSimilarityError("cosine similarity is undefined for a zero-norm vector")
    sim = float(np.dot(a, b) / (norm_a * norm_b))
    return min(1.0, max(-1.0, sim))


def jaccard_similarity(a: typing.Iterable, b: typing.Iterable) -> float:
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def similarity_to_distance(sim: float, sim_floor: float = SIM_FLOOR) -> float:
    if not sim > 0.0:
        raise NoDistanceError(sim)
    return 1.0 / max(sim, sim_floor)


def attraction_weight(sim: float, sim_floor: float = SIM_FLOOR) -> float:
    """Layout attraction scale of an edge: 1 / target distance."""
    return 1.0 / similarity_to_distance(sim, sim_floor)


def profile_matrix(matrix: RatingsMatrix, mode: str, mean_center: bool = False) -> sparse.csr_matrix:
    """Rows are the profiles being compared: users (user mode) or items (item mode)."""
    ratings = matrix.to_csr()
    if mode == "item":
        ratings = ratings.T.tocsr()
    elif mode != "user":
        raise ArgumentError(f"unknown similarity mode {mode!r}")
    ratings.sort_indices()
    if mean_center:
        ratings = ratings.copy()
        for row in range(ratings.shape[0]):
            start, end = ratings.indptr[row], ratings.indptr[row + 1]
            if end > start:
                ratings.data[start:end] -= ratings.data[start:end].mean()
    return ratings


def pairwise_similarity(profiles: sparse.csr_matrix, metric: str) -> np.ndarray:
    presence = profiles.copy()
    presence.data = np.ones_like(presence.data)
    if metric == "cosine":
        norms = np.sqrt(np.asarray(profiles.multiply(profiles).sum(axis=1)).ravel())
        dots = np.asarray((profiles @ profiles.T).todense(), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = dots / np.outer(norms, norms)
        sims[~np.isfinite(sims)] = 0.0
        return np.clip(sims, -1.0, 1.0)
    if metric == "jaccard":
        counts = np.asarray(presence.sum(axis=1)).ravel()
        overlap = np.asarray((presence @ presence.T).todense(), dtype=float)
        union = counts[:, None] + counts[None, :] - overlap
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = np.where(union > 0, overlap / union, 0.0)
        return sims
    raise ArgumentError(f"unknown similarity metric {metric!r}")


def build_similarity_graph(
    matrix: RatingsMatrix,
    mode: typing.Literal["user", "item"] = "user",
    metric: typing.Literal["cosine", "jaccard"] = "cosine",
    edge_threshold: float = 0.0,
    mean_center: bool = False,
    min_co_rated: int = 1,
) -> SimilarityGraph:
    """
    Dense pairwise enumeration. An edge (i, j) is stored iff its similarity is
    strictly above edge_threshold, strictly positive, and the two profiles share
    at least min_co_rated items (users in item mode).
    """
    if matrix.is_empty:
        raise ArgumentError("cannot build a similarity graph from an empty ratings matrix")

    profiles = profile_matrix(matrix, mode, mean_center)
    node_ids = matrix.users if mode == "user" else matrix.items
    n = profiles.shape[0]

    presence = profiles.copy()
    presence.data = np.ones_like(presence.data)
    co_rated = np.asarray((presence @ presence.T).todense(), dtype=float)
    sims = pairwise_similarity(profiles, metric)

    keep = (sims > edge_threshold) & (sims > 0.0) & (co_rated >= min_co_rated)
    # upper triangle only, mirrored below, so weights(i, j) == weights(j, i) bit for bit
    keep = np.triu(keep, k=1)
    rows, cols = np.nonzero(keep)
    values = sims[rows, cols]
    upper = sparse.coo_matrix((values, (rows, cols)), shape=(n, n))
    weights = (upper + upper.T).tocsr()
    weights.sort_indices()
    degrees = np.diff(weights.indptr).astype(np.int64)

    empty_profiles = int(np.sum(np.diff(profiles.indptr) == 0))
    if empty_profiles:
        logger.warning("%d %s(s) with empty profiles kept as isolated vertices", empty_profiles, mode)
    logger.info(
        "Built %s-mode %s graph: %d nodes, %d edges", mode, metric, n, rows.shape[0]
    )
    return SimilarityGraph(
        mode=mode,
        metric=metric,
        node_ids=node_ids,
        weights=weights,
        degrees=degrees,
        edge_threshold=edge_threshold,
        isolated=int(np.sum(degrees == 0)),
    )


def export_edges(graph: SimilarityGraph, path) -> None:
    write_rows(path, EDGE_HEADER, edge_rows(graph))
