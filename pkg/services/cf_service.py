import logging
import math
import typing

import numpy as np

from common.errors import ArgumentError, UnknownIdError
from models.graph_model import SimilarityGraph
from models.prediction_model import Prediction
from models.rating_model import RatingsMatrix


logger = logging.getLogger(__name__)


def weighted_mean(weights, values) -> float:
    """sum(w * v) / sum(w). Shared by classic CF and the similarity-weighted Kernel-CF mode."""
    weights = np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    return float(np.dot(weights, values) / np.sum(weights))


def resolve_pair(train: RatingsMatrix, user: str, item: str) -> typing.Tuple[int, int]:
    if user not in train.user_index:
        raise UnknownIdError("user", user)
    if item not in train.item_index:
        raise UnknownIdError("item", item)
    return train.user_index[user], train.item_index[item]


def baseline_score(train: RatingsMatrix, item: int) -> typing.Optional[float]:
    """Item mean, then global mean; None on an empty matrix."""
    mean = train.item_means[item] if train.n_items else math.nan
    if math.isfinite(mean):
        return float(mean)
    return train.global_mean


def fallback_prediction(
    train: RatingsMatrix, user: str, item: str, method: str
) -> typing.Optional[Prediction]:
    score = baseline_score(train, train.item_index[item])
    if score is None:
        return None
    return Prediction(user_id=user, item_id=item, score=score, method=method, fallback=True)


def _check_mode(graph: SimilarityGraph, mode: str) -> None:
    if graph.mode != mode:
        raise ArgumentError(f"expected a {mode}-mode similarity graph, got {graph.mode}-mode")


def user_cf_predict(
    train: RatingsMatrix, graph: SimilarityGraph, user: str, item: str
) -> typing.Optional[Prediction]:
    """
    Similarity-weighted mean of the item's ratings by the user's positively
    similar neighbors. No such neighbor falls back to the item mean, then the
    global mean; None only when the training matrix is empty.
    """
    _check_mode(graph, "user")
    u, i = resolve_pair(train, user, item)

    neighbors, sims = graph.neighbors(u)
    raters = train.item_ratings[i]
    mask = np.array([sim > 0.0 and k in raters for k, sim in zip(neighbors, sims)], dtype=bool)
    if not mask.any():
        return fallback_prediction(train, user, item, "classic-cf")

    ratings = [raters[k] for k in neighbors[mask]]
    return Prediction(
        user_id=user,
        item_id=item,
        score=weighted_mean(sims[mask], ratings),
        method="classic-cf",
        neighborhood_size=int(mask.sum()),
    )


def item_cf_predict(
    train: RatingsMatrix, graph: SimilarityGraph, user: str, item: str
) -> typing.Optional[Prediction]:
    """Mirror of user_cf_predict over the item-mode graph and the user's own ratings."""
    _check_mode(graph, "item")
    u, i = resolve_pair(train, user, item)

    neighbors, sims = graph.neighbors(i)
    rated = train.user_ratings[u]
    mask = np.array([sim > 0.0 and k in rated for k, sim in zip(neighbors, sims)], dtype=bool)
    if not mask.any():
        return fallback_prediction(train, user, item, "classic-cf")

    ratings = [rated[k] for k in neighbors[mask]]
    return Prediction(
        user_id=user,
        item_id=item,
        score=weighted_mean(sims[mask], ratings),
        method="classic-cf",
        neighborhood_size=int(mask.sum()),
    )
