import logging
import typing

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from common.errors import ArgumentError, UnknownIdError
from common.settings import Settings
from models.bandwidth_model import BandwidthPair
from models.graph_model import SimilarityGraph
from models.kernel_model import KernelSpec, SmoothingSample
from models.layout_model import LayoutConfig, LayoutState
from models.prediction_model import Neighborhood, Prediction
from models.rating_model import RatingsMatrix
from services.bandwidth_service import select_bandwidth_2d
from services.cf_service import fallback_prediction, resolve_pair, weighted_mean
from services.kernel_service import nw_estimate_2d
from services.layout_service import run_layout
from services.similarity_service import build_similarity_graph


logger = logging.getLogger(__name__)


class KernelCFModel(BaseModel):
    """
    Fitted Kernel-CF state: the training matrix, its similarity graph, the
    layout of that graph and one bandwidth pair for the whole layout.
    """

    train: RatingsMatrix = Field(...)
    graph: SimilarityGraph = Field(...)
    layout: LayoutState = Field(...)
    bandwidth: BandwidthPair = Field(...)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    settings: Settings = Field(default_factory=Settings)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    _neighborhoods: typing.Dict[int, Neighborhood] = PrivateAttr(default_factory=dict)

    @property
    def mode(self) -> str:
        return self.graph.mode

    def neighborhood(self, node: int) -> Neighborhood:
        if node not in self._neighborhoods:
            self._neighborhoods[node] = self._window(node)
        return self._neighborhoods[node]

    def _window(self, node: int) -> Neighborhood:
        """
        Positive-similarity candidates of `node` and the ones inside the kernel
        window |dt| < b_t, |du| < b_u around it. An empty window keeps the single
        candidate with the smallest window-scaled distance, flagged.
        """
        neighbors, sims = self.graph.neighbors(node)
        candidates = neighbors[sims > 0.0]
        if candidates.size == 0:
            return Neighborhood(node=node)

        positions = self.layout.positions
        scaled = np.abs(positions[candidates] - positions[node]) / np.array(
            [self.bandwidth.b_t, self.bandwidth.b_u]
        )
        inside = np.all(scaled < 1.0, axis=1)
        if inside.any():
            retained = candidates[inside]
            fallback = False
        else:
            retained = candidates[[int(np.argmin(scaled.max(axis=1)))]]
            fallback = True
        return Neighborhood(
            node=node,
            candidates=tuple(int(k) for k in candidates),
            retained=tuple(int(k) for k in retained),
            fallback=fallback,
        )

    def _responses(self, user: int, item: int, retained) -> typing.Tuple[list, list]:
        if self.mode == "user":
            raters = self.train.item_ratings[item]
            members = [k for k in retained if k in raters]
            return members, [raters[k] for k in members]
        rated = self.train.user_ratings[user]
        members = [k for k in retained if k in rated]
        return members, [rated[k] for k in members]

    def _score(
        self, user: int, item: int, hood: typing.Optional[Neighborhood] = None
    ) -> typing.Optional[Prediction]:
        user_id, item_id = self.train.users[user], self.train.items[item]
        node = user if self.mode == "user" else item
        hood = hood if hood is not None else self.neighborhood(node)
        members, ratings = self._responses(user, item, hood.retained)
        if not members:
            return fallback_prediction(self.train, user_id, item_id, "kernel-cf")

        if self.settings.weighting == "similarity":
            neighbors, weights = self.graph.neighbors(node)
            lookup = dict(zip(neighbors.tolist(), weights.tolist()))
            sims = [lookup[k] for k in members]
            score, fallback = weighted_mean(sims, ratings), hood.fallback
        else:
            sample = SmoothingSample(
                coordinates=self.layout.positions[members], responses=ratings
            )
            estimate = nw_estimate_2d(
                sample,
                self.layout.positions[node],
                self.bandwidth.b_t,
                self.bandwidth.b_u,
                self.kernel,
                frame=self.layout.positions,
            )
            score, fallback = estimate.value, hood.fallback or estimate.fallback

        return Prediction(
            user_id=user_id,
            item_id=item_id,
            score=score,
            method="kernel-cf",
            neighborhood_size=len(members),
            fallback=fallback,
        )

    def predict(self, user: str, item: str) -> typing.Optional[Prediction]:
        u, i = resolve_pair(self.train, user, item)
        return self._score(u, i)

    def recommend(self, user: str, top_n: int = 10) -> typing.List[Prediction]:
        """
        Scores every candidate item the user has not rated and returns the top_n,
        highest score first, ties by ascending item index.
        """
        if top_n < 1:
            raise ArgumentError(f"top_n must be at least 1, got {top_n}")
        if user not in self.train.user_index:
            raise UnknownIdError("user", user)
        u = self.train.user_index[user]
        rated = self.train.user_ratings[u]

        scored = []
        if self.mode == "user":
            hood = self.neighborhood(u)
            pool = sorted(
                {i for k in hood.retained for i in self.train.user_ratings[k]} - set(rated)
            )
            for i in pool:
                scored.append((i, self._score(u, i, hood)))
        else:
            for i in range(self.train.n_items):
                if i in rated:
                    continue
                hood = self.neighborhood(i)
                if any(k in rated for k in hood.retained):
                    scored.append((i, self._score(u, i, hood)))

        if not scored:
            logger.warning("Empty candidate pool for user %s, nothing to recommend", user)
            return []
        scored.sort(key=lambda pair: (-pair[1].score, pair[0]))
        return [prediction for _, prediction in scored[:top_n]]


def _node_sample(train: RatingsMatrix, graph: SimilarityGraph, layout: LayoutState) -> SmoothingSample:
    """Layout coordinates of every node with ratings against its mean training rating."""
    profiles = train.user_ratings if graph.mode == "user" else train.item_ratings
    nodes = [k for k, profile in enumerate(profiles) if profile]
    means = [float(np.mean(list(profiles[k].values()))) for k in nodes]
    return SmoothingSample(coordinates=layout.positions[nodes], responses=means)


def fit_kernel_cf(train: RatingsMatrix, settings: typing.Optional[Settings] = None) -> KernelCFModel:
    """
    Fits Kernel-CF: similarity graph (candidate neighbors), its
    layout, and the bandwidth pair that defines every node's window.
    """
    settings = settings if settings is not None else Settings()
    if train.is_empty:
        raise ArgumentError("cannot fit Kernel-CF on an empty ratings matrix")

    graph = build_similarity_graph(
        train,
        mode=settings.mode,
        metric=settings.metric,
        edge_threshold=settings.edge_threshold,
        mean_center=settings.mean_center,
        min_co_rated=settings.min_co_rated,
    )
    layout = run_layout(graph, LayoutConfig.from_settings(settings))
    kernel = KernelSpec(family=settings.kernel)

    sample = _node_sample(train, graph, layout)
    positions = layout.positions
    extent = (float(np.ptp(positions[:, 0])), float(np.ptp(positions[:, 1])))
    bandwidth = select_bandwidth_2d(sample, kernel, settings, extent)
    logger.info(
        "Kernel-CF fitted: %s-mode, %d nodes, b_t=%g b_u=%g (%s)",
        graph.mode, graph.n_nodes, bandwidth.b_t, bandwidth.b_u, bandwidth.source,
    )
    return KernelCFModel(
        train=train,
        graph=graph,
        layout=layout,
        bandwidth=bandwidth,
        kernel=kernel,
        settings=settings,
    )


def kernel_cf_recommend(
    train: RatingsMatrix,
    settings: typing.Optional[Settings] = None,
    user: str = "",
    top_n: typing.Optional[int] = None,
) -> typing.List[Prediction]:
    settings = settings if settings is not None else Settings()
    if user not in train.user_index:
        raise UnknownIdError("user", user)
    model = fit_kernel_cf(train, settings)
    return model.recommend(user, top_n if top_n is not None else settings.top_n)
