import numpy as np
import pytest

from common.errors import ArgumentError, UnknownIdError
from common.settings import Settings
from models.bandwidth_model import BandwidthPair
from models.kernel_model import SmoothingSample
from models.rating_model import Rating, RatingsMatrix
from services.cf_service import user_cf_predict
from services.kernel_service import nw_estimate_2d
from services.pipeline_service import KernelCFModel, fit_kernel_cf, kernel_cf_recommend
from services.ratings_service import from_ratings
from services.similarity_service import build_similarity_graph


WIDE = {"bandwidth_t": 1e6, "bandwidth_u": 1e6}


def _rewindowed(model: KernelCFModel, b: float) -> KernelCFModel:
    return KernelCFModel(
        train=model.train,
        graph=model.graph,
        layout=model.layout,
        bandwidth=BandwidthPair(b_t=b, b_u=b, source="fixed", n=model.graph.n_nodes),
        kernel=model.kernel,
        settings=model.settings,
    )


def test_similarity_weighting_with_unbounded_window_matches_user_cf(dense_ratings):
    settings = Settings(weighting="similarity", bandwidth_t=1e12, bandwidth_u=1e12, max_iterations=100)
    model = fit_kernel_cf(dense_ratings, settings)
    graph = build_similarity_graph(dense_ratings)
    for u in range(0, dense_ratings.n_users, 5):
        user = dense_ratings.users[u]
        rated = dense_ratings.user_ratings[u]
        for i, item in enumerate(dense_ratings.items):
            if i in rated:
                continue
            kernel = model.predict(user, item)
            classic = user_cf_predict(dense_ratings, graph, user, item)
            assert kernel.score == classic.score
            assert kernel.fallback == classic.fallback
            assert kernel.neighborhood_size == classic.neighborhood_size


def test_two_clique_recommendations(two_clique):
    model = fit_kernel_cf(two_clique, Settings(**WIDE))
    top = model.recommend("a0", top_n=5)
    assert {p.item_id for p in top} == {f"ia{k}" for k in range(10, 15)}
    assert all(p.score >= 2.0 for p in top)
    assert all(p.method == "kernel-cf" for p in top)
    scores = [p.score for p in top]
    assert scores == sorted(scores, reverse=True)

    single = model.recommend("a0", top_n=1)
    assert len(single) == 1
    assert single[0] == top[0]


def test_two_clique_recommendations_with_plug_in_bandwidths(two_clique):
    model = fit_kernel_cf(two_clique, Settings())
    assert model.bandwidth.source != "fixed"

    # a1..a5 share no item with the bridge user, so every candidate is a clique-A user
    for k in range(1, 6):
        recommended = model.recommend(f"a{k}", top_n=20)
        assert recommended
        assert all(p.item_id.startswith("ia") for p in recommended)

    # the bridge user's only B item is rated 1, below every clique-A rating
    for k in (0, 6, 7, 8, 9):
        assert model.recommend(f"a{k}", top_n=1)[0].item_id.startswith("ia")


def test_predictions_bin_over_the_whole_layout(thousand_ratings):
    model = fit_kernel_cf(thousand_ratings, Settings(max_iterations=200))
    checked = 0
    for u in range(0, thousand_ratings.n_users, 6):
        hood = model.neighborhood(u)
        for i in range(0, thousand_ratings.n_items, 5):
            raters = thousand_ratings.item_ratings[i]
            members = [k for k in hood.retained if k in raters]
            if len(members) < 2:
                continue
            sample = SmoothingSample(
                coordinates=model.layout.positions[members], responses=[raters[k] for k in members]
            )
            expected = nw_estimate_2d(
                sample,
                model.layout.positions[u],
                model.bandwidth.b_t,
                model.bandwidth.b_u,
                model.kernel,
                frame=model.layout.positions,
            )
            prediction = model.predict(thousand_ratings.users[u], thousand_ratings.items[i])
            assert prediction.score == expected.value
            checked += 1
    assert checked > 0


def test_narrow_window_excludes_the_bridge_user(two_clique):
    wide = fit_kernel_cf(two_clique, Settings(**WIDE))
    positions = wide.layout.positions
    bridge = two_clique.user_index["x"]
    a_users = [two_clique.user_index[f"a{k}"] for k in range(10)]

    best, best_gap = None, 0.0
    for u in a_users:
        neighbors, _ = wide.graph.neighbors(u)
        if bridge not in neighbors:
            continue
        to_bridge = float(np.max(np.abs(positions[bridge] - positions[u])))
        to_clique = min(float(np.max(np.abs(positions[k] - positions[u]))) for k in a_users if k != u)
        if 0.999 * to_bridge > to_clique and (best is None or to_bridge > best_gap):
            best, best_gap = u, to_bridge
    assert best is not None

    narrow = _rewindowed(wide, 0.999 * best_gap)
    hood = narrow.neighborhood(best)
    assert bridge in hood.candidates
    assert bridge not in hood.retained
    assert not hood.fallback

    recommended = narrow.recommend(two_clique.users[best], top_n=20)
    assert recommended
    assert not [p for p in recommended if p.item_id.startswith("ib")]


def test_retained_sets_grow_with_bandwidth(thousand_ratings):
    model = fit_kernel_cf(thousand_ratings, Settings(**WIDE, max_iterations=200))
    spread = float(np.ptp(model.layout.positions))
    windows = [_rewindowed(model, spread * f) for f in (0.05, 0.2, 0.5, 2.0)]
    for node in range(0, thousand_ratings.n_users, 7):
        previous = None
        for window in windows:
            hood = window.neighborhood(node)
            assert set(hood.retained) <= set(hood.candidates)
            if previous is not None and not previous.fallback and not hood.fallback:
                assert set(previous.retained) <= set(hood.retained)
            previous = hood
        assert set(previous.retained) == set(previous.candidates)


def test_predictions_stay_in_rating_range(thousand_ratings):
    model = fit_kernel_cf(thousand_ratings, Settings(max_iterations=200))
    low, high = thousand_ratings.rating_range
    for u in range(0, thousand_ratings.n_users, 9):
        for item in thousand_ratings.items[::3]:
            prediction = model.predict(thousand_ratings.users[u], item)
            assert low <= prediction.score <= high


def test_fit_is_deterministic(thousand_ratings):
    settings = Settings(seed=17, max_iterations=150)
    first = fit_kernel_cf(thousand_ratings, settings)
    second = fit_kernel_cf(thousand_ratings, settings)
    np.testing.assert_array_equal(first.layout.positions, second.layout.positions)
    assert first.bandwidth == second.bandwidth
    assert first.recommend("u3") == second.recommend("u3")


def test_item_mode_recommendations_skip_rated_items(two_clique):
    model = fit_kernel_cf(two_clique, Settings(mode="item", **WIDE))
    rated = {two_clique.items[i] for i in two_clique.user_ratings[two_clique.user_index["a3"]]}
    recommended = model.recommend("a3", top_n=15)
    assert recommended
    assert not {p.item_id for p in recommended} & rated
    scores = [p.score for p in recommended]
    assert scores == sorted(scores, reverse=True)


def test_empty_candidate_pool(caplog):
    matrix, _ = from_ratings(
        [Rating(user_id="u0", item_id="i0", value=4.0), Rating(user_id="u1", item_id="i0", value=2.0)]
    )
    model = fit_kernel_cf(matrix, Settings(**WIDE))
    assert model.recommend("u0") == []
    assert "Empty candidate pool" in caplog.text


def test_recommend_arguments(two_clique):
    model = fit_kernel_cf(two_clique, Settings(**WIDE, max_iterations=50))
    with pytest.raises(UnknownIdError):
        model.recommend("nobody")
    with pytest.raises(ArgumentError):
        model.recommend("a0", top_n=0)
    with pytest.raises(UnknownIdError):
        model.predict("a0", "nothing")


def test_kernel_cf_recommend(two_clique):
    top = kernel_cf_recommend(two_clique, Settings(**WIDE), user="a0", top_n=3)
    assert len(top) == 3
    with pytest.raises(UnknownIdError):
        kernel_cf_recommend(two_clique, Settings(**WIDE), user="nobody")


def test_empty_matrix_cannot_be_fitted():
    with pytest.raises(ArgumentError):
        fit_kernel_cf(RatingsMatrix())
