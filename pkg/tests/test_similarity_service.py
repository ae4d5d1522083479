import numpy as np
import pytest
from scipy import sparse

from common.errors import ArgumentError, NoDistanceError, UndefinedSimilarityError
from models.rating_model import Rating
from services.ratings_service import from_ratings, load_ratings
from services.similarity_service import (
    attraction_weight,
    build_similarity_graph,
    cosine_similarity,
    export_edges,
    jaccard_similarity,
    profile_matrix,
    similarity_to_distance,
)


def _matrix(triples):
    matrix, _ = from_ratings(Rating(user_id=u, item_id=i, value=v) for u, i, v in triples)
    return matrix


@pytest.mark.parametrize(
    "a, b, expected",
    [((1, 0), (1, 0), 1.0), ((1, 0), (0, 1), 0.0), ((3, 4), (4, 3), 0.96)],
)
def test_cosine_examples(a, b, expected):
    assert cosine_similarity(a, b) == pytest.approx(expected, abs=1e-12)


def test_cosine_accepts_sparse_rows():
    rows = sparse.csr_matrix(np.array([[3.0, 4.0], [4.0, 3.0]]))
    assert cosine_similarity(rows[0], rows[1]) == pytest.approx(0.96)


def test_cosine_zero_vector():
    with pytest.raises(UndefinedSimilarityError):
        cosine_similarity((0, 0), (1, 2))


@pytest.mark.parametrize(
    "a, b, expected",
    [({1, 2}, {1, 2}, 1.0), ({1, 2}, {2, 3}, 1 / 3), (set(), set(), 0.0)],
)
def test_jaccard_examples(a, b, expected):
    assert jaccard_similarity(a, b) == pytest.approx(expected)
    assert jaccard_similarity(b, a) == jaccard_similarity(a, b)


def test_similarity_to_distance():
    assert similarity_to_distance(0.5) == 2.0
    assert similarity_to_distance(1.0) == 1.0
    assert similarity_to_distance(1e-9, sim_floor=1e-6) == pytest.approx(1e6)
    assert similarity_to_distance(0.9) < similarity_to_distance(0.3)
    assert attraction_weight(0.25) == pytest.approx(0.25)


@pytest.mark.parametrize("sim", [0.0, -0.5])
def test_no_distance_without_positive_similarity(sim):
    with pytest.raises(NoDistanceError):
        similarity_to_distance(sim)


def test_identical_single_item_users():
    graph = build_similarity_graph(_matrix([("u1", "i1", 4), ("u2", "i1", 2)]))
    assert graph.n_edges == 1
    assert graph.weight(0, 1) == pytest.approx(1.0)
    assert list(graph.degrees) == [1, 1]


def test_disjoint_histories_jaccard():
    graph = build_similarity_graph(_matrix([("u1", "i1", 4), ("u2", "i2", 2)]), metric="jaccard")
    assert graph.n_edges == 0
    assert list(graph.degrees) == [0, 0]


def test_three_user_fixture():
    matrix = _matrix([("u1", "i1", 5), ("u2", "i1", 5), ("u2", "i2", 5), ("u3", "i2", 5)])
    graph = build_similarity_graph(matrix)
    assert [(i, j) for i, j, _ in graph.edges()] == [(0, 1), (1, 2)]
    for _, _, sim in graph.edges():
        assert sim == pytest.approx(np.sqrt(0.5), abs=1e-12)
    assert graph.weight(0, 2) == 0.0


def test_graph_symmetry_and_consistency(dense_ratings):
    graph = build_similarity_graph(dense_ratings)
    weights = graph.weights.toarray()
    assert np.array_equal(weights, weights.T)
    assert not weights.diagonal().any()
    assert list(graph.degrees) == list((weights > 0).sum(axis=1))

    profiles = profile_matrix(dense_ratings, "user")
    for i, j, sim in list(graph.edges())[:200]:
        assert abs(sim - cosine_similarity(profiles[i], profiles[j])) < 1e-12


def test_item_mode_graph(dense_ratings):
    graph = build_similarity_graph(dense_ratings, mode="item", metric="jaccard")
    assert graph.n_nodes == dense_ratings.n_items
    assert graph.node_ids == dense_ratings.items
    assert np.all(graph.weights.data > 0.0)


def test_threshold_and_min_co_rated():
    matrix = _matrix([("u1", "i1", 5), ("u1", "i2", 1), ("u2", "i1", 1), ("u2", "i2", 5), ("u3", "i1", 5)])
    assert build_similarity_graph(matrix, edge_threshold=0.5).weight(0, 1) == 0.0
    assert build_similarity_graph(matrix, min_co_rated=2).weight(0, 2) == 0.0
    assert build_similarity_graph(matrix, min_co_rated=2).weight(0, 1) > 0.0


def test_mean_centering_drops_negative_pairs():
    matrix = _matrix([("u1", "i1", 5), ("u1", "i2", 1), ("u2", "i1", 1), ("u2", "i2", 5)])
    assert build_similarity_graph(matrix).n_edges == 1
    assert build_similarity_graph(matrix, mean_center=True).n_edges == 0


def test_isolated_vertices_warned(caplog):
    full = _matrix([("u1", "i1", 5), ("u2", "i1", 3), ("u3", "i2", 4)])
    matrix = full.subset([(0, 0), (1, 0)])
    graph = build_similarity_graph(matrix)
    assert graph.isolated == 1
    assert "empty profiles" in caplog.text


def test_empty_matrix_rejected(ratings_file):
    with pytest.raises(ArgumentError):
        build_similarity_graph(load_ratings(ratings_file([])))


def test_export_edges(tmp_path):
    graph = build_similarity_graph(_matrix([("u1", "i1", 4), ("u2", "i1", 2)]))
    export_edges(graph, tmp_path / "edges.csv")
    lines = (tmp_path / "edges.csv").read_text().splitlines()
    assert lines == ["node_i,node_j,similarity", "u1,u2,1.0"]
