import numpy as np
import pytest
from scipy import sparse

from models.graph_model import SimilarityGraph
from models.rating_model import Rating
from services.ratings_service import from_ratings


CLIQUE_SIZE = 10
CLIQUE_ITEMS = 15


def clique_ratings(prefix: str) -> list:
    """
    User k of the clique rates items (k + j) mod 15 for j < 10, values 2..5, so
    every user leaves five clique items unrated and any two users overlap.
    """
    ratings = []
    for k in range(CLIQUE_SIZE):
        for j in range(10):
            item = (k + j) % CLIQUE_ITEMS
            ratings.append(Rating(user_id=f"{prefix}{k}", item_id=f"i{prefix}{item}", value=2.0 + (k + j) % 4))
    return ratings


def two_clique_ratings() -> list:
    bridge = [
        Rating(user_id="x", item_id="ia0", value=3.0),
        Rating(user_id="x", item_id="ib0", value=1.0),
    ]
    return clique_ratings("a") + clique_ratings("b") + bridge


def synthetic_ratings(n_users: int, n_items: int, per_user: int, seed: int) -> list:
    """
    Two taste groups: group-0 users like the first half of the items, group-1
    users the second half. Ratings are rounded to 1..5.
    """
    rng = np.random.default_rng(seed)
    ratings = []
    for u in range(n_users):
        group = u % 2
        items = np.sort(rng.choice(n_items, size=per_user, replace=False))
        for i in items:
            liked = (i < n_items // 2) == (group == 0)
            value = float(np.clip(np.rint((4.0 if liked else 2.0) + rng.normal(0.0, 0.7)), 1, 5))
            ratings.append(Rating(user_id=f"u{u}", item_id=f"i{i}", value=value))
    return ratings


def write_ratings(path, ratings) -> None:
    lines = ["user_id,item_id,rating"] + [f"{r.user_id},{r.item_id},{r.value}" for r in ratings]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def make_graph(n: int, edges, mode: str = "user") -> SimilarityGraph:
    """Graph from (i, j, sim) triples, mirrored."""
    rows, cols, values = [], [], []
    for i, j, sim in edges:
        rows += [i, j]
        cols += [j, i]
        values += [sim, sim]
    weights = sparse.csr_matrix((values, (rows, cols)), shape=(n, n))
    weights.sort_indices()
    return SimilarityGraph(
        mode=mode,
        node_ids=tuple(f"n{k}" for k in range(n)),
        weights=weights,
        degrees=np.diff(weights.indptr).astype(np.int64),
    )


def planted_cliques(size: int = CLIQUE_SIZE) -> SimilarityGraph:
    edges = []
    for offset in (0, size):
        for i in range(size):
            for j in range(i + 1, size):
                edges.append((offset + i, offset + j, 1.0))
    edges.append((0, size, 1.0))
    return make_graph(2 * size, edges)


@pytest.fixture
def ratings_file(tmp_path):
    def write(lines, name="ratings.csv"):
        path = tmp_path / name
        path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
        return path

    return write


@pytest.fixture
def two_clique():
    matrix, _ = from_ratings(two_clique_ratings())
    return matrix


@pytest.fixture
def two_clique_file(tmp_path):
    path = tmp_path / "cliques.csv"
    write_ratings(path, two_clique_ratings())
    return path


@pytest.fixture
def thousand_ratings():
    matrix, _ = from_ratings(synthetic_ratings(50, 40, 20, seed=11))
    return matrix


@pytest.fixture
def thousand_ratings_file(tmp_path):
    path = tmp_path / "thousand.csv"
    write_ratings(path, synthetic_ratings(50, 40, 20, seed=11))
    return path


@pytest.fixture
def dense_ratings():
    matrix, _ = from_ratings(synthetic_ratings(50, 100, 30, seed=5))
    return matrix
