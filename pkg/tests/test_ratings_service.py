import pytest

from common.errors import ArgumentError, IngestionError, MalformedLineError
from models.rating_model import Rating
from services.ratings_service import (
    export_ratings,
    export_split,
    from_ratings,
    ingest_ratings,
    load_ratings,
    split,
)


def test_load_three_lines(ratings_file):
    matrix = load_ratings(ratings_file(["u1,i1,5", "u1,i2,3", "u2,i1,4"]))
    assert (matrix.n_users, matrix.n_items, matrix.n_entries) == (2, 2, 3)
    assert matrix.users == ("u1", "u2")
    assert matrix.value(1, 0) == 4.0


def test_load_empty_file(ratings_file):
    matrix = load_ratings(ratings_file([]))
    assert (matrix.n_users, matrix.n_items, matrix.n_entries) == (0, 0, 0)
    assert matrix.global_mean is None


def test_duplicates_last_write_wins(ratings_file, caplog):
    result = ingest_ratings(ratings_file(["u1,i1,5", "u1,i1,2"]))
    assert result.duplicates == 1
    assert result.matrix.n_entries == 1
    assert result.matrix.value(0, 0) == 2.0
    assert "duplicate" in caplog.text


def test_header_and_tabs(ratings_file):
    matrix = load_ratings(ratings_file(["user\titem\trating", "a\tx\t1.5", "b\tx\t2"]))
    assert matrix.users == ("a", "b")
    assert matrix.value(0, 0) == 1.5


def test_malformed_lines_skipped_and_reported(ratings_file):
    result = ingest_ratings(ratings_file(["u1,i1,5", "u2,i2", "u3,i3,abc", "u4,i4,nan", "u5,i5,4"]))
    assert result.matrix.n_entries == 2
    assert [e.line for e in result.malformed] == [2, 3, 4]
    assert all(isinstance(e, MalformedLineError) for e in result.malformed)
    assert "^^^" in str(result.malformed[1])


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        load_ratings(tmp_path / "nope.csv")


def _ten_entries():
    matrix, _ = from_ratings(
        Rating(user_id=f"u{k % 3}", item_id=f"i{k}", value=float(1 + k % 5)) for k in range(10)
    )
    return matrix


def test_split_sizes_and_partition():
    matrix = _ten_entries()
    result = split(matrix, 0.2, 7)
    assert result.test.n_entries == 2
    assert result.train.n_entries == 8
    train, test = set(result.train.entries), set(result.test.entries)
    assert not train & test
    assert train | test == set(matrix.entries)
    assert result.train.users == matrix.users


def test_split_is_deterministic():
    matrix = _ten_entries()
    assert split(matrix, 0.2, 7).test.entries == split(matrix, 0.2, 7).test.entries


def test_split_seed_changes_test_set():
    matrix = _ten_entries()
    test_sets = {frozenset(split(matrix, 0.2, seed).test.entries) for seed in (7, 8, 9)}
    assert len(test_sets) > 1


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
def test_split_rejects_fraction(fraction):
    with pytest.raises(ArgumentError):
        split(_ten_entries(), fraction, 1)


def test_split_rejects_empty_matrix(ratings_file):
    with pytest.raises(ArgumentError):
        split(load_ratings(ratings_file([])), 0.5, 1)


def test_export_round_trip(tmp_path, ratings_file):
    source = ingest_ratings(ratings_file(["u1,i1,5", "u1,i1,2", "u2,i1,0.1", "u2,i3,3.3333333333333335"])).matrix
    export_ratings(source, tmp_path / "out.csv")
    again = load_ratings(tmp_path / "out.csv")
    assert sorted(again.triples()) == sorted(source.triples())


def test_export_split(tmp_path):
    result = split(_ten_entries(), 0.3, 3)
    export_split(result, tmp_path / "train.csv", tmp_path / "test.csv")
    assert load_ratings(tmp_path / "train.csv").n_entries == 7
    assert load_ratings(tmp_path / "test.csv").n_entries == 3
