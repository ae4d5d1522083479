import pytest

from common.errors import ArgumentError
from common.settings import Settings
from common.storage import read_key_values, read_rows
from models.prediction_model import Prediction
from models.rating_model import DatasetSplit, RatingsMatrix
from services.evaluation_service import (
    METHODS,
    evaluate,
    export_predictions,
    export_recommendations,
    export_report,
    predict_pairs,
    score_predictions,
)
from services.ratings_service import split


def _prediction(score, fallback=False):
    return Prediction(user_id="u", item_id="i", score=score, method="kernel-cf", fallback=fallback)


def test_perfect_predictions():
    score = score_predictions([_prediction(4.0), _prediction(2.0)], [4.0, 2.0])
    assert score.rmse == 0.0
    assert score.mae == 0.0
    assert score.coverage == 1.0


def test_constant_prediction_errors():
    score = score_predictions([_prediction(3.0), _prediction(3.0)], [1.0, 5.0])
    assert score.mae == pytest.approx(2.0)
    assert score.rmse == pytest.approx(2.0)


def test_mae_never_exceeds_rmse():
    truths = [1.0, 2.0, 5.0, 4.0, 3.0]
    score = score_predictions([_prediction(v) for v in (2.0, 2.0, 3.5, 4.5, 1.0)], truths)
    assert score.mae <= score.rmse


def test_coverage_and_fallback_rate():
    predictions = [_prediction(3.0), _prediction(4.0, fallback=True), None, _prediction(1.0)]
    truths = [3.0, 4.0, 2.0, 2.0]
    kept = score_predictions(predictions, truths)
    assert kept.coverage == pytest.approx(0.75)
    assert kept.fallback_rate == pytest.approx(0.25)
    assert kept.n_predicted == 3

    strict = score_predictions(predictions, truths, allow_fallback=False)
    assert strict.coverage == pytest.approx(0.5)
    assert strict.mae == pytest.approx(0.5)

    none = score_predictions([None], [3.0])
    assert none.rmse is None and none.coverage == 0.0


def test_empty_scoring_rejected():
    with pytest.raises(ArgumentError):
        score_predictions([], [])


def test_evaluate_kernel_cf(thousand_ratings):
    report = evaluate(split(thousand_ratings, 0.2, 7), "kernel-cf", Settings(seed=7))
    assert report.n_test == 200
    assert report.coverage == 1.0
    assert report.fallback_rate < 0.5
    assert 0.0 < report.mae <= report.rmse
    assert list(report.breakdown) == ["kernel-cf"]


def test_evaluate_all_methods(thousand_ratings):
    report = evaluate(split(thousand_ratings, 0.2, 3), "all", Settings(seed=3, max_iterations=300))
    assert tuple(report.breakdown) == METHODS
    assert report.method == "all"
    assert report.rmse == report.breakdown["kernel-cf"].rmse
    for score in report.breakdown.values():
        assert score.coverage == 1.0
        assert score.mae <= score.rmse


def test_report_is_reproducible(thousand_ratings, tmp_path):
    settings = Settings(seed=5, max_iterations=200)
    for name in ("first.txt", "second.txt"):
        export_report(evaluate(split(thousand_ratings, 0.2, 5), "kernel-cf", settings), tmp_path / name)
    assert (tmp_path / "first.txt").read_bytes() == (tmp_path / "second.txt").read_bytes()
    values = read_key_values(tmp_path / "first.txt")
    assert values["method"] == "kernel-cf"
    assert values["seed"] == "5"
    assert "kernel-cf.rmse" in values


def test_empty_test_set_rejected(thousand_ratings):
    empty = RatingsMatrix(users=thousand_ratings.users, items=thousand_ratings.items)
    with pytest.raises(ArgumentError):
        evaluate(DatasetSplit(train=thousand_ratings, test=empty, seed=1, holdout_fraction=0.2))


def test_unknown_method(two_clique):
    with pytest.raises(ArgumentError):
        predict_pairs(two_clique, [("a0", "ia0")], "svd")


def test_classic_predictions_export(two_clique, tmp_path):
    predictions = predict_pairs(two_clique, [("a0", "ia12"), ("b1", "ib0")], "classic-user")
    assert all(p.method == "classic-cf" for p in predictions)
    export_predictions(predictions, tmp_path / "predictions.csv")
    rows = read_rows(tmp_path / "predictions.csv")
    assert rows[0][1] == ["user_id", "item_id", "score", "method", "neighborhood_size", "fallback"]
    assert [row[1][:2] for row in rows[1:]] == [["a0", "ia12"], ["b1", "ib0"]]


def test_recommendations_export(tmp_path):
    export_recommendations([_prediction(4.5), _prediction(4.0)], tmp_path / "top.csv")
    assert (tmp_path / "top.csv").read_text().splitlines() == ["rank,item_id,score", "1,i,4.5", "2,i,4.0"]
