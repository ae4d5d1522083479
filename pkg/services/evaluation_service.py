import logging
import typing

import numpy as np

from common.errors import ArgumentError
from common.settings import Settings
from common.storage import write_key_values, write_rows
from models.prediction_model import EvalReport, MethodScore, Prediction
from models.rating_model import DatasetSplit, RatingsMatrix
from schema.prediction_schema import (
    PREDICTION_HEADER,
    RECOMMENDATION_HEADER,
    get_report_serial,
    prediction_rows,
    recommendation_rows,
)
from services.cf_service import item_cf_predict, user_cf_predict
from services.pipeline_service import fit_kernel_cf
from services.similarity_service import build_similarity_graph


logger = logging.getLogger(__name__)

METHODS = ("classic-user", "classic-item", "kernel-cf")


def _predictor(train: RatingsMatrix, method: str, settings: Settings):
    if method == "kernel-cf":
        return fit_kernel_cf(train, settings).predict
    if method not in ("classic-user", "classic-item"):
        raise ArgumentError(f"unknown method {method!r}, expected one of {', '.join(METHODS)} or all")

    mode = "user" if method == "classic-user" else "item"
    graph = build_similarity_graph(
        train,
        mode=mode,
        metric=settings.metric,
        edge_threshold=settings.edge_threshold,
        mean_center=settings.mean_center,
        min_co_rated=settings.min_co_rated,
    )
    predict = user_cf_predict if mode == "user" else item_cf_predict
    return lambda user, item: predict(train, graph, user, item)


def predict_pairs(
    train: RatingsMatrix,
    pairs: typing.Iterable[typing.Tuple[str, str]],
    method: str,
    settings: typing.Optional[Settings] = None,
) -> typing.List[typing.Optional[Prediction]]:
    """One prediction per (user_id, item_id) pair, trained on `train` only."""
    settings = settings if settings is not None else Settings()
    predict = _predictor(train, method, settings)
    return [predict(user, item) for user, item in pairs]


def score_predictions(
    predictions: typing.Sequence[typing.Optional[Prediction]],
    truths: typing.Sequence[float],
    allow_fallback: bool = True,
) -> MethodScore:
    """
    RMSE and MAE over the predicted pairs. Pairs without a prediction, and
    fallback predictions when allow_fallback is off, count against coverage.
    """
    n = len(truths)
    if n == 0:
        raise ArgumentError("cannot score an empty test set")
    fallbacks = sum(1 for p in predictions if p is not None and p.fallback)
    kept = [
        (p.score, truth)
        for p, truth in zip(predictions, truths)
        if p is not None and (allow_fallback or not p.fallback)
    ]
    rmse = mae = None
    if kept:
        errors = np.array([score - truth for score, truth in kept])
        rmse = float(np.sqrt(np.mean(errors * errors)))
        mae = float(np.mean(np.abs(errors)))
    return MethodScore(
        rmse=rmse,
        mae=mae,
        coverage=len(kept) / n,
        fallback_rate=fallbacks / n,
        n_predicted=len(kept),
    )


def evaluate(split: DatasetSplit, method: str = "kernel-cf", settings: typing.Optional[Settings] = None) -> EvalReport:
    """
    Predicts every test pair from the training side. `method="all"` reports
    kernel-cf as the headline with all three methods in the breakdown.
    """
    settings = settings if settings is not None else Settings()
    if split.test.is_empty:
        raise ArgumentError("cannot evaluate on an empty test set")
    methods = METHODS if method == "all" else (method,)
    headline = "kernel-cf" if method == "all" else method

    pairs = [(user, item) for user, item, _ in split.test.triples()]
    truths = [value for _, _, value in split.test.triples()]
    breakdown = {}
    for name in methods:
        predictions = predict_pairs(split.train, pairs, name, settings)
        breakdown[name] = score_predictions(predictions, truths, settings.allow_fallback)
        logger.info(
            "%s: rmse=%s mae=%s coverage=%.3f fallback_rate=%.3f",
            name, breakdown[name].rmse, breakdown[name].mae,
            breakdown[name].coverage, breakdown[name].fallback_rate,
        )

    score = breakdown[headline]
    if score.coverage < 1.0:
        logger.warning("%s predicted %d of %d test pairs", headline, score.n_predicted, len(pairs))
    return EvalReport(
        method=method,
        seed=split.seed,
        holdout_fraction=split.holdout_fraction,
        n_test=len(pairs),
        rmse=score.rmse,
        mae=score.mae,
        coverage=score.coverage,
        fallback_rate=score.fallback_rate,
        breakdown=breakdown,
    )


def export_report(report: EvalReport, path) -> None:
    write_key_values(path, get_report_serial(report))


def export_predictions(predictions, path) -> None:
    write_rows(path, PREDICTION_HEADER, prediction_rows(p for p in predictions if p is not None))


def export_recommendations(predictions, path) -> None:
    write_rows(path, RECOMMENDATION_HEADER, recommendation_rows(predictions))
