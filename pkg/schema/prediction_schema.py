from models.prediction_model import EvalReport, MethodScore, Prediction


PREDICTION_HEADER = ("user_id", "item_id", "score", "method", "neighborhood_size", "fallback")
RECOMMENDATION_HEADER = ("rank", "item_id", "score")


def get_prediction_serial(prediction: Prediction) -> dict:
    return {
        "user_id": prediction.user_id,
        "item_id": prediction.item_id,
        "score": float(prediction.score),
        "method": prediction.method,
        "neighborhood_size": prediction.neighborhood_size,
        "fallback": prediction.fallback,
    }


def list_predictions(predictions) -> list:
    return [get_prediction_serial(prediction) for prediction in predictions]


def prediction_rows(predictions) -> list:
    return [[row[key] for key in PREDICTION_HEADER] for row in list_predictions(predictions)]


def recommendation_rows(predictions) -> list:
    return [[rank, p.item_id, float(p.score)] for rank, p in enumerate(predictions, start=1)]


def _optional(value):
    return "" if value is None else float(value)


def get_score_serial(prefix: str, score: MethodScore) -> dict:
    return {
        f"{prefix}.rmse": _optional(score.rmse),
        f"{prefix}.mae": _optional(score.mae),
        f"{prefix}.coverage": float(score.coverage),
        f"{prefix}.fallback_rate": float(score.fallback_rate),
        f"{prefix}.n_predicted": score.n_predicted,
    }


def get_report_serial(report: EvalReport) -> dict:
    serial = {
        "method": report.method,
        "seed": report.seed,
        "holdout_fraction": float(report.holdout_fraction),
        "n_test": report.n_test,
        "rmse": _optional(report.rmse),
        "mae": _optional(report.mae),
        "coverage": float(report.coverage),
        "fallback_rate": float(report.fallback_rate),
    }
    for name, score in report.breakdown.items():
        serial.update(get_score_serial(name, score))
    return serial
