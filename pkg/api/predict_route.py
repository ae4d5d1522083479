from api.router import Router, option, settings_from_args
from common.errors import ArgumentError
from common.storage import print_rows, read_rows
from schema.prediction_schema import (
    PREDICTION_HEADER,
    RECOMMENDATION_HEADER,
    prediction_rows,
    recommendation_rows,
)
from services.evaluation_service import (
    METHODS,
    export_predictions,
    export_recommendations,
    predict_pairs,
)
from services.pipeline_service import kernel_cf_recommend
from services.ratings_service import load_ratings


predict_router = Router(tags=["predictions"])

MODEL_OPTIONS = [
    option("--ratings", required=True, help="training ratings file"),
    option("--kernel", choices=["epanechnikov", "gaussian", "uniform"], default=None),
    option("--weighting", choices=["kernel", "similarity"], default=None),
    option("--bandwidth-t", dest="bandwidth_t", type=float, default=None, help="fixed b_t"),
    option("--bandwidth-u", dest="bandwidth_u", type=float, default=None, help="fixed b_u"),
]


def _model_settings(args, **overrides):
    return settings_from_args(
        args,
        kernel=args.kernel,
        weighting=args.weighting,
        bandwidth_t=args.bandwidth_t,
        bandwidth_u=args.bandwidth_u,
        **overrides,
    )


def _read_pairs(path):
    rows = read_rows(path)
    if rows and rows[0][1][:2] == ["user_id", "item_id"]:
        rows = rows[1:]
    pairs = []
    for number, fields in rows:
        if len(fields) < 2:
            raise ArgumentError(f"{path}: line {number} needs user_id,item_id")
        pairs.append((fields[0], fields[1]))
    return pairs


@predict_router.command(
    "predict",
    summary="Predict ratings for user/item pairs",
    arguments=MODEL_OPTIONS
    + [
        option("--method", choices=list(METHODS), default="kernel-cf"),
        option("--user", default=None),
        option("--item", default=None),
        option("--pairs", default=None, help="user_id,item_id file of pairs to predict"),
    ],
)
def predict(args) -> int:
    if args.pairs:
        pairs = _read_pairs(args.pairs)
    elif args.user is not None and args.item is not None:
        pairs = [(args.user, args.item)]
    else:
        raise ArgumentError("predict needs --pairs, or both --user and --item")

    settings = _model_settings(args)
    train = load_ratings(args.ratings, settings.delimiter)
    predictions = [p for p in predict_pairs(train, pairs, args.method, settings) if p is not None]

    if args.output:
        export_predictions(predictions, args.output)
    else:
        print_rows(PREDICTION_HEADER, prediction_rows(predictions))
    return 0


@predict_router.command(
    "recommend",
    summary="Top-N Kernel-CF recommendations for one user",
    arguments=MODEL_OPTIONS
    + [
        option("--user", required=True),
        option("--top-n", dest="top_n", type=int, default=None),
        option("--mode", choices=["user", "item"], default=None),
    ],
)
def recommend(args) -> int:
    settings = _model_settings(args, top_n=args.top_n, mode=args.mode)
    train = load_ratings(args.ratings, settings.delimiter)
    recommendations = kernel_cf_recommend(train, settings, args.user, settings.top_n)

    if args.output:
        export_recommendations(recommendations, args.output)
    else:
        print_rows(RECOMMENDATION_HEADER, recommendation_rows(recommendations))
    return 0
