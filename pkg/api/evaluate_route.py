from api.router import Router, option, settings_from_args
from common.storage import print_key_values
from schema.prediction_schema import get_report_serial
from services.evaluation_service import METHODS, evaluate, export_report
from services.ratings_service import load_ratings, split


evaluate_router = Router(tags=["evaluation"])


@evaluate_router.command(
    "evaluate",
    summary="Hold out ratings, predict them from the rest and report RMSE / MAE / coverage",
    arguments=[
        option("--ratings", required=True, help="user,item,rating file"),
        option("--method", choices=list(METHODS) + ["all"], default="kernel-cf"),
        option("--holdout", type=float, default=None, help="test fraction in (0, 1)"),
        option("--kernel", choices=["epanechnikov", "gaussian", "uniform"], default=None),
        option("--weighting", choices=["kernel", "similarity"], default=None),
        option("--no-fallback", dest="allow_fallback", action="store_false", default=None,
               help="count fallback predictions as not covered"),
    ],
)
def evaluate_ratings(args) -> int:
    settings = settings_from_args(
        args,
        holdout_fraction=args.holdout,
        kernel=args.kernel,
        weighting=args.weighting,
        allow_fallback=args.allow_fallback,
    )
    matrix = load_ratings(args.ratings, settings.delimiter)
    dataset_split = split(matrix, settings.holdout_fraction, settings.seed)
    report = evaluate(dataset_split, args.method, settings)

    if args.output:
        export_report(report, args.output)
    else:
        print_key_values(get_report_serial(report))
    return 0
