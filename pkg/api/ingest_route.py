from api.router import Router, option, settings_from_args
from common.errors import ArgumentError
from common.storage import print_rows
from schema.rating_schema import RATING_HEADER, rating_rows
from services.ratings_service import export_ratings, export_split, ingest_ratings, split


ingest_router = Router(tags=["ratings"])


@ingest_router.command(
    "ingest",
    summary="Load a ratings file, report skipped lines and write the de-duplicated ratings",
    arguments=[
        option("--ratings", required=True, help="user,item,rating file (comma or tab separated)"),
        option("--delimiter", choices=["auto", "comma", "tab"], default=None),
        option("--holdout", type=float, default=None, help="also write a train/test split with this test fraction"),
        option("--train-output", default=None, help="train side of the split"),
        option("--test-output", default=None, help="test side of the split"),
    ],
)
def ingest(args) -> int:
    settings = settings_from_args(args, delimiter=args.delimiter, holdout_fraction=args.holdout)
    result = ingest_ratings(args.ratings, settings.delimiter)

    if args.output:
        export_ratings(result.matrix, args.output)
    else:
        print_rows(RATING_HEADER, rating_rows(result.matrix))

    if args.holdout is not None:
        if not (args.train_output and args.test_output):
            raise ArgumentError("--holdout needs --train-output and --test-output")
        dataset_split = split(result.matrix, settings.holdout_fraction, settings.seed)
        export_split(dataset_split, args.train_output, args.test_output)
    return 0
