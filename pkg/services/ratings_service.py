import logging
import math
import pathlib
import typing

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from common.errors import ArgumentError, IngestionError, MalformedLineError
from common.storage import read_lines, read_rows, write_rows
from models.rating_model import DatasetSplit, Rating, RatingsMatrix
from schema.rating_schema import RATING_HEADER, rating_rows


logger = logging.getLogger(__name__)


class IngestResult(BaseModel):
    matrix: RatingsMatrix = Field(...)
    duplicates: int = Field(default=0, ge=0)
    malformed: typing.Tuple[MalformedLineError, ...] = Field(default=())

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def parse_rating(number: int, fields: typing.List[str], text: str) -> Rating:
    if len(fields) < 3:
        raise MalformedLineError(number, f"expected 3 fields, got {len(fields)}", text)
    user_id, item_id, raw_value = fields[0], fields[1], fields[2]
    if not user_id or not item_id:
        raise MalformedLineError(number, "empty user or item id", text, 0)
    column = max(text.find(raw_value, len(user_id) + len(item_id)), 0)
    try:
        value = float(raw_value)
    except ValueError:
        raise MalformedLineError(number, f"rating {raw_value!r} is not a number", text, column)
    if not math.isfinite(value):
        raise MalformedLineError(number, f"rating {raw_value!r} is not finite", text, column)
    return Rating(user_id=user_id, item_id=item_id, value=value)


def is_header(fields: typing.List[str]) -> bool:
    if len(fields) < 3:
        return False
    try:
        float(fields[2])
    except ValueError:
        return True
    return False


def from_ratings(ratings: typing.Iterable[Rating]) -> typing.Tuple[RatingsMatrix, int]:
    """
    Build a matrix with first-seen index order. Duplicate pairs keep their first
    position but take the last value; the number of duplicates is returned.
    """
    users, items = {}, {}
    entries = {}
    duplicates = 0
    for rating in ratings:
        u = users.setdefault(rating.user_id, len(users))
        i = items.setdefault(rating.item_id, len(items))
        if (u, i) in entries:
            duplicates += 1
        entries[(u, i)] = rating.value
    matrix = RatingsMatrix(users=tuple(users), items=tuple(items), entries=entries)
    return matrix, duplicates


def ingest_ratings(path, delimiter: str = "auto") -> IngestResult:
    path = pathlib.Path(path)
    if not path.is_file():
        raise IngestionError(path, "file does not exist")

    rows = read_rows(path, delimiter)
    lines = read_lines(path)
    ratings = []
    malformed = []
    for position, (number, fields) in enumerate(rows):
        if position == 0 and is_header(fields):
            continue
        try:
            ratings.append(parse_rating(number, fields, lines[number - 1]))
        except MalformedLineError as e:
            malformed.append(e)
            logger.warning("Skipping malformed line in %s: %s", path, e.message.splitlines()[0])

    matrix, duplicates = from_ratings(ratings)
    if malformed:
        logger.warning("%d malformed line(s) skipped in %s", len(malformed), path)
    if duplicates:
        logger.warning("%d duplicate (user, item) pair(s) in %s resolved last-write-wins", duplicates, path)
    logger.info(
        "Loaded %d ratings (%d users, %d items) from %s",
        matrix.n_entries, matrix.n_users, matrix.n_items, path,
    )
    return IngestResult(matrix=matrix, duplicates=duplicates, malformed=tuple(malformed))


def load_ratings(path, delimiter: str = "auto") -> RatingsMatrix:
    return ingest_ratings(path, delimiter).matrix


def split(matrix: RatingsMatrix, holdout_fraction: float, seed: int) -> DatasetSplit:
    """
    Per-rating uniform holdout. The test side gets round(fraction * |entries|)
    entries; both sides keep the source's user and item index.
    """
    if not 0.0 < holdout_fraction < 1.0:
        raise ArgumentError(f"holdout_fraction must be in (0, 1), got {holdout_fraction!r}")
    if matrix.is_empty:
        raise ArgumentError("cannot split an empty ratings matrix")

    keys = list(matrix.entries)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(keys))
    n_test = int(round(holdout_fraction * len(keys)))
    test_pos = np.sort(order[:n_test])
    train_pos = np.sort(order[n_test:])

    train = matrix.subset(keys[k] for k in train_pos)
    test = matrix.subset(keys[k] for k in test_pos)
    logger.debug("Split %d ratings into %d train / %d test (seed %d)", len(keys), train.n_entries, test.n_entries, seed)
    return DatasetSplit(train=train, test=test, seed=seed, holdout_fraction=holdout_fraction)


def export_ratings(matrix: RatingsMatrix, path) -> None:
    write_rows(path, RATING_HEADER, rating_rows(matrix))


def export_split(dataset_split: DatasetSplit, train_path, test_path) -> None:
    export_ratings(dataset_split.train, train_path)
    export_ratings(dataset_split.test, test_path)
