from models.rating_model import RatingsMatrix


RATING_HEADER = ("user_id", "item_id", "rating")


def get_rating_serial(user_id: str, item_id: str, value: float) -> dict:
    return {
        "user_id": str(user_id),
        "item_id": str(item_id),
        "rating": float(value),
    }


def list_ratings(matrix: RatingsMatrix) -> list:
    return [get_rating_serial(*triple) for triple in matrix.triples()]


def rating_rows(matrix: RatingsMatrix) -> list:
    return [[row[key] for key in RATING_HEADER] for row in list_ratings(matrix)]
