import csv
import pathlib
import sys
import typing

from common.errors import IngestionError


DELIMITERS = {"comma": ",", "tab": "\t"}


def resolve_delimiter(name: str, first_line: str = "") -> str:
    if name in DELIMITERS:
        return DELIMITERS[name]
    return "\t" if "\t" in first_line else ","


def read_lines(path) -> typing.List[str]:
    path = pathlib.Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            return fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise IngestionError(path, str(e)) from e


def read_rows(path, delimiter: str = "auto") -> typing.List[typing.Tuple[int, typing.List[str]]]:
    """
    Read a delimiter-separated file, returning (1-based line number, fields)
    for every non-blank line.
    """
    lines = read_lines(path)
    first = next((line for line in lines if line.strip()), "")
    sep = resolve_delimiter(delimiter, first)
    rows = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = next(csv.reader([line], delimiter=sep))
        rows.append((number, [field.strip() for field in fields]))
    return rows


def write_rows(path, header: typing.Sequence[str], rows: typing.Iterable[typing.Sequence]) -> None:
    path = pathlib.Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
    except OSError as e:
        raise IngestionError(path, str(e)) from e


def write_key_values(path, values: typing.Mapping[str, typing.Any]) -> None:
    path = pathlib.Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            for key in sorted(values):
                fh.write(f"{key}={format_value(values[key])}\n")
    except OSError as e:
        raise IngestionError(path, str(e)) from e


def read_key_values(path) -> typing.Dict[str, str]:
    values = {}
    for line in read_lines(path):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def format_value(value) -> str:
    # repr keeps full float precision, so files re-import bit-exactly
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return format_value(value.item())
    return str(value)


def print_rows(header: typing.Sequence[str], rows: typing.Iterable[typing.Sequence], stream=None) -> None:
    writer = csv.writer(stream if stream is not None else sys.stdout, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])


def print_key_values(values: typing.Mapping[str, typing.Any], stream=None) -> None:
    stream = stream if stream is not None else sys.stdout
    for key in sorted(values):
        stream.write(f"{key}={format_value(values[key])}\n")
