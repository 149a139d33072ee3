import io
from typing import IO, Dict, Iterable, Optional, Tuple

import pandas as pd

from ..common.exceptions import ParseError, SchemaError
from ..common.logger import logger
from ..common.util import TextSource, numbered_lines, open_text
from ..model.dataset import InteractionDataset, RatingTriple

MOVIELENS_SEPARATOR = "::"

# Columns of the CSV files written by write_dataset()
CACHE_COLUMNS = ("user_id", "item_id", "rating", "timestamp")


def _build_dataset(
    triples: Iterable[RatingTriple], r_max: Optional[float]
) -> InteractionDataset:
    """Deduplicate (user, item) pairs, keeping the last occurrence, and
    build the dataset"""
    kept: Dict[Tuple[int, int], RatingTriple] = {}
    duplicates = 0
    for t in triples:
        pair = (t.user_id, t.item_id)
        if pair in kept:
            duplicates += 1
            # Re-insert so that the kept triple sits at its last position
            del kept[pair]
        kept[pair] = t
    if duplicates:
        logger.warning(
            f"Dropped {duplicates} duplicate (user, item) rows, kept the last "
            "occurrence"
        )
    dataset = InteractionDataset.from_triples(
        kept.values(), r_max=r_max, duplicates_dropped=duplicates
    )
    logger.info(
        f"Loaded {len(dataset)} ratings from {len(dataset.users)} users "
        f"on {len(dataset.items)} items (r_max={dataset.r_max})"
    )
    return dataset


def _parse_rating(value: str, lineno: int, record: str) -> float:
    try:
        rating = float(value)
    except ValueError:
        raise ParseError("Non-numeric rating", line=lineno, record=record) from None
    if not rating > 0 or rating == float("inf"):
        raise ParseError(
            "Rating must be positive and finite", line=lineno, record=record
        )
    return rating


def parse_movielens(
    source: TextSource, r_max: Optional[float] = None
) -> InteractionDataset:
    """Parse a MovieLens ratings file, one UserID::MovieID::Rating::Timestamp
    record per line. Blank lines are ignored.

    :param source: path or text stream
    :param r_max: rating ceiling, inferred from the data if None
    """

    def _records(lines: IO[str]) -> Iterable[RatingTriple]:
        for lineno, raw in numbered_lines(lines):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(MOVIELENS_SEPARATOR)
            if len(fields) != 4:
                raise ParseError(
                    f"Expected 4 fields, found {len(fields)}",
                    line=lineno,
                    record=line,
                )
            try:
                user_id, item_id, timestamp = (
                    int(fields[0]),
                    int(fields[1]),
                    int(fields[3]),
                )
            except ValueError:
                raise ParseError(
                    "Non-integer id or timestamp", line=lineno, record=line
                ) from None
            yield RatingTriple(
                user_id, item_id, _parse_rating(fields[2], lineno, line), timestamp
            )

    with open_text(source) as f:
        return _build_dataset(_records(f), r_max)


def parse_csv(
    source: TextSource,
    user_col: str = "user_id",
    item_col: str = "item_id",
    rating_col: str = "rating",
    timestamp_col: Optional[str] = None,
    r_max: Optional[float] = None,
    sep: str = ",",
) -> InteractionDataset:
    """Parse a CSV ratings file with a header row. Only the named columns
    are read, other columns are ignored. Row numbers in errors are 1-based
    and don't count the header.

    :param timestamp_col: optional column holding integer epoch seconds.
    Empty cells give triples without timestamp
    """
    with open_text(source) as f:
        # Line 0 is the header
        text = "".join(line for _, line in numbered_lines(f, start=0))
    try:
        df = pd.read_csv(
            io.StringIO(text), sep=sep, dtype=str, keep_default_na=False
        )
    except pd.errors.EmptyDataError:
        raise ParseError("Missing header row", line=1) from None
    except pd.errors.ParserError as e:
        raise ParseError(f"Malformed CSV: {e}") from e

    wanted = [user_col, item_col, rating_col]
    if timestamp_col is not None:
        wanted.append(timestamp_col)
    missing = [c for c in wanted if c not in df.columns]
    if missing:
        raise SchemaError(
            f"Missing column(s) {', '.join(missing)}; available: "
            f"{', '.join(map(str, df.columns))}"
        )

    timestamps = (
        df[timestamp_col] if timestamp_col is not None else [""] * len(df)
    )

    def _records() -> Iterable[RatingTriple]:
        for row, (u, i, r, ts) in enumerate(
            zip(df[user_col], df[item_col], df[rating_col], timestamps), start=1
        ):
            record = f"{u},{i},{r}"
            try:
                user_id, item_id = int(u), int(i)
                timestamp = int(ts) if ts.strip() else None
            except ValueError:
                raise ParseError(
                    "Non-integer id or timestamp", line=row, record=record
                ) from None
            yield RatingTriple(
                user_id, item_id, _parse_rating(r, row, record), timestamp
            )

    return _build_dataset(_records(), r_max)


def write_dataset(dataset: InteractionDataset, destination: TextSource) -> None:
    """Cache a dataset as CSV with the header user_id,item_id,rating,timestamp"""
    df = pd.DataFrame(
        {
            "user_id": [t.user_id for t in dataset.triples],
            "item_id": [t.item_id for t in dataset.triples],
            "rating": [t.rating for t in dataset.triples],
            "timestamp": pd.array(
                [t.timestamp for t in dataset.triples], dtype="Int64"
            ),
        },
        columns=list(CACHE_COLUMNS),
    )
    with open_text(destination, "w") as f:
        df.to_csv(f, index=False)


def read_dataset(
    source: TextSource, r_max: Optional[float] = None
) -> InteractionDataset:
    """Read a dataset cached by write_dataset()"""
    return parse_csv(source, *CACHE_COLUMNS[:3], timestamp_col="timestamp", r_max=r_max)
