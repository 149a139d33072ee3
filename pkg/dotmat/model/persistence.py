from typing import Dict, Final, List, Tuple

import numpy as np

from ..common.exceptions import IntegrityError, ParseError
from ..common.logger import logger
from ..common.util import TextSource, format_float, numbered_lines, open_text
from .factors import FactorModel

MODEL_MAGIC: Final[str] = "DOTMAT-MODEL"
MODEL_VERSION: Final[str] = "1"


def save_model(model: FactorModel, destination: TextSource) -> None:
    """Write 'model' as a line-oriented text document:

        DOTMAT-MODEL 1 <k> <n_users> <n_items>
        U <user_id> <v1> ... <vk>
        V <item_id> <v1> ... <vk>

    Numbers use the shortest decimal form that parses back to the same
    float, so load_model(save_model(m)) == m bitwise
    """
    with open_text(destination, "w") as f:
        f.write(
            f"{MODEL_MAGIC} {MODEL_VERSION} {model.k} "
            f"{len(model.user_ids)} {len(model.item_ids)}\n"
        )
        for tag, ids, factors in (
            ("U", model.user_ids, model.user_factors),
            ("V", model.item_ids, model.item_factors),
        ):
            for ident, row in zip(ids, factors):
                values = " ".join(format_float(x) for x in row)
                f.write(f"{tag} {ident} {values}\n")
    logger.debug(f"Saved {model!r}")


def _parse_header(line: str) -> Tuple[int, int, int]:
    fields = line.split()
    if len(fields) != 5 or fields[0] != MODEL_MAGIC:
        raise ParseError("Not a dotmat model header", line=1, record=line)
    if fields[1] != MODEL_VERSION:
        raise ParseError(
            f"Unsupported model version {fields[1]}", line=1, record=line
        )
    try:
        k, n_users, n_items = (int(x) for x in fields[2:])
    except ValueError:
        raise ParseError("Non-integer header field", line=1, record=line) from None
    if k < 1 or n_users < 1 or n_items < 1:
        raise ParseError("Header sizes must be positive", line=1, record=line)
    return k, n_users, n_items


def load_model(source: TextSource) -> FactorModel:
    """Read a model written by save_model(). Either a complete model is
    returned or an exception is raised:

    - ParseError for a malformed header or record, or a truncated file
    - IntegrityError for records that contradict the header (vector length,
      record counts, repeated ids, non-finite values)
    """
    with open_text(source) as f:
        content = "".join(line for _, line in numbered_lines(f))
    if not content.strip():
        raise ParseError("Empty model file", line=1)
    ends_with_newline = content.endswith("\n")
    lines = content.split("\n")
    if ends_with_newline:
        lines.pop()
    k, n_users, n_items = _parse_header(lines[0])

    vectors: Dict[str, Dict[int, List[float]]] = {"U": {}, "V": {}}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        is_last = lineno == len(lines)
        if fields[0] not in vectors or len(fields) < 2:
            raise ParseError("Unknown record type", line=lineno, record=line)
        try:
            ident = int(fields[1])
            values = [float(x) for x in fields[2:]]
        except ValueError:
            raise ParseError(
                "Non-numeric record field", line=lineno, record=line
            ) from None
        if len(values) != k:
            if is_last and not ends_with_newline:
                raise ParseError(
                    "Truncated record at end of file", line=lineno, record=line
                )
            raise IntegrityError(
                f"line {lineno}: vector has {len(values)} entries, header says k={k}"
            )
        if not all(np.isfinite(values)):
            raise IntegrityError(f"line {lineno}: non-finite factor entry")
        if ident in vectors[fields[0]]:
            raise IntegrityError(f"line {lineno}: repeated id {ident}")
        vectors[fields[0]][ident] = values

    n_u, n_v = len(vectors["U"]), len(vectors["V"])
    if n_u < n_users or n_v < n_items:
        raise ParseError(
            f"Truncated model file: expected {n_users} users and {n_items} items, "
            f"found {n_u} and {n_v}",
            line=len(lines),
        )
    if n_u > n_users or n_v > n_items:
        raise IntegrityError(
            f"Model file holds {n_u} users and {n_v} items, header says "
            f"{n_users} and {n_items}"
        )

    user_ids = list(vectors["U"])
    item_ids = list(vectors["V"])
    return FactorModel(
        k,
        user_ids,
        item_ids,
        np.array([vectors["U"][u] for u in user_ids], dtype=np.float64),
        np.array([vectors["V"][i] for i in item_ids], dtype=np.float64),
    )
