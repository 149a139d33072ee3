import json
from typing import Any, Dict, List

import pandas as pd

from ..common.exceptions import ParseError
from ..common.util import TextSource, format_float, open_text
from .grid import ExperimentReport, ReportRow

REPORT_COLUMNS = ReportRow._fields

_FLOAT_COLUMNS = ("learning_rate", "mae", "matthew_degree", "train_seconds")


def _row_record(row: ReportRow) -> Dict[str, Any]:
    return row._asdict()


def emit_csv(report: ExperimentReport, destination: TextSource) -> None:
    """Write the report as CSV with the header
    algorithm,learning_rate,sample_size,mae,matthew_degree,train_seconds,seed.
    Floats are written with full round-trip precision"""
    df = pd.DataFrame(
        [_row_record(r) for r in report.rows], columns=list(REPORT_COLUMNS)
    )
    for col in _FLOAT_COLUMNS:
        df[col] = [format_float(x) for x in df[col]]
    with open_text(destination, "w") as f:
        df.to_csv(f, index=False, lineterminator="\n")


def emit_json(report: ExperimentReport, destination: TextSource) -> None:
    """Write the report rows as a JSON array of records"""
    with open_text(destination, "w") as f:
        json.dump([_row_record(r) for r in report.rows], f, indent=2)
        f.write("\n")


def load_json(source: TextSource) -> ExperimentReport:
    """Read back a report written by emit_json()"""
    with open_text(source) as f:
        try:
            records: List[Dict[str, Any]] = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid report JSON: {e.msg}", line=e.lineno) from e
    try:
        rows = [
            ReportRow(
                algorithm=str(r["algorithm"]),
                learning_rate=float(r["learning_rate"]),
                sample_size=int(r["sample_size"]),
                mae=float(r["mae"]),
                matthew_degree=float(r["matthew_degree"]),
                train_seconds=float(r["train_seconds"]),
                seed=int(r["seed"]),
            )
            for r in records
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Invalid report record: {e}") from e
    return ExperimentReport(rows=rows)
