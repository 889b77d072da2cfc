"""
Report formatting for the command line: JSON with big-integer-safe values,
or plain-text tables rendered with pandas.
"""

import json
from fractions import Fraction
from typing import Any, Dict

import pandas as pd

from utils.exact_core import IntMatrix, RatMatrix
from utils.matrix_io import encode_int


def to_jsonable(value: Any) -> Any:
    """Recursively convert report values into JSON-safe primitives."""
    if isinstance(value, bool) or value is None or isinstance(value, (str, float)):
        return value
    if isinstance(value, int):
        return encode_int(value)
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else encode_int(value.numerator)
    if isinstance(value, (IntMatrix, RatMatrix)):
        return to_jsonable(value.to_rows())
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, pd.DataFrame):
        return to_jsonable(value.to_dict(orient="records"))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "item"):
        # numpy scalars
        return to_jsonable(value.item())
    return str(value)


def _is_table(value: Any) -> bool:
    return isinstance(value, pd.DataFrame) or (
        isinstance(value, list) and bool(value) and all(isinstance(row, dict) for row in value)
    )


def _text_value(value: Any) -> str:
    if isinstance(value, (IntMatrix, RatMatrix)):
        return "\n" + str(value)
    if isinstance(value, Fraction):
        return f"{value} ({float(value):.6g})"
    return str(value)


def format_text(report: Dict[str, Any]) -> str:
    """Scalars as 'key: value' lines; row lists and DataFrames as aligned tables."""
    lines = []
    for key, value in report.items():
        if _is_table(value):
            frame = value if isinstance(value, pd.DataFrame) else pd.DataFrame(value)
            lines.append(f"{key}:")
            lines.append(frame.to_string(index=False))
        elif isinstance(value, dict):
            lines.append(f"{key}:")
            lines.extend(f"  {k}: {_text_value(v)}" for k, v in value.items())
        else:
            lines.append(f"{key}: {_text_value(value)}")
    return "\n".join(lines)


def format_report(report: Dict[str, Any], output_format: str = "json") -> str:
    if output_format == "text":
        return format_text(report)
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True)
