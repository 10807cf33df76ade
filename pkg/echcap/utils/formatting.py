import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

SIGNIFICANT_DIGITS = 12


def format_float(x: float, digits: int = SIGNIFICANT_DIGITS) -> str:
    """Shortest representation of ``x`` capped at ``digits`` significant digits."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    text = f"{x:.{digits}g}"
    return "0" if text == "-0" else text


def round_float(x: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    return float(format_float(x, digits))


def to_jsonable(value: Any, digits: int = SIGNIFICANT_DIGITS) -> Any:
    """Convert numpy containers and scalars recursively, rounding floats."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v, digits) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist(), digits)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return round_float(value, digits)
    return value


def render_json(payload: Any, digits: int = SIGNIFICANT_DIGITS) -> str:
    return json.dumps(to_jsonable(payload, digits), indent=2, sort_keys=True) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence], digits: int = SIGNIFICANT_DIGITS) -> str:
    """CSV text with ``\\n`` line endings and floats formatted by ``format_float``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v, digits) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buffer.getvalue()
