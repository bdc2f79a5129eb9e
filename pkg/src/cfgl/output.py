"""CSV emission: comma separated, '.' decimals, LF endings, 17 significant digits."""

import csv
import math
from pathlib import Path

__all__ = ["fmt", "write_csv", "write_text"]


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int)) and not isinstance(value, float):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def write_csv(path, header, rows):
    """Write a rectangular table; raises ``ValueError`` on ragged rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    width = len(header)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            row = list(row)
            if len(row) != width:
                raise ValueError(f"row of length {len(row)} in a table of width {width}")
            writer.writerow([fmt(v) for v in row])
    return path


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
