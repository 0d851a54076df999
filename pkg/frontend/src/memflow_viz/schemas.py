"""CSV reading and schema validation for the solver lab's artifacts."""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path


class SchemaError(ValueError):
    """An input file does not match its documented CSV schema."""


class Table:
    """A parsed CSV: header, float columns, and the raw bytes' digest."""

    def __init__(self, header: list[str], rows: list[list[float]], digest: str):
        self.header = header
        self.rows = rows
        self.digest = digest

    def column(self, name: str) -> list[float]:
        idx = self.header.index(name)
        return [row[idx] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def read_csv_table(path, required: tuple[str, ...] = ()) -> Table:
    """Parse a CSV artifact, checking the required columns are present.

    Raises SchemaError naming the first missing column.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    raw = path.read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    lines = raw.decode("utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path} is empty")
    reader = csv.reader(lines)
    header = next(reader)
    for name in required:
        if name not in header:
            raise SchemaError(f"{path} is missing required column '{name}'")
    rows = []
    for parts in reader:
        if not parts:
            continue
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise SchemaError(f"{path} has a non-numeric cell: {exc}") from exc
    return Table(header, rows, digest)
