"""Reader for the sweep simulator's columnar CSV files.

The files carry ``#`` metadata lines (one of which embeds the generating
configuration as JSON) followed by a column-name row and numeric rows.
This module is deliberately independent of the simulator package: the CSV
format is the interface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class FigureError(ValueError):
    """Input file missing, malformed, or mismatched with the figure kind."""


@dataclass
class Table:
    path: Path
    columns: list[str]
    data: np.ndarray
    config: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError as exc:
            raise FigureError(f"{self.path} has no column {name!r}") from exc

    def groups(self, key: str):
        """Yield (value, row-subtable) for consecutive groups of a key column."""
        values = self.column(key)
        for value in dict.fromkeys(values):
            yield value, self.data[values == value]

    def mode_frequencies_ghz(self) -> list[float]:
        try:
            return list(self.config["system"]["mode_frequencies_ghz"])
        except (KeyError, TypeError):
            return []


def read_table(path: str | Path) -> Table:
    path = Path(path)
    if not path.exists():
        raise FigureError(f"input file not found: {path}")
    config: dict = {}
    header_row = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# config="):
                    try:
                        config = json.loads(line[len("# config=") :])
                    except json.JSONDecodeError as exc:
                        raise FigureError(f"{path}: malformed config header: {exc}") from exc
                continue
            if header_row is None:
                header_row = [c.strip() for c in line.split(",")]
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                raise FigureError(f"{path}: non-numeric data row: {exc}") from exc
    if header_row is None or not rows:
        raise FigureError(f"{path} holds no data rows")
    data = np.asarray(rows)
    if data.shape[1] != len(header_row):
        raise FigureError(f"{path}: ragged rows do not match the {len(header_row)} columns")
    return Table(path=path, columns=header_row, data=data, config=config)


def require_columns(table: Table, expected: list[str], kind: str) -> None:
    if table.columns != expected:
        raise FigureError(
            f"{table.path} columns {table.columns} do not match the {kind} schema {expected}"
        )
