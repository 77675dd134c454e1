"""Reader for the harness CSV schema: '#'-prefixed comment block of
'key: value' pairs, one header row, comma-separated numeric rows."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FigsError, MissingColumn


@dataclass(frozen=True)
class CsvTable:
    path: str
    comments: dict = field(default_factory=dict)
    columns: tuple = ()
    data: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def column(self, name: str) -> np.ndarray:
        """Numeric column by header name; raises MissingColumn."""
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise MissingColumn(name, self.path) from None
        return self.data[:, idx]

    def string_column(self, name: str) -> list:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise MissingColumn(name, self.path) from None
        return [row[idx] for row in self._raw_rows]

    def require(self, *names: str) -> None:
        for name in names:
            if name not in self.columns:
                raise MissingColumn(name, self.path)


def read_csv(path: str) -> CsvTable:
    comments: dict = {}
    header: list[str] = []
    rows: list[list[str]] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    comments[key.strip()] = value.strip()
                continue
            if not header:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append([c.strip() for c in line.split(",")])
    if not header:
        raise FigsError(f"{path}: no header row found")

    numeric = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise FigsError(f"{path}: row {i + 1} has {len(row)} fields, "
                            f"header has {len(header)}")
        for j, cell in enumerate(row):
            try:
                numeric[i, j] = float(cell)
            except ValueError:
                numeric[i, j] = np.nan
    table = CsvTable(path=path, comments=comments, columns=tuple(header),
                     data=numeric)
    object.__setattr__(table, "_raw_rows", rows)
    return table
