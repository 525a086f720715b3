"""Parsing and validation of experiment result tables.

The input contract is a CSV with header

    seed,sigma_true,sigma_init,em_iter,nu_hat,nmse,sweeps,status

one row per (seed, initialization, outer iteration).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

REQUIRED_COLUMNS = ("seed", "sigma_true", "sigma_init", "em_iter", "nu_hat", "nmse", "sweeps", "status")

_NUMERIC = {
    "seed": int,
    "sigma_true": float,
    "sigma_init": float,
    "em_iter": int,
    "nu_hat": float,
    "nmse": float,
    "sweeps": int,
}


class SchemaError(ValueError):
    """The table does not satisfy the result-table contract."""


@dataclass(frozen=True)
class ResultTable:
    rows: tuple

    @property
    def sigma_values(self):
        return sorted({row["sigma_true"] for row in self.rows})

    def for_sigma(self, sigma):
        return [row for row in self.rows if row["sigma_true"] == sigma]


def load_table(path):
    """Read and validate a result table; raises :class:`SchemaError` on violations."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError("empty file: no header row")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"missing required columns: {missing}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            parsed = {}
            for col in REQUIRED_COLUMNS:
                value = raw.get(col)
                if value is None:
                    raise SchemaError(f"line {lineno}: missing value for {col!r}")
                conv = _NUMERIC.get(col)
                if conv is None:
                    parsed[col] = value
                    continue
                try:
                    parsed[col] = conv(value)
                except ValueError as exc:
                    raise SchemaError(f"line {lineno}: column {col!r}: {exc}") from exc
            rows.append(parsed)
    return ResultTable(rows=tuple(rows))
