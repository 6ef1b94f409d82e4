"""Report containers and their CSV/JSON serialization.

All artifact files carry enough provenance (parameters, seed, grids) to be
reproduced from the file alone.  CSV output is RFC-4180 style with a
mandatory header row; floats are printed with 17 significant digits so that
round-tripping preserves the exact double.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

FLOAT_FMT = "%.17g"


def format_value(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


@dataclass
class ColumnTable:
    """An ordered set of equal-length named columns plus run metadata."""

    columns: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lengths = {k: len(np.atleast_1d(v)) for k, v in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"column lengths differ: {lengths}")
        self.columns = {k: np.atleast_1d(np.asarray(v)) for k, v in self.columns.items()}

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def to_csv(self, path_or_buf) -> None:
        if hasattr(path_or_buf, "write"):
            self._write_csv(path_or_buf)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(names)
        for i in range(len(self)):
            writer.writerow([format_value(self.columns[k][i]) for k in names])

    def csv_text(self) -> str:
        buf = io.StringIO()
        self._write_csv(buf)
        return buf.getvalue()

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "metadata": _jsonable(self.metadata),
            "columns": {k: [_jsonable(x) for x in v] for k, v in self.columns.items()},
        }

    def to_json(self, path_or_buf) -> None:
        obj = self.to_json_obj()
        if hasattr(path_or_buf, "write"):
            json.dump(obj, path_or_buf, indent=2)
        else:
            with open(path_or_buf, "w") as fh:
                json.dump(obj, fh, indent=2)
                fh.write("\n")


class TailRatioReport(ColumnTable):
    """Per-t table comparing an estimated tail (or density) to the reference laws."""


class DirectionSweepReport(ColumnTable):
    """Per-direction sup deviations plus the sweep summary in ``metadata``."""

    @property
    def exceedance_fraction(self) -> float:
        return float(self.metadata["exceedance_fraction"])


def _jsonable(v: Any):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def write_provenance(path, payload: dict[str, Any]) -> None:
    """Write the sidecar JSON that makes a run reproducible from disk."""
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
