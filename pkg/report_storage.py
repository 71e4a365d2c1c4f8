from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from posterior_summaries import PosteriorSummary

SUMMARY_FILE = "summary.json"
INCLUSION_FILE = "inclusion.csv"
DIMENSION_FILE = "dimension.csv"
CONVERGENCE_FILE = "convergence.json"
VERIFY_FILE = "verify.json"
EXPERIMENT_CSV = "experiment.csv"
EXPERIMENT_JSON = "experiment.json"
DEFAULT_DIM_PLOT_MAX = 60

INCLUSION_HEADER = ["index", "name", "q", "q_regular"]
DIMENSION_HEADER = ["k", "probability"]
TRACE_HEADER = ["iteration", "k", "log_posterior", "gamma_hex"]


def format_float(value: Optional[float]) -> str:
    if value is None or not math.isfinite(value):
        return ""
    return f"{value:.17g}"


def json_ready(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_ready(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps(payload: Any) -> str:
    return json.dumps(json_ready(payload), indent=2, allow_nan=False) + "\n"


@dataclass
class InclusionRow:
    index: int
    name: str
    q: float
    q_regular: float

    def to_row(self) -> List[str]:
        return [str(self.index), self.name, format_float(self.q), format_float(self.q_regular)]


@dataclass
class DimensionRow:
    k: int
    probability: float

    def to_row(self) -> List[str]:
        return [str(self.k), format_float(self.probability)]


def inclusion_rows(summary: PosteriorSummary) -> List[InclusionRow]:
    """Per-covariate rows sorted by q descending, ties by index."""
    order = sorted(range(summary.p), key=lambda i: (-float(summary.q[i]), i))
    return [
        InclusionRow(i, summary.column_names[i], float(summary.q[i]), float(summary.q_regular[i]))
        for i in order
    ]


def dimension_rows(summary: PosteriorSummary, dim_plot_max: int = DEFAULT_DIM_PLOT_MAX) -> List[DimensionRow]:
    top = min(summary.p, max(dim_plot_max, 0))
    return [DimensionRow(k, float(summary.dim_posterior[k])) for k in range(top + 1)]


class ReportStorage:
    """Writes the analysis artifacts of one run into a single output directory."""

    def __init__(self, base_dir: Path):
        self.base_dir = Path(base_dir)

    def _path(self, name: str) -> Path:
        self.base_dir.mkdir(parents=True, exist_ok=True)
        return self.base_dir / name

    def write_json(self, name: str, payload: Any) -> Path:
        path = self._path(name)
        path.write_text(dumps(payload))
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
        path = self._path(name)
        with path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return path

    def write_summary(self, summary: PosteriorSummary, dim_plot_max: int = DEFAULT_DIM_PLOT_MAX) -> List[Path]:
        return [
            self.write_json(SUMMARY_FILE, summary.to_dict()),
            self.write_csv(INCLUSION_FILE, INCLUSION_HEADER, (r.to_row() for r in inclusion_rows(summary))),
            self.write_csv(
                DIMENSION_FILE, DIMENSION_HEADER, (r.to_row() for r in dimension_rows(summary, dim_plot_max))
            ),
        ]

    def write_convergence(self, payload: Dict[str, Any]) -> Path:
        return self.write_json(CONVERGENCE_FILE, payload)

    def write_traces(self, samples: Sequence[Any]) -> List[Path]:
        paths = []
        for chain in samples:
            paths.append(
                self.write_csv(f"trace-{chain.chain}.csv", TRACE_HEADER, (row.to_row() for row in chain.trace))
            )
        return paths


__all__ = [
    "SUMMARY_FILE",
    "INCLUSION_FILE",
    "DIMENSION_FILE",
    "CONVERGENCE_FILE",
    "VERIFY_FILE",
    "EXPERIMENT_CSV",
    "EXPERIMENT_JSON",
    "DEFAULT_DIM_PLOT_MAX",
    "format_float",
    "json_ready",
    "dumps",
    "InclusionRow",
    "DimensionRow",
    "inclusion_rows",
    "dimension_rows",
    "ReportStorage",
]
